#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stepvol/gibbs.hpp"
#include "stepvol/model.hpp"

namespace stepvol {

namespace detail {

// scientific with 17 significant digits: round-trips doubles exactly
inline std::string format_full(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, std::size_t line_no) {
    double value = 0.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc{} || result.ptr != text.data() + text.size())
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": cannot parse number '" + std::string(text) + "'");
    return value;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

// invokes fn(line, line_no) for every nonempty data line after the header;
// returns the header line
template <typename Fn>
std::string scan_csv(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    std::string header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            header = line;
            continue;
        }
        if (line.empty()) continue;
        fn(std::string_view(line), line_no);
    }
    return header;
}

template <typename Fn>
void with_output_file(const std::string& path, Fn&& fn) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    fn(out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline std::ifstream open_input_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

} // namespace detail

// --- observations: header t,y; first row carries t_0 with an empty y ---

inline void write_observations(std::ostream& out, const Observations& obs) {
    out << "t,y\n";
    out << detail::format_full(obs.times[0]) << ",\n";
    for (std::size_t i = 1; i < obs.times.size(); ++i)
        out << detail::format_full(obs.times[i]) << ','
            << detail::format_full(obs.values[i - 1]) << '\n';
}

inline Observations read_observations(std::istream& in) {
    std::vector<double> times, values;
    const std::string header = detail::scan_csv(in, [&](std::string_view line,
                                                        std::size_t line_no) {
        const auto fields = detail::split_csv(line);
        if (fields.size() != 2)
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": expected two columns");
        times.push_back(detail::parse_double(fields[0], line_no));
        if (fields[1].empty()) {
            if (times.size() != 1)
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": only the first row may omit y");
        } else {
            values.push_back(detail::parse_double(fields[1], line_no));
        }
    });
    if (header != "t,y") throw std::runtime_error("observations csv: expected header 't,y'");
    if (times.empty()) throw std::runtime_error("observations csv: no data rows");
    return Observations(std::move(times), std::move(values));
}

inline void write_observations_file(const std::string& path, const Observations& obs) {
    detail::with_output_file(path, [&](std::ostream& out) { write_observations(out, obs); });
}

inline Observations read_observations_file(const std::string& path) {
    auto in = detail::open_input_file(path);
    return read_observations(in);
}

// --- ground truth: header t,s_true, one row per time stamp ---

inline void write_truth(std::ostream& out, std::span<const double> times,
                        std::span<const double> s_true) {
    if (times.size() != s_true.size())
        throw std::invalid_argument("truth csv: times/values size mismatch");
    out << "t,s_true\n";
    for (std::size_t i = 0; i < times.size(); ++i)
        out << detail::format_full(times[i]) << ',' << detail::format_full(s_true[i]) << '\n';
}

inline void write_truth_file(const std::string& path, std::span<const double> times,
                             std::span<const double> s_true) {
    detail::with_output_file(path, [&](std::ostream& out) { write_truth(out, times, s_true); });
}

// --- trace: header iter,alpha,eta_v,theta_1,...,theta_N ---

inline void write_trace(std::ostream& out, const Trace& trace) {
    out << "iter,alpha,eta_v";
    for (std::size_t k = 1; k <= trace.num_bins; ++k) out << ",theta_" << k;
    out << '\n';
    for (std::size_t it = 0; it < trace.iterations; ++it) {
        out << (it + 1) << ',' << detail::format_full(trace.alpha[it]) << ','
            << detail::format_full(trace.eta_v[it]);
        for (double th : trace.theta_row(it)) out << ',' << detail::format_full(th);
        out << '\n';
    }
}

inline void write_trace_file(const std::string& path, const Trace& trace) {
    detail::with_output_file(path, [&](std::ostream& out) { write_trace(out, trace); });
}

// trace file contents; zeta and acceptance flags are not serialized
struct TraceFile {
    std::size_t iterations = 0;
    std::size_t num_bins = 0;
    std::vector<double> alpha;
    std::vector<double> eta_v;
    std::vector<double> theta; // iterations x num_bins
};

inline TraceFile read_trace(std::istream& in) {
    TraceFile file;
    std::size_t expected_cols = 0;
    const std::string header = detail::scan_csv(in, [&](std::string_view line,
                                                        std::size_t line_no) {
        const auto fields = detail::split_csv(line);
        if (expected_cols == 0) expected_cols = fields.size();
        if (fields.size() != expected_cols)
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": wrong column count");
        if (fields.size() < 4)
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": expected at least four columns");
        file.alpha.push_back(detail::parse_double(fields[1], line_no));
        file.eta_v.push_back(detail::parse_double(fields[2], line_no));
        for (std::size_t k = 3; k < fields.size(); ++k)
            file.theta.push_back(detail::parse_double(fields[k], line_no));
        ++file.iterations;
    });
    const auto cols = detail::split_csv(header);
    if (cols.size() < 4 || cols[0] != "iter" || cols[1] != "alpha" || cols[2] != "eta_v")
        throw std::runtime_error("trace csv: unexpected header");
    for (std::size_t k = 3; k < cols.size(); ++k)
        if (cols[k] != "theta_" + std::to_string(k - 2))
            throw std::runtime_error("trace csv: unexpected header");
    if (file.iterations == 0) throw std::runtime_error("trace csv: no data rows");
    if (expected_cols != cols.size())
        throw std::runtime_error("trace csv: rows do not match header");
    file.num_bins = cols.size() - 3;
    return file;
}

inline TraceFile read_trace_file(const std::string& path) {
    auto in = detail::open_input_file(path);
    return read_trace(in);
}

// --- summary: header bin,t_lo,t_hi,post_mean,q025,q975 ---

inline void write_summary(std::ostream& out, const PosteriorSummary& summary) {
    out << "bin,t_lo,t_hi,post_mean,q025,q975\n";
    for (std::size_t k = 0; k < summary.num_bins; ++k)
        out << (k + 1) << ',' << detail::format_full(summary.t_lo[k]) << ','
            << detail::format_full(summary.t_hi[k]) << ','
            << detail::format_full(summary.mean[k]) << ','
            << detail::format_full(summary.q025[k]) << ','
            << detail::format_full(summary.q975[k]) << '\n';
}

inline void write_summary_file(const std::string& path, const PosteriorSummary& summary) {
    detail::with_output_file(path, [&](std::ostream& out) { write_summary(out, summary); });
}

inline PosteriorSummary read_summary(std::istream& in) {
    PosteriorSummary summary;
    const std::string header = detail::scan_csv(in, [&](std::string_view line,
                                                        std::size_t line_no) {
        const auto fields = detail::split_csv(line);
        if (fields.size() != 6)
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": expected six columns");
        summary.t_lo.push_back(detail::parse_double(fields[1], line_no));
        summary.t_hi.push_back(detail::parse_double(fields[2], line_no));
        summary.mean.push_back(detail::parse_double(fields[3], line_no));
        summary.q025.push_back(detail::parse_double(fields[4], line_no));
        summary.q975.push_back(detail::parse_double(fields[5], line_no));
        ++summary.num_bins;
    });
    if (header != "bin,t_lo,t_hi,post_mean,q025,q975")
        throw std::runtime_error("summary csv: unexpected header");
    if (summary.num_bins == 0) throw std::runtime_error("summary csv: no data rows");
    return summary;
}

inline PosteriorSummary read_summary_file(const std::string& path) {
    auto in = detail::open_input_file(path);
    return read_summary(in);
}

} // namespace stepvol
