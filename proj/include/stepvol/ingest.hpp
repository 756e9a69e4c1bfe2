#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stepvol/model.hpp"

namespace stepvol {

// Column layout and timestamp format of a delimited tick file. The timestamp
// format is a strptime pattern (it must carry a date); a fractional-seconds
// suffix ".ddd..." after the seconds field is picked up automatically.
struct TickFormat {
    std::size_t timestamp_col = 0;
    std::size_t bid_col = 1;
    std::optional<std::size_t> ask_col = 2;
    std::string timestamp_format = "%Y%m%d %H:%M:%S";
    char delimiter = ',';
    bool skip_header = false;
};

// One day of quotes, sorted by time with duplicate timestamps collapsed.
// stamp_us is microseconds since the Unix epoch (UTC); stamp_raw keeps the
// original text so a series can be re-emitted exactly.
struct TickSeries {
    std::vector<std::int64_t> stamp_us;
    std::vector<std::string> stamp_raw;
    std::vector<double> bid;
    std::vector<double> ask; // empty when the file has no ask column

    std::size_t size() const { return stamp_us.size(); }
    bool has_ask() const { return !ask.empty(); }
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::int64_t parse_timestamp_us(std::string_view text, const std::string& format,
                                       std::size_t line_no) {
    std::tm tm{};
    const std::string owned(text);
    const char* rest = ::strptime(owned.c_str(), format.c_str(), &tm);
    if (rest == nullptr)
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": cannot parse timestamp '" + owned + "'");
    std::int64_t micros = 0;
    if (*rest == '.') {
        ++rest;
        std::int64_t scale = 100000;
        while (*rest >= '0' && *rest <= '9' && scale > 0) {
            micros += (*rest - '0') * scale;
            scale /= 10;
            ++rest;
        }
        while (*rest >= '0' && *rest <= '9') ++rest; // ignore beyond microseconds
    }
    if (*rest != '\0')
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": trailing characters in timestamp '" + owned + "'");
    const time_t secs = ::timegm(&tm);
    return static_cast<std::int64_t>(secs) * 1000000 + micros;
}

inline double parse_price(std::string_view text, std::size_t line_no, const char* what) {
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end)
        throw std::runtime_error("line " + std::to_string(line_no) + ": cannot parse " +
                                 what + " '" + std::string(text) + "'");
    return value;
}

inline std::string format_shortest(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

constexpr std::int64_t microseconds_per_day = 86400LL * 1000000;

inline std::int64_t day_start(std::int64_t stamp_us) {
    // stamps from strptime/timegm are nonnegative for any sane tick file
    return (stamp_us / microseconds_per_day) * microseconds_per_day;
}

} // namespace detail

inline TickSeries parse_ticks(std::istream& input, const TickFormat& format) {
    struct Row {
        std::int64_t stamp;
        std::string raw;
        double bid;
        double ask;
        std::size_t order;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t min_cols = std::max(format.timestamp_col, format.bid_col);
    if (format.ask_col) min_cols = std::max(min_cols, *format.ask_col);

    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (format.skip_header && line_no == 1) continue;
        const auto fields = detail::split_fields(line, format.delimiter);
        if (fields.size() <= min_cols)
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected at least " +
                                     std::to_string(min_cols + 1) + " columns, got " +
                                     std::to_string(fields.size()));
        Row row;
        row.raw = std::string(fields[format.timestamp_col]);
        row.stamp = detail::parse_timestamp_us(fields[format.timestamp_col],
                                               format.timestamp_format, line_no);
        row.bid = detail::parse_price(fields[format.bid_col], line_no, "bid");
        if (!(row.bid > 0.0))
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": nonpositive bid price");
        row.ask = 0.0;
        if (format.ask_col) {
            row.ask = detail::parse_price(fields[*format.ask_col], line_no, "ask");
            if (!(row.ask > 0.0))
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": nonpositive ask price");
        }
        row.order = line_no;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty tick series");

    // sort by timestamp, later input rows last within a tie
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.stamp != b.stamp ? a.stamp < b.stamp : a.order < b.order;
    });

    TickSeries series;
    series.stamp_us.reserve(rows.size());
    for (const Row& row : rows) {
        if (!series.stamp_us.empty() && series.stamp_us.back() == row.stamp) {
            // duplicate timestamp: the later row wins
            series.stamp_raw.back() = row.raw;
            series.bid.back() = row.bid;
            if (format.ask_col) series.ask.back() = row.ask;
            continue;
        }
        series.stamp_us.push_back(row.stamp);
        series.stamp_raw.push_back(row.raw);
        series.bid.push_back(row.bid);
        if (format.ask_col) series.ask.push_back(row.ask);
    }
    return series;
}

// canonical emission: timestamp,bid[,ask] with shortest round-trip prices
inline void write_ticks(std::ostream& out, const TickSeries& series) {
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.stamp_raw[i] << ',' << detail::format_shortest(series.bid[i]);
        if (series.has_ask()) out << ',' << detail::format_shortest(series.ask[i]);
        out << '\n';
    }
}

// keep rows at positions 0, k, 2k, ...
inline TickSeries subsample_every(const TickSeries& series, std::size_t k) {
    if (k < 1) throw std::domain_error("subsample_every: k must be >= 1");
    TickSeries out;
    for (std::size_t i = 0; i < series.size(); i += k) {
        out.stamp_us.push_back(series.stamp_us[i]);
        out.stamp_raw.push_back(series.stamp_raw[i]);
        out.bid.push_back(series.bid[i]);
        if (series.has_ask()) out.ask.push_back(series.ask[i]);
    }
    return out;
}

// How the [0,1] time axis is anchored: DayStart maps midnight of the first
// tick's day to 0 and the last tick to 1; CalendarDay maps the whole day to
// [0,1], so the horizon ends at the last tick strictly before 1.
enum class TimeAnchor { DayStart, CalendarDay };

inline Observations to_observations(const TickSeries& series,
                                    TimeAnchor anchor = TimeAnchor::DayStart) {
    if (series.size() < 2)
        throw std::invalid_argument("to_observations: need at least two ticks");
    const std::int64_t w0 = detail::day_start(series.stamp_us.front());
    const std::int64_t w1 = anchor == TimeAnchor::CalendarDay
                                ? w0 + detail::microseconds_per_day
                                : series.stamp_us.back();
    if (series.stamp_us.front() == w0)
        throw std::invalid_argument("to_observations: first tick coincides with the day start");
    if (series.stamp_us.back() > w0 + detail::microseconds_per_day)
        throw std::invalid_argument("to_observations: ticks span more than one calendar day");
    const double span = static_cast<double>(w1 - w0);

    std::vector<double> times(series.size() + 1);
    std::vector<double> values(series.size());
    times[0] = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        times[i + 1] = static_cast<double>(series.stamp_us[i] - w0) / span;
        if (!(series.bid[i] > 0.0))
            throw std::invalid_argument("to_observations: nonpositive bid price");
        values[i] = std::log(series.bid[i]);
    }
    return Observations(std::move(times), std::move(values));
}

} // namespace stepvol
