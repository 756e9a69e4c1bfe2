#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace stepvol {

// Noisy discrete observations of the latent process on [0, T].
// times holds t_0 < t_1 < ... < t_n with t_0 = 0; values holds y_1..y_n,
// one observation per time except t_0.
struct Observations {
    std::vector<double> times;
    std::vector<double> values;

    Observations(std::vector<double> t, std::vector<double> y)
        : times(std::move(t)), values(std::move(y)) {
        if (times.size() != values.size() + 1)
            throw std::invalid_argument("observations: need one more time than values");
        if (values.size() < 2)
            throw std::invalid_argument("observations: need at least two observations");
        if (times.front() != 0.0)
            throw std::invalid_argument("observations: initial time must be 0");
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (!(times[i] > times[i - 1]))
                throw std::invalid_argument("observations: times must be strictly increasing");
        }
        for (double v : values) {
            if (!std::isfinite(v))
                throw std::invalid_argument("observations: values must be finite");
        }
    }

    std::size_t n() const { return values.size(); }
    double horizon() const { return times.back(); }

    // spacings Delta_i = t_i - t_{i-1}, i = 1..n
    std::vector<double> deltas() const {
        std::vector<double> d(n());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = times[i + 1] - times[i];
        return d;
    }
};

// Decomposition n = m*N + r of the observation index range into N bins of
// m indices each, the last extended by the remainder r.
struct BinPartition {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t num_bins = 0;  // N
    std::size_t remainder = 0; // r

    static BinPartition from_m(std::size_t n, std::size_t m) {
        if (m < 1 || m > n)
            throw std::invalid_argument("partition: need 1 <= m <= n");
        BinPartition p;
        p.n = n;
        p.m = m;
        p.num_bins = n / m;
        p.remainder = n - p.m * p.num_bins;
        return p;
    }

    // m_k, k = 1..N
    std::size_t count(std::size_t k) const {
        check_bin(k);
        return k < num_bins ? m : m + remainder;
    }
    // first/last 1-based observation index in bin k
    std::size_t first_index(std::size_t k) const {
        check_bin(k);
        return (k - 1) * m + 1;
    }
    std::size_t last_index(std::size_t k) const {
        check_bin(k);
        return k < num_bins ? k * m : n;
    }

private:
    void check_bin(std::size_t k) const {
        if (k < 1 || k > num_bins) throw std::out_of_range("partition: bin index out of range");
    }
};

// Partition from a requested bin count: m = floor(n/target), N = floor(n/m).
// When target divides n this yields exactly N = target bins.
inline BinPartition make_partition(std::size_t n, std::size_t target_bins) {
    if (target_bins < 2 || target_bins >= n)
        throw std::invalid_argument("partition: need 2 <= target_bins < n");
    return BinPartition::from_m(n, n / target_bins);
}

// bin k containing observation index i (both 1-based)
inline std::size_t bin_of(std::size_t i, const BinPartition& p) {
    if (i < 1 || i > p.n) throw std::out_of_range("bin_of: index out of range");
    return std::min((i - 1) / p.m, p.num_bins - 1) + 1;
}

// bin edges e_0..e_N with e_k = t_{mk} for interior k and e_N = t_n
inline std::vector<double> bin_edges(const BinPartition& p, std::span<const double> times) {
    if (times.size() != p.n + 1)
        throw std::invalid_argument("bin_edges: times do not match partition");
    std::vector<double> edges(p.num_bins + 1);
    for (std::size_t k = 0; k < p.num_bins; ++k) edges[k] = times[k * p.m];
    edges[p.num_bins] = times[p.n];
    return edges;
}

// Piecewise-constant volatility level xi_k on bins B_k; bins are half-open
// [e_{k-1}, e_k) except the last, which is closed at T.
struct StepVolatility {
    BinPartition partition;
    std::vector<double> edges; // e_0..e_N
    std::vector<double> xi;    // xi_1..xi_N

    StepVolatility(BinPartition p, std::vector<double> e, std::vector<double> levels)
        : partition(p), edges(std::move(e)), xi(std::move(levels)) {
        if (edges.size() != partition.num_bins + 1 || xi.size() != partition.num_bins)
            throw std::invalid_argument("step volatility: size mismatch");
        for (std::size_t k = 1; k < edges.size(); ++k)
            if (!(edges[k] > edges[k - 1]))
                throw std::invalid_argument("step volatility: edges must be increasing");
        for (double v : xi)
            if (!(v > 0.0)) throw std::invalid_argument("step volatility: levels must be positive");
    }

    // squared level theta_k = xi_k^2, k 1-based
    double theta(std::size_t k) const { return xi.at(k - 1) * xi.at(k - 1); }

    double at(double t) const {
        if (!(t >= edges.front()) || !(t <= edges.back()))
            throw std::domain_error("step volatility: time outside [0, T]");
        const auto it = std::upper_bound(edges.begin(), edges.end(), t);
        const auto k = std::min<std::size_t>(it - edges.begin(), partition.num_bins);
        return xi[k - 1];
    }
};

// Per-bin sufficient statistics Z_k = sum over bin k of (x_i - x_{i-1})^2 / Delta_i.
struct BinStats {
    std::vector<double> z;
    std::vector<std::size_t> counts;
};

inline BinStats bin_stats(std::span<const double> x, std::span<const double> deltas,
                          const BinPartition& p) {
    if (x.size() != p.n + 1 || deltas.size() != p.n)
        throw std::invalid_argument("bin_stats: path does not match partition");
    BinStats s;
    s.z.resize(p.num_bins);
    s.counts.resize(p.num_bins);
    for (std::size_t k = 1; k <= p.num_bins; ++k) {
        double acc = 0.0;
        for (std::size_t i = p.first_index(k); i <= p.last_index(k); ++i) {
            const double d = x[i] - x[i - 1];
            acc += d * d / deltas[i - 1];
        }
        s.z[k - 1] = acc;
        s.counts[k - 1] = p.count(k);
    }
    return s;
}

inline BinStats bin_stats(std::span<const double> x, const Observations& obs,
                          const BinPartition& p) {
    if (obs.n() != p.n)
        throw std::invalid_argument("bin_stats: observations do not match partition");
    return bin_stats(x, obs.deltas(), p);
}

} // namespace stepvol
