#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "stepvol/model.hpp"
#include "stepvol/rng.hpp"

namespace stepvol {

// State-increment variances w_i of the local-level model x_i = x_{i-1} + u_i,
// u_i ~ N(0, w_i) with w_i = theta_{bin(i)} * Delta_i.
struct StateNoise {
    std::vector<double> w;
};

inline StateNoise state_noise(std::span<const double> theta, const BinPartition& p,
                              std::span<const double> deltas) {
    if (theta.size() != p.num_bins || deltas.size() != p.n)
        throw std::invalid_argument("state_noise: size mismatch");
    for (double th : theta)
        if (!(th > 0.0)) throw std::domain_error("state_noise: theta must be positive");
    for (double d : deltas)
        if (!(d > 0.0)) throw std::domain_error("state_noise: spacings must be positive");
    StateNoise out;
    out.w.resize(p.n);
    for (std::size_t k = 1; k <= p.num_bins; ++k) {
        const double th = theta[k - 1];
        for (std::size_t i = p.first_index(k); i <= p.last_index(k); ++i)
            out.w[i - 1] = th * deltas[i - 1];
    }
    return out;
}

// Forward Kalman pass. mu/C are the filtering mean and variance of x_i given
// y_{1:i} (index 0 holds the x_0 prior), K the gains and e the one-step
// prediction errors.
struct FilterResult {
    std::vector<double> mu; // mu_0..mu_n
    std::vector<double> C;  // C_0..C_n
    std::vector<double> K;  // K_1..K_n
    std::vector<double> e;  // e_1..e_n
};

// Recursions for the local-level model with observation variance eta_v:
//   K_i = (C_{i-1} + w_i) / (C_{i-1} + w_i + eta_v)
//   e_i = y_i - mu_{i-1},  mu_i = mu_{i-1} + K_i e_i,  C_i = K_i eta_v
inline FilterResult forward_filter(std::span<const double> y, const StateNoise& noise,
                                   double eta_v, double mu0, double C0) {
    if (y.size() != noise.w.size())
        throw std::invalid_argument("forward_filter: observation/noise size mismatch");
    if (!(eta_v > 0.0))
        throw std::domain_error("forward_filter: eta_v must be positive");
    if (!(C0 >= 0.0))
        throw std::domain_error("forward_filter: prior variance must be nonnegative");
    const std::size_t n = y.size();
    FilterResult f;
    f.mu.resize(n + 1);
    f.C.resize(n + 1);
    f.K.resize(n);
    f.e.resize(n);
    f.mu[0] = mu0;
    f.C[0] = C0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double predicted = f.C[i - 1] + noise.w[i - 1];
        const double gain = predicted / (predicted + eta_v);
        f.K[i - 1] = gain;
        f.e[i - 1] = y[i - 1] - f.mu[i - 1];
        f.mu[i] = f.mu[i - 1] + gain * f.e[i - 1];
        f.C[i] = gain * eta_v;
    }
    return f;
}

// Backward simulation pass: draws x_n ~ N(mu_n, C_n), then for i = n-1..0
//   h_i = mu_i + C_i/(C_i + w_{i+1}) (x_{i+1} - mu_i)
//   H_i = C_i w_{i+1} / (C_i + w_{i+1})
// consuming exactly one standard normal per state in descending index order.
inline std::vector<double> backward_sample(const FilterResult& filter, const StateNoise& noise,
                                           Rng& rng) {
    const std::size_t n = noise.w.size();
    if (filter.mu.size() != n + 1 || filter.C.size() != n + 1)
        throw std::invalid_argument("backward_sample: filter/noise size mismatch");
    std::vector<double> x(n + 1);
    x[n] = filter.mu[n] + std::sqrt(filter.C[n]) * rng.normal();
    for (std::size_t i = n; i-- > 0;) {
        const double c = filter.C[i];
        const double denom = c + noise.w[i];
        double h = filter.mu[i];
        double H = 0.0;
        if (denom > 0.0) {
            const double ratio = c / denom;
            h += ratio * (x[i + 1] - filter.mu[i]);
            H = ratio * noise.w[i];
        }
        x[i] = h + std::sqrt(H) * rng.normal();
    }
    return x;
}

} // namespace stepvol
