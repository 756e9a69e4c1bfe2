#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "stepvol/ffbs.hpp"
#include "stepvol/model.hpp"
#include "stepvol/rng.hpp"

namespace stepvol {

// Fixed hyperparameters. alpha1/beta1 parameterise the theta_1 prior (zeros
// give the vague limit), alpha_v/beta_v the inverse-gamma prior on the
// observation noise variance, (a, b) the mean/variance of log alpha, and
// (mu0, c0) the normal prior on the initial state.
struct Hyper {
    double alpha1 = 0.0;
    double beta1 = 0.0;
    double alpha_v = 0.3;
    double beta_v = 0.3;
    double a = 1.0;
    double b = 0.25;
    double mu0 = 0.0;
    double c0 = 25.0;

    void validate() const {
        if (!(alpha_v > 0.0) || !(beta_v > 0.0))
            throw std::invalid_argument("hyper: alpha_v and beta_v must be positive");
        if (!(b > 0.0)) throw std::invalid_argument("hyper: b must be positive");
        if (!(c0 > 0.0)) throw std::invalid_argument("hyper: c0 must be positive");
        if (alpha1 < 0.0 || beta1 < 0.0)
            throw std::invalid_argument("hyper: alpha1 and beta1 must be nonnegative");
    }
};

struct SamplerConfig {
    std::size_t iterations = 30000;
    double burnin_fraction = 1.0 / 3.0;
    double proposal_step = 0.4; // initial sd of the log-alpha random walk
    std::uint64_t seed = 0;

    void validate() const {
        if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
        if (!(burnin_fraction > 0.0) || !(burnin_fraction < 1.0))
            throw std::invalid_argument("config: burnin_fraction must be in (0,1)");
        if (!(proposal_step >= 0.0))
            throw std::invalid_argument("config: proposal_step must be nonnegative");
    }
};

// One Gibbs state: latent path x_0..x_n, squared levels theta_1..theta_N,
// auxiliaries zeta_2..zeta_N (stored from index 0), noise variance, alpha.
struct ChainState {
    std::vector<double> x;
    std::vector<double> theta;
    std::vector<double> zeta;
    double eta_v = 0.0;
    double alpha = 0.0;
};

// Shape/scale of an inverse-gamma full conditional.
struct IgParams {
    double shape = 0.0;
    double scale = 0.0;
};

inline std::size_t burnin_count(std::size_t iterations, double burnin_fraction) {
    return static_cast<std::size_t>(
        std::ceil(burnin_fraction * static_cast<double>(iterations)));
}

// eta_v | x, y ~ IG(alpha_v + n/2, beta_v + sum (y_i - x_i)^2 / 2)
inline IgParams eta_v_conditional(std::span<const double> x, const Observations& obs,
                                  const Hyper& hyper) {
    const std::size_t n = obs.n();
    if (x.size() != n + 1)
        throw std::invalid_argument("eta_v conditional: path/observation size mismatch");
    double rss = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double r = obs.values[i - 1] - x[i];
        rss += r * r;
    }
    return {hyper.alpha_v + 0.5 * static_cast<double>(n), hyper.beta_v + 0.5 * rss};
}

inline double sample_eta_v(std::span<const double> x, const Observations& obs,
                           const Hyper& hyper, Rng& rng) {
    const IgParams p = eta_v_conditional(x, obs, hyper);
    return rng.inverse_gamma(p.shape, p.scale);
}

// theta full conditionals given zeta and the bin statistics:
//   theta_1 ~ IG(alpha1 + alpha + m_1/2, beta1 + alpha/zeta_2 + Z_1/2)
//   theta_k ~ IG(2 alpha + m_k/2, alpha/zeta_k + alpha/zeta_{k+1} + Z_k/2)
//   theta_N ~ IG(alpha + m_N/2, alpha/zeta_N + Z_N/2)
inline std::vector<IgParams> theta_conditionals(const BinStats& stats,
                                                std::span<const double> zeta, double alpha,
                                                const Hyper& hyper) {
    const std::size_t N = stats.z.size();
    if (N < 2)
        throw std::invalid_argument("theta conditionals: chain structure requires >= 2 bins");
    if (zeta.size() != N - 1)
        throw std::invalid_argument("theta conditionals: zeta size mismatch");
    if (!(alpha > 0.0)) throw std::domain_error("theta conditionals: alpha must be positive");
    std::vector<IgParams> out(N);
    out[0] = {hyper.alpha1 + alpha + 0.5 * static_cast<double>(stats.counts[0]),
              hyper.beta1 + alpha / zeta[0] + 0.5 * stats.z[0]};
    for (std::size_t k = 2; k <= N - 1; ++k) {
        out[k - 1] = {2.0 * alpha + 0.5 * static_cast<double>(stats.counts[k - 1]),
                      alpha / zeta[k - 2] + alpha / zeta[k - 1] + 0.5 * stats.z[k - 1]};
    }
    out[N - 1] = {alpha + 0.5 * static_cast<double>(stats.counts[N - 1]),
                  alpha / zeta[N - 2] + 0.5 * stats.z[N - 1]};
    return out;
}

inline std::vector<double> sample_theta(const BinStats& stats, std::span<const double> zeta,
                                        double alpha, const Hyper& hyper, Rng& rng) {
    const auto params = theta_conditionals(stats, zeta, alpha, hyper);
    std::vector<double> theta(params.size());
    for (std::size_t k = 0; k < params.size(); ++k)
        theta[k] = rng.inverse_gamma(params[k].shape, params[k].scale);
    return theta;
}

// zeta_k | theta ~ IG(2 alpha, alpha/theta_{k-1} + alpha/theta_k), k = 2..N
inline std::vector<IgParams> zeta_conditionals(std::span<const double> theta, double alpha) {
    if (theta.size() < 2)
        throw std::invalid_argument("zeta conditionals: need at least two bins");
    if (!(alpha > 0.0)) throw std::domain_error("zeta conditionals: alpha must be positive");
    std::vector<IgParams> out(theta.size() - 1);
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (!(theta[j] > 0.0) || !(theta[j + 1] > 0.0))
            throw std::domain_error("zeta conditionals: theta must be positive");
        out[j] = {2.0 * alpha, alpha / theta[j] + alpha / theta[j + 1]};
    }
    return out;
}

inline std::vector<double> sample_zeta(std::span<const double> theta, double alpha, Rng& rng) {
    const auto params = zeta_conditionals(theta, alpha);
    std::vector<double> zeta(params.size());
    for (std::size_t j = 0; j < params.size(); ++j)
        zeta[j] = rng.inverse_gamma(params[j].shape, params[j].scale);
    return zeta;
}

// log of the unnormalised alpha full conditional
//   q(alpha) = pi(alpha) (alpha^alpha / Gamma(alpha))^{2(N-1)}
//              exp(-alpha sum_k (1/zeta_k)(1/theta_{k-1} + 1/theta_k))
//              prod_k (theta_{k-1} theta_k zeta_k^2)^{-alpha}
// with pi the lognormal density implied by log alpha ~ N(a, b); evaluated
// entirely in log space so it stays finite over many orders of magnitude.
inline double log_q_alpha(double alpha, std::span<const double> theta,
                          std::span<const double> zeta, const Hyper& hyper) {
    if (!(alpha > 0.0)) throw std::domain_error("log_q_alpha: alpha must be positive");
    const std::size_t N = theta.size();
    if (N < 2 || zeta.size() != N - 1)
        throw std::invalid_argument("log_q_alpha: size mismatch");
    const double log_alpha = std::log(alpha);
    double sum = 0.0;
    for (std::size_t j = 0; j < zeta.size(); ++j) {
        sum += (1.0 / zeta[j]) * (1.0 / theta[j] + 1.0 / theta[j + 1]);
        sum += std::log(theta[j]) + std::log(theta[j + 1]) + 2.0 * std::log(zeta[j]);
    }
    const double dev = log_alpha - hyper.a;
    const double log_prior = -log_alpha - 0.5 * std::log(2.0 * std::numbers::pi * hyper.b) -
                             dev * dev / (2.0 * hyper.b);
    return log_prior +
           2.0 * static_cast<double>(N - 1) * (alpha * log_alpha - std::lgamma(alpha)) -
           alpha * sum;
}

// One Metropolis step for alpha: Gaussian random walk on log alpha with the
// log alpha* - log alpha Jacobian correction in the acceptance ratio.
struct AlphaStep {
    double alpha = 0.0;
    bool accepted = false;
    double proposed = 0.0;
    double log_ratio = 0.0;
};

inline AlphaStep mh_step_alpha(double alpha, std::span<const double> theta,
                               std::span<const double> zeta, double proposal_step,
                               const Hyper& hyper, Rng& rng) {
    if (!(alpha > 0.0)) throw std::domain_error("mh_step_alpha: alpha must be positive");
    const double log_current = std::log(alpha);
    const double log_proposed = log_current + proposal_step * rng.normal();
    const double proposed = std::exp(log_proposed);

    AlphaStep step;
    step.proposed = proposed;
    double log_ratio = -std::numeric_limits<double>::infinity();
    if (proposed > 0.0 && std::isfinite(proposed)) {
        const double lq_prop = log_q_alpha(proposed, theta, zeta, hyper);
        const double lq_cur = log_q_alpha(alpha, theta, zeta, hyper);
        log_ratio = lq_prop - lq_cur + log_proposed - log_current;
        if (!std::isfinite(lq_prop)) log_ratio = -std::numeric_limits<double>::infinity();
    }
    step.log_ratio = log_ratio;
    const double u = rng.uniform();
    if (std::log(u) < log_ratio) {
        step.alpha = proposed;
        step.accepted = true;
    } else {
        step.alpha = alpha;
        step.accepted = false;
    }
    return step;
}

// Stored samples for every iteration, burn-in included.
struct Trace {
    std::size_t iterations = 0;
    std::size_t num_bins = 0;
    std::vector<double> theta;  // iterations x num_bins, row-major
    std::vector<double> zeta;   // iterations x (num_bins - 1), row-major
    std::vector<double> alpha;  // per iteration
    std::vector<double> eta_v;  // per iteration
    std::vector<std::uint8_t> alpha_accepted;
    std::vector<double> edges;  // bin edges e_0..e_N
    double final_proposal_step = 0.0;

    std::span<const double> theta_row(std::size_t it) const {
        return {theta.data() + it * num_bins, num_bins};
    }
    double acceptance_rate() const { return acceptance_rate_from(0); }
    double acceptance_rate_from(std::size_t first) const {
        if (first >= iterations) return 0.0;
        std::size_t acc = 0;
        for (std::size_t i = first; i < iterations; ++i) acc += alpha_accepted[i];
        return static_cast<double>(acc) / static_cast<double>(iterations - first);
    }
};

// Data-driven starting point: theta from a pilot using observed increments in
// place of the latent path, zeta chained from theta, alpha at the hyperprior
// median, eta_v at its prior mode.
inline ChainState initial_chain_state(const Observations& obs, const BinPartition& partition,
                                      const Hyper& hyper) {
    const std::size_t n = obs.n();
    std::vector<double> pseudo_path(n + 1);
    pseudo_path[0] = obs.values.front();
    for (std::size_t i = 1; i <= n; ++i) pseudo_path[i] = obs.values[i - 1];
    const BinStats pilot = bin_stats(pseudo_path, obs, partition);

    ChainState state;
    state.theta.resize(partition.num_bins);
    for (std::size_t k = 0; k < partition.num_bins; ++k)
        state.theta[k] =
            std::max(pilot.z[k] / static_cast<double>(pilot.counts[k]), 1e-8);
    state.zeta.assign(state.theta.begin(), state.theta.end() - 1);
    state.alpha = std::exp(hyper.a);
    state.eta_v = hyper.beta_v / (hyper.alpha_v + 1.0);
    state.x.assign(n + 1, hyper.mu0);
    return state;
}

// Full Gibbs sweep order: x via FFBS, then theta, zeta, eta_v and the alpha
// Metropolis step. The proposal step adapts towards 37% acceptance during
// burn-in only and is frozen afterwards.
inline Trace run_sampler(const Observations& obs, const BinPartition& partition,
                         const Hyper& hyper, const SamplerConfig& config) {
    hyper.validate();
    config.validate();
    if (partition.n != obs.n())
        throw std::invalid_argument("run_sampler: partition does not match observations");
    if (partition.num_bins < 2)
        throw std::invalid_argument("run_sampler: need at least two bins");

    const std::size_t M = config.iterations;
    const std::size_t N = partition.num_bins;
    const std::size_t burnin = burnin_count(M, config.burnin_fraction);
    const std::vector<double> deltas = obs.deltas();

    Rng rng(config.seed);
    ChainState state = initial_chain_state(obs, partition, hyper);

    Trace trace;
    trace.iterations = M;
    trace.num_bins = N;
    trace.theta.resize(M * N);
    trace.zeta.resize(M * (N - 1));
    trace.alpha.resize(M);
    trace.eta_v.resize(M);
    trace.alpha_accepted.resize(M);
    trace.edges = bin_edges(partition, obs.times);

    constexpr double target_acceptance = 0.37;
    double step = config.proposal_step;

    for (std::size_t it = 0; it < M; ++it) {
        const StateNoise w = state_noise(state.theta, partition, deltas);
        const FilterResult filter =
            forward_filter(obs.values, w, state.eta_v, hyper.mu0, hyper.c0);
        state.x = backward_sample(filter, w, rng);

        const BinStats stats = bin_stats(state.x, deltas, partition);
        state.theta = sample_theta(stats, state.zeta, state.alpha, hyper, rng);
        state.zeta = sample_zeta(state.theta, state.alpha, rng);
        state.eta_v = sample_eta_v(state.x, obs, hyper, rng);

        const AlphaStep alpha_step =
            mh_step_alpha(state.alpha, state.theta, state.zeta, step, hyper, rng);
        state.alpha = alpha_step.alpha;

        if (it < burnin && step > 0.0) {
            const double gain = 0.5 / std::pow(static_cast<double>(it + 1), 0.6);
            const double acc = alpha_step.accepted ? 1.0 : 0.0;
            step *= std::exp(gain * (acc - target_acceptance));
            step = std::clamp(step, 1e-3, 1e3);
        }

        std::copy(state.theta.begin(), state.theta.end(), trace.theta.begin() + it * N);
        std::copy(state.zeta.begin(), state.zeta.end(), trace.zeta.begin() + it * (N - 1));
        trace.alpha[it] = state.alpha;
        trace.eta_v[it] = state.eta_v;
        trace.alpha_accepted[it] = alpha_step.accepted ? 1 : 0;
    }
    trace.final_proposal_step = step;
    return trace;
}

// Linear-interpolation empirical quantile on a sorted sample.
inline double empirical_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(p >= 0.0) || !(p <= 1.0)) throw std::invalid_argument("quantile: p outside [0,1]");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Per-bin posterior mean and central 95% interval of xi_k = sqrt(theta_k).
struct PosteriorSummary {
    std::size_t num_bins = 0;
    std::vector<double> t_lo, t_hi;
    std::vector<double> mean;
    std::vector<double> q025, q975;
};

// Summary over already-retained draws (rows x num_bins, burn-in dropped by
// the caller).
inline PosteriorSummary summarize_retained(std::span<const double> theta, std::size_t rows,
                                           std::size_t num_bins,
                                           std::span<const double> edges) {
    if (theta.size() != rows * num_bins)
        throw std::invalid_argument("summarize: theta storage size mismatch");
    if (edges.size() != num_bins + 1)
        throw std::invalid_argument("summarize: edges size mismatch");
    if (rows < 100)
        throw std::invalid_argument("summarize: fewer than 100 retained samples");

    PosteriorSummary summary;
    summary.num_bins = num_bins;
    summary.t_lo.resize(num_bins);
    summary.t_hi.resize(num_bins);
    summary.mean.resize(num_bins);
    summary.q025.resize(num_bins);
    summary.q975.resize(num_bins);

    std::vector<double> xi(rows);
    for (std::size_t k = 0; k < num_bins; ++k) {
        double acc = 0.0;
        for (std::size_t it = 0; it < rows; ++it) {
            xi[it] = std::sqrt(theta[it * num_bins + k]);
            acc += xi[it];
        }
        std::sort(xi.begin(), xi.end());
        summary.t_lo[k] = edges[k];
        summary.t_hi[k] = edges[k + 1];
        summary.mean[k] = acc / static_cast<double>(rows);
        summary.q025[k] = empirical_quantile(xi, 0.025);
        summary.q975[k] = empirical_quantile(xi, 0.975);
        if (!(summary.q025[k] <= summary.q975[k]) || !(summary.q025[k] > 0.0))
            throw std::runtime_error("summarize: degenerate credible interval");
    }
    return summary;
}

inline PosteriorSummary summarize_theta(std::span<const double> theta, std::size_t iterations,
                                        std::size_t num_bins, std::span<const double> edges,
                                        double burnin_fraction) {
    if (theta.size() != iterations * num_bins)
        throw std::invalid_argument("summarize: theta storage size mismatch");
    if (!(burnin_fraction > 0.0) || !(burnin_fraction < 1.0))
        throw std::invalid_argument("summarize: burnin_fraction must be in (0,1)");
    const std::size_t drop = burnin_count(iterations, burnin_fraction);
    if (iterations < drop || iterations - drop < 100)
        throw std::invalid_argument("summarize: fewer than 100 retained samples");
    const std::size_t kept = iterations - drop;
    return summarize_retained(theta.subspan(drop * num_bins, kept * num_bins), kept, num_bins,
                              edges);
}

inline PosteriorSummary summarize(const Trace& trace, double burnin_fraction) {
    return summarize_theta(trace.theta, trace.iterations, trace.num_bins, trace.edges,
                           burnin_fraction);
}

} // namespace stepvol
