#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "stepvol/model.hpp"
#include "stepvol/rng.hpp"

namespace stepvol {

// Fine simulation grid on [0,1] plus the subsampled observation indices.
// fine_times has 10n+1 points including 0 and 1; obs_indices are n sorted
// indices into fine_times, always ending at the index of time 1 and never
// starting at index 0 (time 0 stays the initial time, not an observation).
struct GridPlan {
    std::vector<double> fine_times;
    std::vector<std::size_t> obs_indices;
};

inline GridPlan make_grid(std::size_t n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("make_grid: need n >= 2");
    const std::size_t fine_count = 10 * n + 1;
    GridPlan plan;
    plan.fine_times.resize(fine_count);
    for (;;) {
        plan.fine_times.front() = 0.0;
        plan.fine_times.back() = 1.0;
        for (std::size_t j = 1; j + 1 < fine_count; ++j) plan.fine_times[j] = rng.uniform();
        std::sort(plan.fine_times.begin() + 1, plan.fine_times.end() - 1);
        if (std::adjacent_find(plan.fine_times.begin(), plan.fine_times.end()) ==
            plan.fine_times.end())
            break; // collisions have probability ~0; resample if one occurs
    }
    // uniform subset of size n-1 from indices 1..10n-1, plus the endpoint
    plan.obs_indices.reserve(n);
    std::size_t needed = n - 1;
    for (std::size_t j = 1; j < fine_count - 1 && needed > 0; ++j) {
        const std::size_t remaining = fine_count - 1 - j;
        if (rng.uniform() * static_cast<double>(remaining) < static_cast<double>(needed)) {
            plan.obs_indices.push_back(j);
            --needed;
        }
    }
    plan.obs_indices.push_back(fine_count - 1);
    return plan;
}

// observation times t_0 = 0, t_1..t_n from the plan
inline std::vector<double> observation_times(const GridPlan& plan) {
    std::vector<double> t;
    t.reserve(plan.obs_indices.size() + 1);
    t.push_back(plan.fine_times.front());
    for (std::size_t idx : plan.obs_indices) t.push_back(plan.fine_times[idx]);
    return t;
}

// fine-grid path restricted to t_0 and the observation times
inline std::vector<double> path_at_observations(const GridPlan& plan,
                                                std::span<const double> fine_path) {
    if (fine_path.size() != plan.fine_times.size())
        throw std::invalid_argument("path_at_observations: path does not match grid");
    std::vector<double> x;
    x.reserve(plan.obs_indices.size() + 1);
    x.push_back(fine_path.front());
    for (std::size_t idx : plan.obs_indices) x.push_back(fine_path[idx]);
    return x;
}

// dX = drift(t, X) dt + vol(t) dW on a given grid
struct SdeSpec {
    std::function<double(double, double)> drift;
    std::function<double(double)> vol;
    double x0 = 0.0;
};

inline std::vector<double> euler_path(const SdeSpec& spec, std::span<const double> fine_times,
                                      Rng& rng) {
    if (fine_times.size() < 2)
        throw std::invalid_argument("euler_path: need at least two grid points");
    std::vector<double> x(fine_times.size());
    x[0] = spec.x0;
    for (std::size_t j = 0; j + 1 < fine_times.size(); ++j) {
        const double t = fine_times[j];
        const double dt = fine_times[j + 1] - t;
        const double s = spec.vol(t);
        if (!(s >= 0.0)) throw std::domain_error("euler_path: volatility must be nonnegative");
        x[j + 1] = x[j] + spec.drift(t, x[j]) * dt + s * std::sqrt(dt) * rng.normal();
    }
    return x;
}

// s(t) = 3/2 + sin(2(4t-2)) + 2 exp(-16 (4t-2)^2)
inline double fan_gijbels(double t) {
    const double u = 4.0 * t - 2.0;
    return 1.5 + std::sin(2.0 * u) + 2.0 * std::exp(-16.0 * u * u);
}

// Heston model: dS = mu S dt + sqrt(Z) S dW, dZ = kappa (theta_lr - Z) dt
// + sigma_cir sqrt(Z) dB, with corr(W, B) = rho.
struct HestonParams {
    double mu = 0.05;
    double kappa = 7.0;
    double theta_lr = 0.04;
    double sigma_cir = 0.6;
    double rho = -0.6;
    double z0 = 0.04;
    double s0 = 1.0;

    void validate() const {
        if (!(kappa > 0.0) || !(theta_lr > 0.0) || !(z0 > 0.0) || !(s0 > 0.0))
            throw std::invalid_argument("heston: kappa, theta_lr, z0, s0 must be positive");
        if (!(sigma_cir >= 0.0))
            throw std::invalid_argument("heston: sigma_cir must be nonnegative");
        if (!(rho >= -1.0) || !(rho <= 1.0))
            throw std::invalid_argument("heston: rho must lie in [-1, 1]");
    }
};

// log-price and spot volatility sqrt(Z) sampled at t_0 and the observation
// times; the three vectors share time stamps.
struct HestonPath {
    std::vector<double> times;
    std::vector<double> log_price;
    std::vector<double> spot_vol;
};

// Joint Euler scheme on (log S, Z) with full truncation: Z enters drifts and
// square roots through max(Z, 0), so the variance fed to the price leg is
// never negative. The W stream drives the price; B = rho W + sqrt(1-rho^2) W'.
inline HestonPath simulate_heston(const HestonParams& params, std::size_t n, Rng& rng) {
    params.validate();
    const GridPlan plan = make_grid(n, rng);
    const std::size_t steps = plan.fine_times.size() - 1;
    const double rho_perp = std::sqrt(1.0 - params.rho * params.rho);

    std::vector<double> log_s(steps + 1), z(steps + 1);
    log_s[0] = std::log(params.s0);
    z[0] = params.z0;
    for (std::size_t j = 0; j < steps; ++j) {
        const double dt = plan.fine_times[j + 1] - plan.fine_times[j];
        const double sq_dt = std::sqrt(dt);
        const double z_plus = std::max(z[j], 0.0);
        assert(z_plus >= 0.0);
        const double vol = std::sqrt(z_plus);
        const double zw = rng.normal();
        const double zp = rng.normal();
        const double zb = params.rho * zw + rho_perp * zp;
        log_s[j + 1] =
            log_s[j] + (params.mu - 0.5 * z_plus) * dt + vol * sq_dt * zw;
        z[j + 1] = z[j] + params.kappa * (params.theta_lr - z_plus) * dt +
                   params.sigma_cir * vol * sq_dt * zb;
    }

    HestonPath path;
    path.times = observation_times(plan);
    path.log_price = path_at_observations(plan, log_s);
    path.spot_vol.reserve(path.times.size());
    path.spot_vol.push_back(std::sqrt(std::max(z[0], 0.0)));
    for (std::size_t idx : plan.obs_indices)
        path.spot_vol.push_back(std::sqrt(std::max(z[idx], 0.0)));
    return path;
}

// y_i = x_{t_i} + v_i with v_i iid N(0, eta_v); the value at t_0 is not
// observed, so path[0] only fixes alignment.
inline Observations add_noise(std::span<const double> times, std::span<const double> path,
                              double eta_v, Rng& rng) {
    if (times.size() != path.size())
        throw std::invalid_argument("add_noise: times/path size mismatch");
    if (!(eta_v >= 0.0)) throw std::domain_error("add_noise: eta_v must be nonnegative");
    const double sd = std::sqrt(eta_v);
    std::vector<double> y(path.size() - 1);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = path[i + 1] + (eta_v > 0.0 ? sd * rng.normal() : 0.0);
    return Observations(std::vector<double>(times.begin(), times.end()), std::move(y));
}

} // namespace stepvol
