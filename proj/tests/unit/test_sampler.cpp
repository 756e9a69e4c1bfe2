#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "stepvol/gibbs.hpp"
#include "stepvol/simulate.hpp"
#include "support/quadrature.hpp"

using namespace stepvol;

namespace {

Observations simulated_obs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    SdeSpec spec;
    spec.drift = [](double, double) { return 0.0; };
    spec.vol = [](double) { return 1.0; };
    const GridPlan plan = make_grid(n, rng);
    const auto path = euler_path(spec, plan.fine_times, rng);
    const auto times = observation_times(plan);
    return add_noise(times, path_at_observations(plan, path), 0.01, rng);
}

} // namespace

TEST_CASE("sampler configuration is validated") {
    SamplerConfig config;
    config.iterations = 0;
    REQUIRE_THROWS_AS(config.validate(), std::invalid_argument);
    config.iterations = 10;
    config.burnin_fraction = 1.0;
    REQUIRE_THROWS_AS(config.validate(), std::invalid_argument);
    config.burnin_fraction = 0.5;
    REQUIRE_NOTHROW(config.validate());

    Hyper hyper;
    hyper.b = 0.0;
    REQUIRE_THROWS_AS(hyper.validate(), std::invalid_argument);
}

TEST_CASE("burn-in drops the first third of 30000 iterations") {
    REQUIRE(burnin_count(30000, 1.0 / 3.0) == 10000);
    REQUIRE(burnin_count(300, 0.25) == 75);
}

TEST_CASE("initial state is positive and data-driven") {
    const Observations obs = simulated_obs(200, 77);
    const BinPartition p = make_partition(obs.n(), 10);
    Hyper hyper;
    const ChainState state = initial_chain_state(obs, p, hyper);
    REQUIRE(state.theta.size() == p.num_bins);
    REQUIRE(state.zeta.size() == p.num_bins - 1);
    REQUIRE(state.x.size() == obs.n() + 1);
    for (double th : state.theta) REQUIRE(th > 0.0);
    for (double z : state.zeta) REQUIRE(z > 0.0);
    REQUIRE(state.alpha == Catch::Approx(std::exp(hyper.a)));
    REQUIRE(state.eta_v == Catch::Approx(hyper.beta_v / (hyper.alpha_v + 1.0)));
}

TEST_CASE("run_sampler is deterministic and keeps every parameter positive") {
    const Observations obs = simulated_obs(300, 5);
    const BinPartition p = make_partition(obs.n(), 6);
    Hyper hyper;
    SamplerConfig config;
    config.iterations = 400;
    config.burnin_fraction = 0.25;
    config.seed = 42;

    const Trace t1 = run_sampler(obs, p, hyper, config);
    const Trace t2 = run_sampler(obs, p, hyper, config);
    REQUIRE(t1.theta == t2.theta);
    REQUIRE(t1.zeta == t2.zeta);
    REQUIRE(t1.alpha == t2.alpha);
    REQUIRE(t1.eta_v == t2.eta_v);
    REQUIRE(t1.alpha_accepted == t2.alpha_accepted);

    REQUIRE(t1.iterations == 400);
    REQUIRE(t1.num_bins == p.num_bins);
    REQUIRE(t1.alpha.size() == 400);
    REQUIRE(t1.theta.size() == 400 * p.num_bins);
    for (double v : t1.theta) REQUIRE(v > 0.0);
    for (double v : t1.zeta) REQUIRE(v > 0.0);
    for (double v : t1.alpha) REQUIRE(v > 0.0);
    for (double v : t1.eta_v) REQUIRE(v > 0.0);

    SamplerConfig other = config;
    other.seed = 43;
    const Trace t3 = run_sampler(obs, p, hyper, other);
    REQUIRE(t3.theta != t1.theta);
}

TEST_CASE("summarize collapses a constant trace to a point band") {
    Trace trace;
    trace.iterations = 200;
    trace.num_bins = 3;
    trace.theta.assign(200 * 3, 4.0);
    trace.zeta.assign(200 * 2, 1.0);
    trace.alpha.assign(200, 1.0);
    trace.eta_v.assign(200, 1.0);
    trace.alpha_accepted.assign(200, 1);
    trace.edges = {0.0, 0.3, 0.6, 1.0};

    const PosteriorSummary s = summarize(trace, 0.25);
    for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE(s.mean[k] == Catch::Approx(2.0));
        REQUIRE(s.q025[k] == Catch::Approx(2.0));
        REQUIRE(s.q975[k] == Catch::Approx(2.0));
        REQUIRE(s.t_lo[k] == trace.edges[k]);
        REQUIRE(s.t_hi[k] == trace.edges[k + 1]);
    }

    REQUIRE_THROWS_AS(summarize(trace, 0.9), std::invalid_argument); // < 100 retained
}

TEST_CASE("empirical quantiles agree with quadrature quantiles for IG(3,2)") {
    Rng rng(99);
    std::vector<double> draws(100000);
    for (double& d : draws) d = rng.inverse_gamma(3.0, 2.0);
    std::sort(draws.begin(), draws.end());
    const auto cdf = testsupport::inverse_gamma_cdf(3.0, 2.0);
    for (double p : {0.025, 0.5, 0.975}) {
        const double emp = empirical_quantile(draws, p);
        const double ref = cdf.quantile(p);
        REQUIRE(std::abs(emp - ref) / ref < 0.01);
    }
}

TEST_CASE("acceptance rates are reported over the requested window") {
    Trace trace;
    trace.iterations = 10;
    trace.alpha_accepted = {1, 1, 1, 1, 0, 0, 1, 0, 1, 0};
    REQUIRE(trace.acceptance_rate() == Catch::Approx(0.6));
    REQUIRE(trace.acceptance_rate_from(5) == Catch::Approx(0.4));
}
