// Command-line front end: simulate synthetic data, ingest tick files, run
// the Gibbs sampler, and summarize traces.

#include <cstdint>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stepvol/stepvol.hpp"

namespace {

std::string chain_trace_path(const std::string& base, std::size_t chain,
                             std::size_t num_chains) {
    if (num_chains == 1) return base;
    const std::size_t dot = base.rfind('.');
    if (dot == std::string::npos || base.find('/', dot) != std::string::npos)
        return base + ".chain" + std::to_string(chain);
    return base.substr(0, dot) + ".chain" + std::to_string(chain) + base.substr(dot);
}

struct SimulateArgs {
    std::string model;
    std::size_t n = 4000;
    double eta_v = -1.0; // model-dependent default when negative
    std::uint64_t seed = 1;
    std::string out;
    std::string out_truth;
};

int run_simulate(const SimulateArgs& args) {
    stepvol::Rng rng(args.seed);
    std::vector<double> times, truth;
    std::optional<stepvol::Observations> obs;

    if (args.model == "heston") {
        const double eta = args.eta_v < 0.0 ? 1e-6 : args.eta_v;
        stepvol::HestonParams params;
        const stepvol::HestonPath path = stepvol::simulate_heston(params, args.n, rng);
        obs = stepvol::add_noise(path.times, path.log_price, eta, rng);
        times = path.times;
        truth = path.spot_vol;
    } else {
        const double eta = args.eta_v < 0.0 ? 0.01 : args.eta_v;
        stepvol::SdeSpec spec;
        if (args.model == "constant") {
            spec.drift = [](double, double) { return 0.0; };
            spec.vol = [](double) { return 1.0; };
        } else if (args.model == "fan-gijbels") {
            spec.drift = [](double, double x) { return -x; };
            spec.vol = [](double t) { return stepvol::fan_gijbels(t); };
        } else {
            throw std::invalid_argument("unknown model '" + args.model + "'");
        }
        spec.x0 = 0.0;
        const stepvol::GridPlan plan = stepvol::make_grid(args.n, rng);
        const std::vector<double> fine_path = stepvol::euler_path(spec, plan.fine_times, rng);
        times = stepvol::observation_times(plan);
        const std::vector<double> x = stepvol::path_at_observations(plan, fine_path);
        obs = stepvol::add_noise(times, x, eta, rng);
        truth.reserve(times.size());
        for (double t : times) truth.push_back(spec.vol(t));
    }

    stepvol::write_observations_file(args.out, *obs);
    std::cout << "wrote " << obs->n() << " observations to " << args.out << "\n";
    if (!args.out_truth.empty()) {
        stepvol::write_truth_file(args.out_truth, times, truth);
        std::cout << "wrote ground truth to " << args.out_truth << "\n";
    }
    return 0;
}

struct IngestArgs {
    std::string input;
    std::string out;
    std::size_t every = 1;
    stepvol::TickFormat format;
    std::string delim = ",";
    int ask_col = 2; // negative disables the ask column
    bool calendar_day = false;
};

int run_ingest(const IngestArgs& args) {
    std::ifstream in(args.input);
    if (!in) throw std::runtime_error("cannot open '" + args.input + "' for reading");
    stepvol::TickFormat format = args.format;
    if (args.delim.size() != 1) throw std::invalid_argument("--delim must be one character");
    format.delimiter = args.delim[0];
    if (args.ask_col < 0)
        format.ask_col.reset();
    else
        format.ask_col = static_cast<std::size_t>(args.ask_col);
    stepvol::TickSeries series = stepvol::parse_ticks(in, format);
    series = stepvol::subsample_every(series, args.every);
    const stepvol::Observations obs = stepvol::to_observations(
        series, args.calendar_day ? stepvol::TimeAnchor::CalendarDay
                                  : stepvol::TimeAnchor::DayStart);
    stepvol::write_observations_file(args.out, obs);
    std::cout << "wrote " << obs.n() << " observations to " << args.out << "\n";
    return 0;
}

struct InferArgs {
    std::string input;
    std::string out;
    std::string out_trace;
    std::size_t bins = 40;
    std::size_t iters = 30000;
    double burnin_frac = 1.0 / 3.0;
    std::uint64_t sampler_seed = 1;
    double proposal_step = 0.4;
    stepvol::Hyper hyper;
    std::size_t chains = 1;
};

int run_infer(const InferArgs& args) {
    const stepvol::Observations obs = stepvol::read_observations_file(args.input);
    const stepvol::BinPartition partition = stepvol::make_partition(obs.n(), args.bins);

    std::vector<std::future<stepvol::Trace>> futures;
    futures.reserve(args.chains);
    for (std::size_t c = 0; c < args.chains; ++c) {
        stepvol::SamplerConfig config;
        config.iterations = args.iters;
        config.burnin_fraction = args.burnin_frac;
        config.proposal_step = args.proposal_step;
        config.seed = args.sampler_seed + c;
        config.validate();
        futures.push_back(std::async(std::launch::async, [&, config] {
            return stepvol::run_sampler(obs, partition, args.hyper, config);
        }));
    }
    std::vector<stepvol::Trace> traces;
    traces.reserve(args.chains);
    for (auto& f : futures) traces.push_back(f.get());

    const std::size_t drop = stepvol::burnin_count(args.iters, args.burnin_frac);
    for (std::size_t c = 0; c < args.chains; ++c) {
        const stepvol::Trace& trace = traces[c];
        std::cout << "chain " << c << ": alpha acceptance rate "
                  << trace.acceptance_rate() << " (post burn-in "
                  << trace.acceptance_rate_from(drop) << ")\n";
        if (!args.out_trace.empty())
            stepvol::write_trace_file(chain_trace_path(args.out_trace, c, args.chains),
                                      trace);
    }

    // summary over retained draws pooled across chains
    const std::size_t N = partition.num_bins;
    const std::size_t kept = args.iters - drop;
    std::vector<double> pooled;
    pooled.reserve(args.chains * kept * N);
    for (const stepvol::Trace& trace : traces)
        pooled.insert(pooled.end(), trace.theta.begin() + drop * N, trace.theta.end());
    const stepvol::PosteriorSummary summary =
        stepvol::summarize_retained(pooled, args.chains * kept, N, traces.front().edges);
    stepvol::write_summary_file(args.out, summary);
    std::cout << "wrote " << N << "-bin summary to " << args.out << "\n";
    return 0;
}

struct SummarizeArgs {
    std::string input;
    std::string trace;
    std::string out;
    std::size_t bins = 0; // 0: take the bin count from the trace
    double burnin_frac = 1.0 / 3.0;
};

int run_summarize(const SummarizeArgs& args) {
    const stepvol::Observations obs = stepvol::read_observations_file(args.input);
    const stepvol::TraceFile trace = stepvol::read_trace_file(args.trace);
    const std::size_t target = args.bins == 0 ? trace.num_bins : args.bins;
    const stepvol::BinPartition partition = stepvol::make_partition(obs.n(), target);
    if (partition.num_bins != trace.num_bins)
        throw std::runtime_error("trace has " + std::to_string(trace.num_bins) +
                                 " bins but the observations partition into " +
                                 std::to_string(partition.num_bins));
    const std::vector<double> edges = stepvol::bin_edges(partition, obs.times);
    const stepvol::PosteriorSummary summary = stepvol::summarize_theta(
        trace.theta, trace.iterations, trace.num_bins, edges, args.burnin_frac);
    stepvol::write_summary_file(args.out, summary);
    std::cout << "wrote " << summary.num_bins << "-bin summary to " << args.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"piecewise-constant volatility learning from noisy observations"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "generate synthetic observations");
    simulate->add_option("--model", sim.model, "constant | fan-gijbels | heston")
        ->required()
        ->check(CLI::IsMember({"constant", "fan-gijbels", "heston"}));
    simulate->add_option("--n", sim.n, "number of observations")->check(CLI::Range(2u, 1000000u));
    simulate->add_option("--eta-v", sim.eta_v,
                         "noise variance (default 0.01; 1e-6 for heston)");
    simulate->add_option("--seed", sim.seed, "data seed");
    simulate->add_option("--out", sim.out, "observations csv")->required();
    simulate->add_option("--out-truth", sim.out_truth, "ground-truth volatility csv");

    IngestArgs ing;
    CLI::App* ingest = app.add_subcommand("ingest", "convert a tick csv to observations");
    ingest->add_option("--input", ing.input, "tick csv")->required();
    ingest->add_option("--out", ing.out, "observations csv")->required();
    ingest->add_option("--every", ing.every, "keep every k-th tick")->check(CLI::PositiveNumber);
    ingest->add_option("--ts-col", ing.format.timestamp_col, "timestamp column index");
    ingest->add_option("--bid-col", ing.format.bid_col, "bid column index");
    ingest->add_option("--ask-col", ing.ask_col, "ask column index (negative: none)");
    ingest->add_option("--ts-format", ing.format.timestamp_format,
                       "strptime pattern, default '%Y%m%d %H:%M:%S'");
    ingest->add_option("--delim", ing.delim, "field delimiter");
    ingest->add_flag("--skip-header", ing.format.skip_header, "skip the first line");
    ingest->add_flag("--calendar-day", ing.calendar_day,
                     "rescale the full calendar day to [0,1] instead of ending at the last tick");

    InferArgs inf;
    std::string infer_model = "default";
    CLI::App* infer = app.add_subcommand("infer", "run the Gibbs sampler");
    infer->add_option("--input", inf.input, "observations csv")->required();
    infer->add_option("--out", inf.out, "posterior summary csv")->required();
    infer->add_option("--out-trace", inf.out_trace, "trace csv (one file per chain)");
    infer->add_option("--bins", inf.bins, "target bin count");
    infer->add_option("--iters", inf.iters, "Gibbs iterations");
    infer->add_option("--burnin-frac", inf.burnin_frac, "burn-in fraction");
    infer->add_option("--sampler-seed", inf.sampler_seed, "sampler seed");
    infer->add_option("--proposal-step", inf.proposal_step,
                      "initial sd of the log-alpha proposal");
    infer->add_option("--model", infer_model,
                      "prior preset: default | heston (eta_v ~ IG(0.001, 0.001))")
        ->check(CLI::IsMember({"default", "heston"}));
    auto* opt_alpha_v = infer->add_option("--alpha-v", inf.hyper.alpha_v, "eta_v prior shape");
    auto* opt_beta_v = infer->add_option("--beta-v", inf.hyper.beta_v, "eta_v prior scale");
    infer->add_option("--a", inf.hyper.a, "mean of log alpha");
    infer->add_option("--b", inf.hyper.b, "variance of log alpha");
    infer->add_option("--mu0", inf.hyper.mu0, "prior mean of x_0");
    infer->add_option("--c0", inf.hyper.c0, "prior variance of x_0");
    infer->add_option("--chains", inf.chains, "independent chains run concurrently")
        ->check(CLI::PositiveNumber);

    SummarizeArgs sum;
    CLI::App* summarize = app.add_subcommand("summarize", "recompute a summary from a trace");
    summarize->add_option("--input", sum.input, "observations csv")->required();
    summarize->add_option("--out-trace", sum.trace, "trace csv to read")->required();
    summarize->add_option("--out", sum.out, "posterior summary csv")->required();
    summarize->add_option("--bins", sum.bins, "target bin count (default: from the trace)");
    summarize->add_option("--burnin-frac", sum.burnin_frac, "burn-in fraction");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(sim);
        if (ingest->parsed()) return run_ingest(ing);
        if (infer->parsed()) {
            if (infer_model == "heston") {
                if (opt_alpha_v->count() == 0) inf.hyper.alpha_v = 0.001;
                if (opt_beta_v->count() == 0) inf.hyper.beta_v = 0.001;
            }
            return run_infer(inf);
        }
        if (summarize->parsed()) return run_summarize(sum);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
