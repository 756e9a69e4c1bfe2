#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "stepvol/csv.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(STEPVOL_CLI_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / "stepvol-cli-test";
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("cli rejects invalid configurations with nonzero exit") {
    TempDir tmp;
    REQUIRE(run("infer --input " + tmp.file("missing.csv") + " --out " + tmp.file("s.csv")) != 0);
    REQUIRE(run("simulate --model nope --out " + tmp.file("o.csv")) != 0);
    REQUIRE(run("") != 0);
}

TEST_CASE("cli simulate/infer/summarize pipeline produces consistent files") {
    TempDir tmp;
    const std::string obs_path = tmp.file("obs.csv");
    const std::string sum_path = tmp.file("summary.csv");
    const std::string trace_path = tmp.file("trace.csv");
    const std::string sum2_path = tmp.file("summary2.csv");

    REQUIRE(run("simulate --model constant --n 300 --eta-v 0.01 --seed 3 --out " + obs_path +
                " --out-truth " + tmp.file("truth.csv")) == 0);
    const stepvol::Observations obs = stepvol::read_observations_file(obs_path);
    REQUIRE(obs.n() == 300);
    REQUIRE(obs.horizon() == 1.0);

    // zero iterations must be rejected at configuration time
    REQUIRE(run("infer --input " + obs_path + " --out " + sum_path + " --iters 0") != 0);

    REQUIRE(run("infer --input " + obs_path + " --out " + sum_path + " --out-trace " +
                trace_path + " --bins 10 --iters 600 --burnin-frac 0.25 --sampler-seed 7") ==
            0);
    const stepvol::PosteriorSummary summary = stepvol::read_summary_file(sum_path);
    REQUIRE(summary.num_bins == 10);
    for (std::size_t k = 0; k < summary.num_bins; ++k) {
        REQUIRE(summary.q025[k] > 0.0);
        REQUIRE(summary.q025[k] <= summary.q975[k]);
    }

    const stepvol::TraceFile trace = stepvol::read_trace_file(trace_path);
    REQUIRE(trace.iterations == 600);
    REQUIRE(trace.num_bins == 10);

    // summarize recomputes the same summary from the stored trace
    REQUIRE(run("summarize --input " + obs_path + " --out-trace " + trace_path + " --out " +
                sum2_path + " --burnin-frac 0.25") == 0);
    std::ifstream a(sum_path), b(sum2_path);
    const std::string text_a((std::istreambuf_iterator<char>(a)),
                             std::istreambuf_iterator<char>());
    const std::string text_b((std::istreambuf_iterator<char>(b)),
                             std::istreambuf_iterator<char>());
    REQUIRE(text_a == text_b);
}

TEST_CASE("cli runs independent chains and writes one trace per chain") {
    TempDir tmp;
    const std::string obs_path = tmp.file("obs.csv");
    REQUIRE(run("simulate --model constant --n 200 --eta-v 0.01 --seed 5 --out " + obs_path) ==
            0);
    REQUIRE(run("infer --input " + obs_path + " --out " + tmp.file("sum.csv") +
                " --out-trace " + tmp.file("trace.csv") +
                " --bins 5 --iters 400 --burnin-frac 0.25 --sampler-seed 11 --chains 2") == 0);
    REQUIRE(fs::exists(tmp.file("trace.chain0.csv")));
    REQUIRE(fs::exists(tmp.file("trace.chain1.csv")));

    // chain 0 must match a single-chain run with the same seed
    REQUIRE(run("infer --input " + obs_path + " --out " + tmp.file("sum1.csv") +
                " --out-trace " + tmp.file("trace1.csv") +
                " --bins 5 --iters 400 --burnin-frac 0.25 --sampler-seed 11") == 0);
    std::ifstream a(tmp.file("trace.chain0.csv")), b(tmp.file("trace1.csv"));
    const std::string text_a((std::istreambuf_iterator<char>(a)),
                             std::istreambuf_iterator<char>());
    const std::string text_b((std::istreambuf_iterator<char>(b)),
                             std::istreambuf_iterator<char>());
    REQUIRE(text_a == text_b);

    const stepvol::TraceFile c0 = stepvol::read_trace_file(tmp.file("trace.chain0.csv"));
    const stepvol::TraceFile c1 = stepvol::read_trace_file(tmp.file("trace.chain1.csv"));
    REQUIRE(c0.theta != c1.theta);
}

TEST_CASE("cli heston preset matches explicit noise-prior flags") {
    TempDir tmp;
    const std::string obs_path = tmp.file("obs.csv");
    REQUIRE(run("simulate --model heston --n 200 --seed 9 --out " + obs_path) == 0);
    const std::string common = "infer --input " + obs_path +
                               " --bins 5 --iters 400 --burnin-frac 0.25 --sampler-seed 3 --out ";
    REQUIRE(run(common + tmp.file("preset.csv") + " --model heston") == 0);
    REQUIRE(run(common + tmp.file("explicit.csv") + " --alpha-v 0.001 --beta-v 0.001") == 0);
    REQUIRE(run(common + tmp.file("default.csv")) == 0);

    const auto read = [](const std::string& p) {
        std::ifstream in(p);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    REQUIRE(read(tmp.file("preset.csv")) == read(tmp.file("explicit.csv")));
    REQUIRE(read(tmp.file("preset.csv")) != read(tmp.file("default.csv")));
}

TEST_CASE("cli ingest converts a tick file with a column mapping") {
    TempDir tmp;
    const std::string ticks = tmp.file("ticks.csv");
    {
        std::ofstream out(ticks);
        out << "EURUSD,20150302 00:00:00.434,1.11973,1.11987\n"
               "EURUSD,20150302 00:00:01.273,1.11975,1.11989\n"
               "EURUSD,20150302 00:00:02.217,1.11974,1.11988\n"
               "EURUSD,20150302 00:00:02.917,1.11971,1.11986\n"
               "EURUSD,20150302 00:00:03.921,1.11969,1.11982\n";
    }
    const std::string obs_path = tmp.file("obs.csv");
    REQUIRE(run("ingest --input " + ticks + " --out " + obs_path +
                " --ts-col 1 --bid-col 2 --ask-col 3 --every 2") == 0);
    const stepvol::Observations obs = stepvol::read_observations_file(obs_path);
    REQUIRE(obs.n() == 3); // rows 0, 2, 4
    REQUIRE(obs.values[0] == Catch::Approx(std::log(1.11973)).epsilon(1e-15));
    REQUIRE(obs.times.back() == 1.0);
}
