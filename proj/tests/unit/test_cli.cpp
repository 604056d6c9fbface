#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "deba/cli.hpp"
#include "deba/profiler.hpp"
#include "deba/sim.hpp"
#include "deba/trace_io.hpp"
#include "helpers.hpp"

using namespace deba;
using testing::data_path;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string line_with(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) return line;
  }
  return {};
}

std::size_t adaptations(const std::string& summary) {
  const auto line = line_with(summary, "adaptations: ");
  return std::stoul(line.substr(13));
}

void write_synthetic(const std::filesystem::path& path, std::uint64_t seed, std::int64_t n) {
  Trace t;
  t.header.producer = "unit";
  t.records = generate_trace(DynamicsSpec::three_phase(n, seed));
  write_trace(t, path);
}

}  // namespace

TEST_CASE("run on the golden trace reproduces the golden log") {
  testing::TempDir dir("cli-run");
  const auto r = invoke({"run", "--trace", data_path("golden_trace.txt").string(), "--config",
                      data_path("mobilenet_v3.cfg").string(), "--out", (dir / "log.txt").string()});
  CHECK(r.code == 0);
  CHECK(read_text_file(dir / "log.txt") == read_text_file(data_path("golden_decisions.log")));
  CHECK(line_with(r.out, "epochs: ") == "epochs: 100");
}

TEST_CASE("run argument and input errors") {
  const auto missing = invoke({"run", "--trace", data_path("golden_trace.txt").string()});
  CHECK(missing.code == cli::kBadArguments);
  CHECK(invoke({}).code == cli::kBadArguments);
  CHECK(invoke({"frobnicate"}).code == cli::kBadArguments);

  testing::TempDir dir("cli-bad");
  write_text_file(dir / "bad.txt", "deba-trace v1\nstats: precomputed\nepoch,loss,grad_norm,grad_variance\n0,1,1,1\n1,one,1,1\n");
  const auto bad = invoke({"run", "--trace", (dir / "bad.txt").string(), "--config", data_path("mobilenet_v3.cfg").string()});
  CHECK(bad.code == cli::kParseError);
  CHECK(bad.err.find("line 5") != std::string::npos);

  write_text_file(dir / "gap.txt", "deba-trace v1\nstats: precomputed\nepoch,loss,grad_norm,grad_variance\n0,1,1,1\n3,1,1,1\n");
  CHECK(invoke({"run", "--trace", (dir / "gap.txt").string(), "--config", data_path("mobilenet_v3.cfg").string()}).code ==
        cli::kNonContiguousEpochs);

  const auto oob = invoke({"run", "--trace", data_path("golden_trace.txt").string(), "--config",
                        data_path("mobilenet_v3.cfg").string(), "--initial-batch", "4"});
  CHECK(oob.code == cli::kInitialBatchOutOfBounds);
  CHECK(invoke({"run", "--trace", "/nonexistent", "--config", data_path("mobilenet_v3.cfg").string()}).code ==
        cli::kIoError);
}

TEST_CASE("run writes schedule and series files and estimates speedup") {
  testing::TempDir dir("cli-model");
  write_text_file(dir / "table.csv", "batch,seconds\n16,40\n64,10\n256,4\n2048,2\n");
  const auto r = invoke({"run", "--trace", data_path("golden_trace.txt").string(), "--config",
                      data_path("mobilenet_v3.cfg").string(), "--schedule-out", (dir / "s.csv").string(),
                      "--series-out", (dir / "series.csv").string(), "--throughput-model",
                      "table:" + (dir / "table.csv").string()});
  CHECK(r.code == 0);
  CHECK(line_with(r.out, "speedup: ").size() > 9);
  const auto sched = read_text_file(dir / "s.csv");
  CHECK(std::count(sched.begin(), sched.end(), '\n') == 101);
  CHECK(invoke({"run", "--trace", data_path("golden_trace.txt").string(), "--config",
             data_path("mobilenet_v3.cfg").string(), "--throughput-model", "quantum"})
            .code == cli::kBadArguments);
}

TEST_CASE("profile reports per-trace scores and the aggregate") {
  testing::TempDir dir("cli-profile");
  std::vector<std::string> args = {"profile", "--jobs", "2"};
  std::vector<StabilityProfile> expected;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto path = dir / ("t" + std::to_string(seed) + ".txt");
    write_synthetic(path, seed, 60);
    args.push_back("--trace");
    args.push_back(path.string());
    expected.push_back(stability_score(profile_frames(read_trace(path).records, SchedulerConfig{})));
  }
  const auto r = invoke(args);
  REQUIRE(r.code == 0);
  const auto agg = aggregate_seeds(expected);
  const auto line = line_with(r.out, "aggregate: ");
  CHECK(line.find("mu_S=" + format_real(agg.mu_s)) != std::string::npos);
  CHECK(line.find("sigma_S=" + format_real(agg.sigma_s)) != std::string::npos);
  CHECK(line.find(std::string("class=") + std::string(taxonomy_name(agg.taxonomy))) != std::string::npos);

  const auto single = invoke({"profile", "--trace", args[4]});
  CHECK(line_with(single.out, "aggregate: ").find("sigma_S=0 ") != std::string::npos);
  CHECK(invoke({"profile"}).code == cli::kBadArguments);
}

TEST_CASE("calibrate recovers the 75th percentile of the variation") {
  testing::TempDir dir("cli-cal");
  // Norm moves by a uniform relative amount each epoch, down when above 1
  // and up otherwise, so the variation itself is uniform on [0, 1).
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Trace t;
  double norm = 1.0;
  std::vector<double> gnv;
  for (std::int64_t e = 0; e < 2000; ++e) {
    if (e > 0) {
      const double prev = norm;
      const double step = u(rng);
      norm = prev > 1.0 ? prev * (1.0 - step) : prev * (1.0 + step);
      gnv.push_back(oracle::relative_variation(norm, prev, 1e-8));
    }
    t.records.push_back(testing::rec(e, 1.0, norm, 1e-4 * (1.0 + 0.1 * u(rng))));
  }
  write_trace(t, dir / "u.txt");
  const auto r = invoke({"calibrate", "--trace", (dir / "u.txt").string(), "--out", (dir / "c.cfg").string()});
  REQUIRE(r.code == 0);
  const auto c = read_config(dir / "c.cfg");
  CHECK(c.theta_stab == doctest::Approx(oracle::quantile(gnv, 0.75)).epsilon(1e-9));
  CHECK(std::abs(c.theta_stab - 0.75) < 0.05);

  const auto run = invoke({"run", "--trace", (dir / "u.txt").string(), "--config", (dir / "c.cfg").string()});
  CHECK(run.code == 0);
  CHECK(read_config(dir / "c.cfg") == c);
}

TEST_CASE("calibrate rejects short traces") {
  testing::TempDir dir("cli-short");
  write_synthetic(dir / "s.txt", 5, 3);
  const auto r = invoke({"calibrate", "--trace", (dir / "s.txt").string(), "--out", (dir / "c.cfg").string()});
  CHECK(r.code == cli::kInsufficientEpochs);
  CHECK_FALSE(std::filesystem::exists(dir / "c.cfg"));
}

TEST_CASE("simulate prints the three-phase summary") {
  const auto r = invoke({"simulate", "--seed", "42"});
  REQUIRE(r.code == 0);
  CHECK(line_with(r.out, "seed: ") == "seed: 42");
  CHECK(line_with(r.out, "epochs: ") == "epochs: 100");
  CHECK_FALSE(line_with(r.out, "phase explore (epochs 0-29)").empty());
  CHECK_FALSE(line_with(r.out, "phase stabilize (epochs 30-69)").empty());
  CHECK_FALSE(line_with(r.out, "phase large-batch (epochs 70-99)").empty());
  CHECK_FALSE(line_with(r.out, "speedup: ").empty());
  CHECK(invoke({"simulate", "--seed", "42"}).out == r.out);
}

TEST_CASE("simulate cooldown presets and unknown presets") {
  const auto c2 = invoke({"simulate", "--seed", "42", "--preset", "mobilenet-v3", "--preset", "cooldown-2"});
  const auto c10 = invoke({"simulate", "--seed", "42", "--preset", "mobilenet-v3", "--preset", "cooldown-10"});
  REQUIRE(c2.code == 0);
  REQUIRE(c10.code == 0);
  CHECK(adaptations(c2.out) > adaptations(c10.out));

  const auto bad = invoke({"simulate", "--seed", "1", "--preset", "alexnet"});
  CHECK(bad.code == cli::kBadArguments);
  for (auto name : preset_names()) CHECK(bad.err.find(std::string(name)) != std::string::npos);
  CHECK(invoke({"simulate", "--seed", "1", "--epochs", "-3"}).code != 0);
}

TEST_CASE("every error code maps to a distinct non-zero exit code") {
  std::set<int> codes;
  for (int e = 0; e <= static_cast<int>(Errc::IoError); ++e) {
    const int code = cli::exit_code_for(static_cast<Errc>(e));
    CHECK(code != 0);
    codes.insert(code);
  }
  CHECK(codes.size() >= 18);
}
