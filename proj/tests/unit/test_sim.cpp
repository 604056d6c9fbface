#include <cmath>
#include <random>

#include "doctest.h"
#include "deba/sim.hpp"
#include "helpers.hpp"

using namespace deba;
using testing::errc_of;

namespace {

double variance_of(const EpochRecord& r) {
  return std::get<PrecomputedStats>(r.grad_stats).grad_variance;
}

bool same_trace(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& pa = std::get<PrecomputedStats>(a[i].grad_stats);
    const auto& pb = std::get<PrecomputedStats>(b[i].grad_stats);
    if (a[i].epoch != b[i].epoch || a[i].loss != b[i].loss || pa.grad_norm != pb.grad_norm ||
        pa.grad_variance != pb.grad_variance) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("three-phase dynamics separate early and late variance bands") {
  const auto t = generate_trace(DynamicsSpec::three_phase(100, 42));
  REQUIRE(t.size() == 100);
  double early_min = INFINITY, late_max = 0.0;
  for (std::size_t e = 1; e <= 30; ++e) early_min = std::min(early_min, variance_of(t[e]));
  for (std::size_t e = 70; e < 100; ++e) late_max = std::max(late_max, variance_of(t[e]));
  CHECK(early_min >= 10.0 * late_max);
  for (const auto& r : t) CHECK_NOTHROW(validate_record(r));
}

TEST_CASE("generator edge cases and determinism") {
  CHECK(generate_trace(DynamicsSpec::three_phase(0, 1)).empty());
  for (std::uint64_t seed : {0u, 1u, 42u, 1234567u}) {
    CHECK(same_trace(generate_trace(DynamicsSpec::three_phase(100, seed)),
                     generate_trace(DynamicsSpec::three_phase(100, seed))));
  }
  CHECK_FALSE(same_trace(generate_trace(DynamicsSpec::three_phase(50, 1)),
                         generate_trace(DynamicsSpec::three_phase(50, 2))));
  auto bad = DynamicsSpec::three_phase(10, 1);
  bad.phases.clear();
  CHECK(errc_of([&] { generate_trace(bad); }) == Errc::InvalidSpec);
  auto neg = DynamicsSpec::three_phase(10, 1);
  neg.loss_noise = -1.0;
  CHECK(errc_of([&] { generate_trace(neg); }) == Errc::InvalidSpec);
}

TEST_CASE("walltime of fixed schedules") {
  const auto model = ThroughputModel::parametric(0.0, 7.78 * 64.0);
  CHECK(estimate_walltime(constant_schedule(100, 64), model) == doctest::Approx(778.0).epsilon(1e-12));

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::int64_t> b(16, 1024);
  const auto pure = ThroughputModel::parametric(0.0, 300.0);
  for (int i = 0; i < 50; ++i) {
    Schedule s, doubled;
    for (std::int64_t e = 0; e < 40; ++e) {
      s.push_back({e, b(rng)});
      doubled.push_back({e, 2 * s.back().batch});
    }
    CHECK(estimate_walltime(doubled, pure) == doctest::Approx(estimate_walltime(s, pure) / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("walltime is monotone in the schedule") {
  const auto model = ThroughputModel::resnet18_cifar10();
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::int64_t> b(16, 1024);
  std::uniform_int_distribution<std::int64_t> bump(0, 64);
  for (int i = 0; i < 200; ++i) {
    Schedule lo, hi;
    for (std::int64_t e = 0; e < 30; ++e) {
      lo.push_back({e, b(rng)});
      hi.push_back({e, lo.back().batch + bump(rng)});
    }
    CHECK(estimate_walltime(hi, model) <= estimate_walltime(lo, model));
  }
}

TEST_CASE("fitted ResNet-18 model reproduces both calibration runs") {
  const auto model = ThroughputModel::resnet18_cifar10();
  CHECK(estimate_walltime(constant_schedule(100, 64), model) == doctest::Approx(778.0).epsilon(1e-9));
  CHECK(estimate_walltime(reference_three_phase_schedule(), model) == doctest::Approx(512.0).epsilon(1e-9));
  CHECK(reference_three_phase_schedule().size() == 100);
  CHECK(model.seconds_per_epoch(64) > model.seconds_per_epoch(128));
}

TEST_CASE("table model interpolates and rejects out-of-range batches") {
  const auto t = ThroughputModel::table({{32, 10.0}, {64, 6.0}, {128, 4.0}});
  CHECK(t.seconds_per_epoch(48) == doctest::Approx(8.0));
  CHECK(t.seconds_per_epoch(128) == 4.0);
  CHECK(errc_of([&] { t.seconds_per_epoch(256); }) == Errc::ModelDomainError);
  CHECK(errc_of([&] { t.seconds_per_epoch(16); }) == Errc::ModelDomainError);
  CHECK(errc_of([] { ThroughputModel::table({}); }) == Errc::InvalidValue);
  CHECK(errc_of([] { estimate_walltime(Schedule{{0, 64}, {2, 64}}, ThroughputModel::parametric(1, 1)); }) ==
        Errc::NonContiguousEpochs);
}

TEST_CASE("all-stable trace gives a positive speedup") {
  const auto r = replay(all_stable_trace(100), testing::thresholds(0.55, 0.6), 64, ThroughputModel::resnet18_cifar10());
  REQUIRE(r.speedup.has_value());
  CHECK(r.speedup->speedup > 0.0);
  CHECK(r.speedup->speedup == doctest::Approx(1.0 - r.speedup->adaptive_seconds / r.speedup->fixed_seconds));
  for (std::size_t i = 1; i < r.schedule.size(); ++i) CHECK(r.schedule[i].batch >= r.schedule[i - 1].batch);
  CHECK(r.schedule.back().batch == 2048);
}

TEST_CASE("rollback-only dynamics drive the batch down to the floor") {
  std::vector<EpochRecord> t;
  for (std::int64_t e = 0; e < 100; ++e) t.push_back(testing::rec(e, 1.0, 1.0, 1e-6 * std::pow(3.0, static_cast<double>(e))));
  const auto r = replay(t, SchedulerConfig{}, 512);
  for (std::size_t i = 1; i < r.schedule.size(); ++i) CHECK(r.schedule[i].batch <= r.schedule[i - 1].batch);
  for (const auto& o : r.log) CHECK(o.decision.action != Action::Increase);
  CHECK(r.log.back().batch_after == 16);
}

TEST_CASE("shorter cooldown yields more adaptations on a noisy trace") {
  const auto trace = generate_trace(DynamicsSpec::three_phase(100, 42));
  const auto base = apply_preset("mobilenet-v3", SchedulerConfig{});
  REQUIRE(base.has_value());
  const auto c2 = apply_preset("cooldown-2", *base);
  const auto c10 = apply_preset("cooldown-10", *base);
  REQUIRE(c2.has_value());
  REQUIRE(c10.has_value());
  CHECK(count_adaptations(replay(trace, *c2, 64).log) > count_adaptations(replay(trace, *c10, 64).log));
}

TEST_CASE("presets") {
  const auto names = preset_names();
  CHECK(names.size() >= 10);
  for (auto n : names) {
    const auto c = apply_preset(n, SchedulerConfig{});
    REQUIRE(c.has_value());
    CHECK_NOTHROW(validate(*c));
  }
  const auto r50 = apply_preset("resnet-50", SchedulerConfig{});
  CHECK(r50->theta_stab == 12.0);
  CHECK(r50->theta_conf == 0.8);
  CHECK(apply_preset("full-history", SchedulerConfig{})->stats_mode == StatsMode::FullHistory);
  CHECK_FALSE(apply_preset("vgg-16", SchedulerConfig{}).has_value());
}

TEST_CASE("replay schedule records the batch trained at each epoch") {
  const auto trace = testing::to_records(oracle::noisy_trace(70, 3));
  const auto r = replay(trace, testing::thresholds(0.3, 1.1), 64);
  REQUIRE(r.schedule.size() == 70);
  for (std::size_t i = 0; i < 70; ++i) {
    CHECK(r.schedule[i].epoch == static_cast<std::int64_t>(i));
    CHECK(r.schedule[i].batch == r.log[i].batch_before);
  }
  CHECK_FALSE(r.speedup.has_value());
}
