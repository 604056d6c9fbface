#include <random>

#include "doctest.h"
#include "deba/decision.hpp"
#include "deba/sim.hpp"
#include "helpers.hpp"

using namespace deba;
using testing::rec;

namespace {

SignalFrame frame(double c, double gnv, double lv, const SchedulerConfig& cfg) {
  SignalFrame f;
  f.epoch = 1;
  f.confidence = c;
  f.grad_norm_variation = gnv;
  f.loss_variation = lv;
  f.stable_gradients = gnv < cfg.theta_stab;
  f.stable_loss = lv < cfg.theta_stab;
  return f;
}

Action to_action(oracle::Rule r) {
  switch (r) {
    case oracle::Rule::Increase: return Action::Increase;
    case oracle::Rule::Rollback: return Action::Rollback;
    case oracle::Rule::Hold: return Action::Hold;
  }
  return Action::Hold;
}

// Loss alternates by 50% so the loss is never stable; variance stays flat.
std::vector<EpochRecord> holding_trace(std::size_t n, double variance) {
  std::vector<EpochRecord> out;
  for (std::size_t t = 0; t < n; ++t) {
    out.push_back(rec(static_cast<std::int64_t>(t), t % 2 ? 1.5 : 1.0, 1.0, variance));
  }
  return out;
}

}  // namespace

TEST_CASE("rule examples") {
  const auto mob = testing::thresholds(0.25, 0.5);
  CHECK(classify(frame(0.4, 0.1, 0.1, mob), mob).action == Action::Increase);
  const auto hi = testing::thresholds(0.25, 0.8);
  for (double g : {0.0, 0.1, 5.0}) {
    const auto d = classify(frame(0.9, g, g, hi), hi);
    CHECK(d.action == Action::Rollback);
    CHECK(d.reason == Reason::RuleRollbackConfidence);
  }
  const auto spike = classify(frame(0.4, 0.9, 0.1, mob), mob);
  CHECK(spike.action == Action::Rollback);
  CHECK(spike.reason == Reason::RuleRollbackGradSpike);
  CHECK(classify(frame(0.4, 0.5, 0.3, mob), mob).action == Action::Hold);
}

TEST_CASE("rule agrees with the truth-table oracle over a signal grid") {
  const std::vector<double> grid = {0.0, 0.05, 0.1, 0.2, 0.25, 0.3, 0.5, 0.75, 0.76, 0.8, 0.9, 1.0, 2.0};
  for (auto [stab, conf] : {std::pair{0.25, 0.5}, {0.55, 0.6}, {12.0, 0.8}, {0.1, 0.5}}) {
    const auto cfg = testing::thresholds(stab, conf);
    for (double c : grid) {
      for (double gnv : grid) {
        for (double lv : grid) {
          const auto f = frame(c, gnv, lv, cfg);
          const auto d = classify(f, cfg);
          CHECK(d.action == to_action(oracle::rule(c, gnv, lv, conf, stab)));
          CHECK(consistent(d));
        }
      }
    }
  }
}

TEST_CASE("increase and rollback are mutually exclusive on random frames") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const auto cfg = testing::thresholds(0.01 + 2.0 * u(rng), 0.01 + 2.0 * u(rng));
    const auto f = frame(3.0 * u(rng), 3.0 * u(rng), 3.0 * u(rng), cfg);
    const bool inc = increase_condition(f, cfg);
    const bool rb = rollback_condition(f, cfg);
    REQUIRE_FALSE((inc && rb));
    const auto d = classify(f, cfg);
    CHECK(d.action == (inc ? Action::Increase : rb ? Action::Rollback : Action::Hold));
  }
}

TEST_CASE("batch update table") {
  const SchedulerConfig c;
  CHECK(apply_update(64, Action::Increase, c) == 96);
  CHECK(apply_update(64, Action::Rollback, c) == 51);
  CHECK(apply_update(2000, Action::Increase, c) == 2048);
  CHECK(apply_update(16, Action::Rollback, c) == 16);
  CHECK(apply_update(64, Action::Hold, c) == 64);
  for (std::int64_t b = c.b_min; b <= c.b_max; ++b) {
    for (Action a : {Action::Increase, Action::Rollback, Action::Hold}) {
      const auto n = apply_update(b, a, c);
      CHECK(n >= c.b_min);
      CHECK(n <= c.b_max);
    }
  }
}

TEST_CASE("epoch 0 always holds as warmup") {
  const auto c = testing::thresholds(0.25, 0.5);
  auto s = new_state(c, 64);
  const auto o = step(s, rec(0, 2.3, 4.0, 1e-5), c);
  CHECK(o.decision == Decision{Action::Hold, Reason::WarmupHold});
  CHECK(o.batch_after == 64);
  CHECK(s.epoch == 1);
  CHECK(s.decision_log.size() == 1);
}

TEST_CASE("cooldown after an adaptation at epoch 20") {
  // The rule would roll back on every epoch from 20 onward.
  auto c = testing::thresholds(0.25, 1.0);
  auto trace = holding_trace(40, 1e-4);
  for (std::size_t t = 20; t < 40; ++t) std::get<PrecomputedStats>(trace[t].grad_stats).grad_variance = 1e-3;
  auto s = new_state(c, 256);
  DecisionLog log;
  for (const auto& r : trace) log.push_back(step(s, r, c));
  for (std::size_t t = 1; t < 20; ++t) CHECK(log[t].decision.reason == Reason::RuleHold);
  CHECK(log[20].decision.action == Action::Rollback);
  for (std::size_t t = 21; t <= 25; ++t) {
    CHECK(log[t].decision == Decision{Action::Hold, Reason::CooldownHold});
    CHECK(log[t].frame.epoch == static_cast<std::int64_t>(t));
  }
  CHECK(log[26].decision.action == Action::Rollback);
}

TEST_CASE("all-stable synthetic trace grows by 1.5 every sixth epoch") {
  const auto c = testing::thresholds(0.55, 0.6);
  const auto trace = all_stable_trace(100);
  auto s = new_state(c, 64);
  DecisionLog log;
  for (const auto& r : trace) log.push_back(step(s, r, c));

  const std::vector<std::int64_t> sizes = {96, 144, 216, 324, 486, 729, 1093, 1639, 2048};
  std::size_t k = 0;
  std::int64_t last = -100;
  for (const auto& o : log) {
    if (o.decision.action == Action::Increase) {
      CHECK(o.frame.epoch - last >= 6);
      last = o.frame.epoch;
      if (k < sizes.size()) CHECK(o.batch_after == sizes[k]);
      ++k;
    }
    CHECK(o.decision.action != Action::Rollback);
  }
  CHECK(log[1].decision.action == Action::Increase);
  CHECK(log[7].decision.action == Action::Increase);
  CHECK(s.current_batch == 2048);
}

TEST_CASE("a single variance spike at epoch 30 causes one rollback") {
  const auto c = testing::thresholds(0.25, 1.0);
  auto trace = holding_trace(60, 1e-4);
  std::get<PrecomputedStats>(trace[30].grad_stats).grad_variance = 1e-3;
  auto s = new_state(c, 100);
  DecisionLog log;
  for (const auto& r : trace) log.push_back(step(s, r, c));
  std::size_t rollbacks = 0;
  for (const auto& o : log) {
    if (o.decision.action != Action::Hold) {
      CHECK(o.frame.epoch == 30);
      CHECK(o.decision.action == Action::Rollback);
      CHECK(o.batch_after == 80);
      ++rollbacks;
    }
  }
  CHECK(rollbacks == 1);
}

TEST_CASE("clamped no-op adaptations still start a cooldown") {
  const auto c = testing::thresholds(0.55, 0.6);
  auto s = new_state(c, 2048);
  DecisionLog log;
  for (const auto& r : all_stable_trace(20)) log.push_back(step(s, r, c));
  CHECK(log[1].decision.action == Action::Increase);
  CHECK(log[1].batch_after == 2048);
  CHECK(log[2].decision.reason == Reason::CooldownHold);
  CHECK(s.last_adaptation_epoch == 19);
}

TEST_CASE("scheduler matches the stand-alone reference loop") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SchedulerConfig c = testing::thresholds(0.15 + 0.01 * static_cast<double>(seed), 0.8 + 0.02 * static_cast<double>(seed % 10));
    c.cooldown_epochs = static_cast<std::int64_t>(seed % 7);
    if (seed % 3 == 0) c.stats_mode = StatsMode::FullHistory;
    const auto trace = oracle::noisy_trace(120, seed);
    const auto expected = oracle::simulate(trace, testing::to_sim(c), 64);
    auto s = new_state(c, 64);
    const auto records = testing::to_records(trace);
    for (std::size_t t = 0; t < trace.size(); ++t) {
      const auto o = step(s, records[t], c);
      const auto& e = expected[t];
      CHECK(o.batch_before == e.before);
      CHECK(o.batch_after == e.after);
      CHECK((o.decision.reason == Reason::WarmupHold) == e.warmup);
      CHECK((o.decision.reason == Reason::CooldownHold) == e.cooldown);
      if (!e.warmup && !e.cooldown) CHECK(o.decision.action == to_action(e.rule));
    }
  }
}

TEST_CASE("state invariants hold along random runs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SchedulerConfig c = testing::thresholds(0.3, 1.1);
    c.window_len = 4 + static_cast<std::int64_t>(seed % 12);
    auto s = new_state(c, 64);
    for (const auto& r : testing::to_records(oracle::noisy_trace(80, seed))) {
      step(s, r, c);
      CHECK(s.current_batch >= c.b_min);
      CHECK(s.current_batch <= c.b_max);
      CHECK(s.variance_window.size() <= static_cast<std::size_t>(c.window_len));
      CHECK(s.norm_var_window.size() <= static_cast<std::size_t>(c.window_len));
    }
    for (std::size_t i = 1; i < s.decision_log.size(); ++i) {
      CHECK(s.decision_log[i].frame.epoch == s.decision_log[i - 1].frame.epoch + 1);
      CHECK(s.decision_log[i].batch_before == s.decision_log[i - 1].batch_after);
    }
  }
}
