// SPDX-License-Identifier: Apache-2.0
#include "deba/types.hpp"

#include <cmath>
#include <string>

#include "deba/error.hpp"

namespace deba {
namespace {

std::string at_epoch(std::int64_t epoch) {
  return "epoch " + std::to_string(epoch) + ": ";
}

void require(bool ok, ConfigField field, const char* what) {
  if (!ok) {
    throw ConfigError(field, std::string(config_field_name(field)) + " " + what);
  }
}

}  // namespace

void validate_record(const EpochRecord& record) {
  if (!std::isfinite(record.loss)) {
    throw Error(Errc::NonFiniteValue, at_epoch(record.epoch) + "loss is not finite");
  }
  if (const auto* raw = std::get_if<RawGradient>(&record.grad_stats)) {
    if (raw->values.size() < 2) {
      throw Error(Errc::DegenerateGradient,
                  at_epoch(record.epoch) + "gradient has fewer than 2 components");
    }
    for (double g : raw->values) {
      if (!std::isfinite(g)) {
        throw Error(Errc::DegenerateGradient,
                    at_epoch(record.epoch) + "gradient has a non-finite component");
      }
    }
    return;
  }
  const auto& pre = std::get<PrecomputedStats>(record.grad_stats);
  if (!std::isfinite(pre.grad_norm) || !std::isfinite(pre.grad_variance)) {
    throw Error(Errc::NonFiniteValue,
                at_epoch(record.epoch) + "gradient statistics are not finite");
  }
  if (pre.grad_norm < 0.0 || pre.grad_variance < 0.0) {
    throw Error(Errc::NonFiniteValue,
                at_epoch(record.epoch) + "gradient statistics are negative");
  }
}

std::string_view stats_mode_name(StatsMode mode) noexcept {
  return mode == StatsMode::SlidingWindow ? "sliding_window" : "full_history";
}

std::optional<StatsMode> parse_stats_mode(std::string_view text) noexcept {
  if (text == "sliding_window") return StatsMode::SlidingWindow;
  if (text == "full_history") return StatsMode::FullHistory;
  return std::nullopt;
}

void validate(const SchedulerConfig& c) {
  require(std::isfinite(c.theta_stab) && c.theta_stab > 0.0,
          ConfigField::ThetaStab, "must be a positive finite real");
  require(std::isfinite(c.theta_conf) && c.theta_conf > 0.0,
          ConfigField::ThetaConf, "must be a positive finite real");
  require(std::isfinite(c.alpha_grow) && c.alpha_grow > 1.0,
          ConfigField::AlphaGrow, "must be > 1");
  require(std::isfinite(c.alpha_roll) && c.alpha_roll > 0.0 && c.alpha_roll < 1.0,
          ConfigField::AlphaRoll, "must be in (0, 1)");
  require(c.b_min >= 1, ConfigField::BatchMin, "must be a positive integer");
  require(c.b_max >= 1, ConfigField::BatchMax, "must be a positive integer");
  require(c.b_min <= c.b_max, ConfigField::BatchBounds, "requires b_min <= b_max");
  require(c.cooldown_epochs >= 0, ConfigField::CooldownEpochs,
          "must be non-negative");
  require(c.window_len >= 1, ConfigField::WindowLen, "must be a positive integer");
  require(std::isfinite(c.epsilon) && c.epsilon > 0.0, ConfigField::Epsilon,
          "must be a positive finite real");
}

std::string_view action_name(Action action) noexcept {
  switch (action) {
    case Action::Increase: return "increase";
    case Action::Rollback: return "rollback";
    case Action::Hold: return "hold";
  }
  return "hold";
}

std::string_view reason_name(Reason reason) noexcept {
  switch (reason) {
    case Reason::RuleIncrease: return "rule_increase";
    case Reason::RuleRollbackConfidence: return "rule_rollback_confidence";
    case Reason::RuleRollbackGradSpike: return "rule_rollback_grad_spike";
    case Reason::RuleHold: return "rule_hold";
    case Reason::CooldownHold: return "cooldown_hold";
    case Reason::WarmupHold: return "warmup_hold";
  }
  return "rule_hold";
}

std::optional<Action> parse_action(std::string_view text) noexcept {
  for (Action a : {Action::Increase, Action::Rollback, Action::Hold}) {
    if (action_name(a) == text) return a;
  }
  return std::nullopt;
}

std::optional<Reason> parse_reason(std::string_view text) noexcept {
  for (Reason r : {Reason::RuleIncrease, Reason::RuleRollbackConfidence,
                   Reason::RuleRollbackGradSpike, Reason::RuleHold,
                   Reason::CooldownHold, Reason::WarmupHold}) {
    if (reason_name(r) == text) return r;
  }
  return std::nullopt;
}

bool consistent(const Decision& d) noexcept {
  switch (d.reason) {
    case Reason::RuleIncrease: return d.action == Action::Increase;
    case Reason::RuleRollbackConfidence:
    case Reason::RuleRollbackGradSpike: return d.action == Action::Rollback;
    case Reason::RuleHold:
    case Reason::CooldownHold:
    case Reason::WarmupHold: return d.action == Action::Hold;
  }
  return false;
}

SchedulerState new_state(const SchedulerConfig& config,
                         std::int64_t initial_batch) {
  validate(config);
  if (initial_batch < config.b_min || initial_batch > config.b_max) {
    throw Error(Errc::InitialBatchOutOfBounds,
                "initial batch " + std::to_string(initial_batch) +
                    " outside [" + std::to_string(config.b_min) + ", " +
                    std::to_string(config.b_max) + "]");
  }
  const auto window = [&] {
    return config.stats_mode == StatsMode::SlidingWindow
               ? WindowStats::bounded(static_cast<std::size_t>(config.window_len))
               : WindowStats::unbounded();
  };
  SchedulerState state;
  state.current_batch = initial_batch;
  state.epoch = 0;
  state.variance_window = window();
  state.norm_var_window = window();
  state.loss_var_window = window();
  return state;
}

}  // namespace deba
