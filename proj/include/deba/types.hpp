// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "deba/window.hpp"

namespace deba {

/// Flattened gradient of one epoch.
struct RawGradient {
  std::vector<double> values;
};

/// Gradient summary computed by the producer (e.g. on an accelerator).
struct PrecomputedStats {
  double grad_norm = 0.0;
  double grad_variance = 0.0;
};

using GradientStats = std::variant<RawGradient, PrecomputedStats>;

struct EpochRecord {
  std::int64_t epoch = 0;
  double loss = 0.0;
  GradientStats grad_stats = PrecomputedStats{};
};

/// Validates finiteness and shape of a record; throws NonFiniteValue or
/// DegenerateGradient naming the epoch.
void validate_record(const EpochRecord& record);

struct SignalFrame {
  std::int64_t epoch = 0;
  double grad_variance = 0.0;
  double grad_norm = 0.0;
  double grad_norm_variation = 0.0;
  double loss_variation = 0.0;
  double confidence = 0.0;
  bool stable_gradients = false;
  bool stable_loss = false;

  bool operator==(const SignalFrame&) const = default;
};

enum class StatsMode { SlidingWindow, FullHistory };

std::string_view stats_mode_name(StatsMode mode) noexcept;
std::optional<StatsMode> parse_stats_mode(std::string_view text) noexcept;

struct SchedulerConfig {
  double theta_stab = 0.1;
  double theta_conf = 0.5;
  double alpha_grow = 1.5;
  double alpha_roll = 0.8;
  std::int64_t b_min = 16;
  std::int64_t b_max = 2048;
  std::int64_t cooldown_epochs = 5;
  std::int64_t window_len = 15;
  StatsMode stats_mode = StatsMode::SlidingWindow;
  double epsilon = 1e-8;

  bool operator==(const SchedulerConfig&) const = default;
};

/// Throws ConfigError naming the first invalid field.
void validate(const SchedulerConfig& config);

enum class Action { Increase, Rollback, Hold };

enum class Reason {
  RuleIncrease,
  RuleRollbackConfidence,
  RuleRollbackGradSpike,
  RuleHold,
  CooldownHold,
  WarmupHold,
};

struct Decision {
  Action action = Action::Hold;
  Reason reason = Reason::RuleHold;

  bool operator==(const Decision&) const = default;
};

std::string_view action_name(Action action) noexcept;
std::string_view reason_name(Reason reason) noexcept;
std::optional<Action> parse_action(std::string_view text) noexcept;
std::optional<Reason> parse_reason(std::string_view text) noexcept;

/// True when the reason may accompany the action.
bool consistent(const Decision& decision) noexcept;

struct StepOutcome {
  SignalFrame frame;
  Decision decision;
  std::int64_t batch_before = 0;
  std::int64_t batch_after = 0;

  bool operator==(const StepOutcome&) const = default;
};

using DecisionLog = std::vector<StepOutcome>;

struct SchedulerState {
  std::int64_t current_batch = 0;
  std::int64_t epoch = 0;
  std::optional<std::int64_t> last_adaptation_epoch;
  WindowStats variance_window;
  WindowStats norm_var_window;
  WindowStats loss_var_window;
  std::optional<double> prev_loss;
  std::optional<double> prev_grad_norm;
  DecisionLog decision_log;

  bool operator==(const SchedulerState&) const = default;
};

/// Fresh scheduler state at epoch 0. Validates the config and throws
/// InitialBatchOutOfBounds unless b_min <= initial_batch <= b_max.
SchedulerState new_state(const SchedulerConfig& config,
                         std::int64_t initial_batch);

}  // namespace deba
