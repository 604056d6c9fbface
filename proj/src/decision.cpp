// SPDX-License-Identifier: Apache-2.0
#include "deba/decision.hpp"

#include <algorithm>
#include <cmath>

#include "deba/signals.hpp"

namespace deba {

// Gradient-spike rollback fires above this multiple of theta_stab.
constexpr double kSpikeMultiplier = 3.0;

bool increase_condition(const SignalFrame& frame, const SchedulerConfig& config) {
  return frame.confidence <= config.theta_conf && frame.stable_gradients &&
         frame.stable_loss;
}

bool rollback_condition(const SignalFrame& frame, const SchedulerConfig& config) {
  return frame.confidence > config.theta_conf ||
         frame.grad_norm_variation > kSpikeMultiplier * config.theta_stab;
}

Decision classify(const SignalFrame& frame, const SchedulerConfig& config) {
  if (increase_condition(frame, config)) {
    return {Action::Increase, Reason::RuleIncrease};
  }
  if (frame.confidence > config.theta_conf) {
    return {Action::Rollback, Reason::RuleRollbackConfidence};
  }
  if (frame.grad_norm_variation > kSpikeMultiplier * config.theta_stab) {
    return {Action::Rollback, Reason::RuleRollbackGradSpike};
  }
  return {Action::Hold, Reason::RuleHold};
}

std::int64_t apply_update(std::int64_t batch, Action action,
                          const SchedulerConfig& config) {
  const auto scaled = [batch](double factor) {
    return static_cast<std::int64_t>(std::floor(factor * static_cast<double>(batch)));
  };
  switch (action) {
    case Action::Increase: return std::min(config.b_max, scaled(config.alpha_grow));
    case Action::Rollback: return std::max(config.b_min, scaled(config.alpha_roll));
    case Action::Hold: break;
  }
  return batch;
}

StepOutcome step(SchedulerState& state, const EpochRecord& record,
                 const SchedulerConfig& config) {
  StepOutcome outcome;
  outcome.frame = build_signal_frame(record, state, config);
  outcome.batch_before = state.current_batch;

  const std::int64_t t = state.epoch;
  if (t == 0) {
    outcome.decision = {Action::Hold, Reason::WarmupHold};
  } else if (state.last_adaptation_epoch &&
             t <= *state.last_adaptation_epoch + config.cooldown_epochs) {
    outcome.decision = {Action::Hold, Reason::CooldownHold};
  } else {
    outcome.decision = classify(outcome.frame, config);
  }

  outcome.batch_after =
      apply_update(outcome.batch_before, outcome.decision.action, config);
  // Clamped no-op adaptations still start a cooldown.
  if (outcome.decision.action != Action::Hold) state.last_adaptation_epoch = t;

  state.current_batch = outcome.batch_after;
  state.prev_loss = record.loss;
  state.prev_grad_norm = outcome.frame.grad_norm;
  state.decision_log.push_back(outcome);
  ++state.epoch;
  return outcome;
}

}  // namespace deba
