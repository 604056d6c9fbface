// SPDX-License-Identifier: Apache-2.0
#include "deba/engine.hpp"

#include "deba/decision.hpp"
#include "deba/error.hpp"
#include "deba/signals.hpp"

namespace deba {

std::string_view version() noexcept { return "0.1.0"; }

Engine::Engine(const SchedulerConfig& config, std::int64_t initial_batch)
    : config_(config), state_(new_state(config, initial_batch)) {}

void Engine::require_open() const {
  if (!open_) throw Error(Errc::ClosedHandle, "engine is closed");
}

StepOutcome Engine::step(std::int64_t epoch, double loss, double grad_norm,
                         double grad_variance) {
  require_open();
  const EpochRecord record{epoch, loss, PrecomputedStats{grad_norm, grad_variance}};
  return deba::step(state_, record, config_);
}

StepOutcome Engine::step_raw(std::int64_t epoch, double loss,
                             std::span<const double> gradient) {
  require_open();
  // Summarise in place rather than copying a possibly huge buffer into a record.
  const GradientSummary s = summarize_gradient(gradient);
  return step(epoch, loss, s.norm, s.variance);
}

const SchedulerState& Engine::state() const {
  require_open();
  return state_;
}

std::int64_t Engine::current_batch() const {
  require_open();
  return state_.current_batch;
}

}  // namespace deba
