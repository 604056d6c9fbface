// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "deba/types.hpp"

namespace deba {

/// Raw predicates of the rule, evaluated independently of each other.
bool increase_condition(const SignalFrame& frame, const SchedulerConfig& config);
bool rollback_condition(const SignalFrame& frame, const SchedulerConfig& config);

/// Rule outcome for a frame, ignoring cooldown and warmup.
Decision classify(const SignalFrame& frame, const SchedulerConfig& config);

/// Multiplicative batch update clamped to [b_min, b_max].
std::int64_t apply_update(std::int64_t batch, Action action,
                          const SchedulerConfig& config);

/// Advances the scheduler by one epoch. Warmup (epoch 0) and cooldown epochs
/// hold; otherwise the rule decides. Every epoch is appended to the log.
/// Throws EpochMismatch if record.epoch != state.epoch; the state is left
/// untouched on any error.
StepOutcome step(SchedulerState& state, const EpochRecord& record,
                 const SchedulerConfig& config);

}  // namespace deba
