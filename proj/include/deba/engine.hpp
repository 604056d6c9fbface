// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "deba/types.hpp"

namespace deba {

std::string_view version() noexcept;

/// One scheduler driven epoch by epoch from a host training loop. Calls on a
/// single engine must be serialised by the caller.
class Engine {
 public:
  Engine(const SchedulerConfig& config, std::int64_t initial_batch);

  StepOutcome step(std::int64_t epoch, double loss, double grad_norm,
                   double grad_variance);
  StepOutcome step_raw(std::int64_t epoch, double loss,
                       std::span<const double> gradient);

  /// Further calls throw ClosedHandle.
  void close() noexcept { open_ = false; }
  bool is_open() const noexcept { return open_; }

  const SchedulerConfig& config() const noexcept { return config_; }
  const SchedulerState& state() const;
  std::int64_t current_batch() const;

 private:
  void require_open() const;

  SchedulerConfig config_;
  SchedulerState state_;
  bool open_ = true;
};

}  // namespace deba
