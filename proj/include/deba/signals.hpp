// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "deba/types.hpp"

namespace deba {

/// Population variance of the gradient components, two-pass in double.
/// Throws DegenerateGradient for fewer than two or non-finite components.
double gradient_variance(std::span<const double> grad);

/// Euclidean norm of the gradient. Same preconditions as gradient_variance.
double gradient_norm(std::span<const double> grad);

struct GradientSummary {
  double norm = 0.0;
  double variance = 0.0;
};

/// Norm and variance of one flattened gradient, validated once.
GradientSummary summarize_gradient(std::span<const double> grad);

/// |current - previous| / (|previous| + epsilon). Throws NonFiniteInput.
double relative_variation(double current, double previous, double epsilon);

/// current_variance / (median(window) + epsilon). The window is expected to
/// already hold current_variance. Throws EmptyWindow.
double confidence_score(double current_variance, const WindowStats& window,
                        double epsilon);

/// Derives the epoch's signals and pushes them into the state's windows.
/// Only the windows are touched; batch size, epoch counter and previous
/// observations are advanced by step(). On error the state is unchanged.
SignalFrame build_signal_frame(const EpochRecord& record, SchedulerState& state,
                               const SchedulerConfig& config);

}  // namespace deba
