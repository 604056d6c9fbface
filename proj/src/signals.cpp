// SPDX-License-Identifier: Apache-2.0
#include "deba/signals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deba/error.hpp"

namespace deba {
namespace {

void require_gradient(std::span<const double> grad) {
  if (grad.size() < 2) {
    throw Error(Errc::DegenerateGradient,
                "gradient has " + std::to_string(grad.size()) +
                    " components, need at least 2");
  }
}

void require_finite_gradient(std::span<const double> grad) {
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw Error(Errc::DegenerateGradient, "gradient has a non-finite component");
    }
  }
}

double mean_of(std::span<const double> grad) {
  double sum = 0.0;
  for (double g : grad) sum += g;
  return sum / static_cast<double>(grad.size());
}

double variance_around(std::span<const double> grad, double mean) {
  double ss = 0.0;
  for (double g : grad) {
    const double d = g - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(grad.size());
}

double norm_of(std::span<const double> grad) {
  double ss = 0.0;
  for (double g : grad) ss += g * g;
  return std::sqrt(ss);
}

}  // namespace

double gradient_variance(std::span<const double> grad) {
  require_gradient(grad);
  require_finite_gradient(grad);
  return variance_around(grad, mean_of(grad));
}

double gradient_norm(std::span<const double> grad) {
  require_gradient(grad);
  require_finite_gradient(grad);
  return norm_of(grad);
}

GradientSummary summarize_gradient(std::span<const double> grad) {
  require_gradient(grad);
  // Two-pass statistics per block while the block is cache-resident, merged
  // with the pairwise update, so a large buffer is streamed from memory once.
  constexpr std::size_t kBlock = 4096;
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  double ss = 0.0;
  for (std::size_t first = 0; first < grad.size(); first += kBlock) {
    const auto block = grad.subspan(first, std::min(kBlock, grad.size() - first));
    double sum = 0.0;
    double block_ss = 0.0;
    for (double g : block) {
      sum += g;
      block_ss += g * g;
    }
    const double n = static_cast<double>(block.size());
    const double block_mean = sum / n;
    const double block_m2 = variance_around(block, block_mean) * n;
    const double delta = block_mean - mean;
    const double total = count + n;
    mean += delta * n / total;
    m2 += block_m2 + delta * delta * count * n / total;
    count = total;
    ss += block_ss;
  }
  // A non-finite component poisons the accumulators.
  if (!std::isfinite(ss) || !std::isfinite(m2)) require_finite_gradient(grad);
  return {std::sqrt(ss), m2 / count};
}

double relative_variation(double current, double previous, double epsilon) {
  if (!std::isfinite(current) || !std::isfinite(previous) ||
      !std::isfinite(epsilon)) {
    throw Error(Errc::NonFiniteInput, "relative variation of non-finite input");
  }
  return std::abs(current - previous) / (std::abs(previous) + epsilon);
}

double confidence_score(double current_variance, const WindowStats& window,
                        double epsilon) {
  return current_variance / (window.median() + epsilon);
}

SignalFrame build_signal_frame(const EpochRecord& record, SchedulerState& state,
                               const SchedulerConfig& config) {
  if (record.epoch != state.epoch) {
    throw Error(Errc::EpochMismatch,
                "record epoch " + std::to_string(record.epoch) +
                    " but scheduler expects epoch " + std::to_string(state.epoch));
  }
  if (!std::isfinite(record.loss)) {
    throw Error(Errc::NonFiniteValue,
                "epoch " + std::to_string(record.epoch) + ": loss is not finite");
  }

  SignalFrame frame;
  frame.epoch = record.epoch;
  if (const auto* raw = std::get_if<RawGradient>(&record.grad_stats)) {
    const GradientSummary s = summarize_gradient(raw->values);
    frame.grad_norm = s.norm;
    frame.grad_variance = s.variance;
  } else {
    validate_record(record);
    const auto& pre = std::get<PrecomputedStats>(record.grad_stats);
    frame.grad_norm = pre.grad_norm;
    frame.grad_variance = pre.grad_variance;
  }

  if (state.prev_grad_norm && state.prev_loss) {
    frame.grad_norm_variation =
        relative_variation(frame.grad_norm, *state.prev_grad_norm, config.epsilon);
    frame.loss_variation =
        relative_variation(record.loss, *state.prev_loss, config.epsilon);
  }

  // Nothing below throws; the windows are only touched once inputs are valid.
  state.variance_window.push(frame.grad_variance);
  state.norm_var_window.push(frame.grad_norm_variation);
  state.loss_var_window.push(frame.loss_variation);

  frame.confidence =
      confidence_score(frame.grad_variance, state.variance_window, config.epsilon);
  frame.stable_gradients = frame.grad_norm_variation < config.theta_stab;
  frame.stable_loss = frame.loss_variation < config.theta_stab;
  return frame;
}

}  // namespace deba
