// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "deba/types.hpp"

namespace deba {

/// One training phase. Gradient variance decays log-linearly from
/// variance_hi to variance_lo across the phase and is clamped to that band.
struct PhaseSpec {
  std::int64_t end_epoch = 0;  // exclusive
  double variance_hi = 1e-5;
  double variance_lo = 1e-6;
  double grad_norm = 1.0;
  double norm_jitter = 0.1;  // relative std of the gradient norm
};

struct DynamicsSpec {
  std::int64_t n_epochs = 100;
  std::uint64_t seed = 42;
  double loss_initial = 2.3;
  double loss_final = 0.3;
  double loss_tau = 25.0;
  double loss_noise = 0.02;       // relative std of the loss
  double variance_jitter = 0.25;  // std of log-variance noise
  std::vector<PhaseSpec> phases;

  /// Exploration / stabilisation / large-batch phases split at 30% and 70%.
  static DynamicsSpec three_phase(std::int64_t n_epochs, std::uint64_t seed);
};

/// Throws InvalidSpec.
void validate(const DynamicsSpec& spec);

/// Deterministic synthetic trace with precomputed stats. Uses its own
/// normal sampler on top of mt19937_64 so output is identical across
/// standard libraries.
std::vector<EpochRecord> generate_trace(const DynamicsSpec& spec);

/// Constant loss and norm with variance shrinking by variance_decay per epoch:
/// every post-warmup epoch satisfies the increase rule for theta_conf >= 0.4.
std::vector<EpochRecord> all_stable_trace(std::int64_t n_epochs,
                                          double variance_decay = 0.25);

struct ScheduleEntry {
  std::int64_t epoch = 0;
  std::int64_t batch = 0;

  bool operator==(const ScheduleEntry&) const = default;
};

using Schedule = std::vector<ScheduleEntry>;

Schedule constant_schedule(std::int64_t n_epochs, std::int64_t batch);

/// Seconds per epoch as a function of batch size.
class ThroughputModel {
 public:
  struct Parametric {
    double c1 = 0.0;  // fixed per-epoch seconds
    double c2 = 0.0;  // seconds x batch
  };
  struct TablePoint {
    std::int64_t batch = 0;
    double seconds = 0.0;
  };

  /// t(B) = c1 + c2 / B. Throws InvalidValue for negative or non-finite
  /// coefficients or c1 = c2 = 0.
  static ThroughputModel parametric(double c1, double c2);
  /// Piecewise-linear interpolation between measured points (sorted, distinct
  /// batches, positive seconds).
  static ThroughputModel table(std::vector<TablePoint> points);

  /// Solves c1, c2 so that two runs with known total times are reproduced.
  static ThroughputModel fit_two_runs(std::span<const ScheduleEntry> run_a,
                                      double total_a,
                                      std::span<const ScheduleEntry> run_b,
                                      double total_b);

  /// Parametric fit to ResNet-18 / CIFAR-10: 778 s for 100 epochs at batch 64
  /// and 512 s for the reference three-phase adaptive schedule.
  static ThroughputModel resnet18_cifar10();

  /// Throws ModelDomainError for a batch outside a table's range or < 1.
  double seconds_per_epoch(std::int64_t batch) const;

  bool is_parametric() const noexcept {
    return std::holds_alternative<Parametric>(model_);
  }
  const std::variant<Parametric, std::vector<TablePoint>>& model() const {
    return model_;
  }

 private:
  explicit ThroughputModel(std::variant<Parametric, std::vector<TablePoint>> m)
      : model_(std::move(m)) {}

  std::variant<Parametric, std::vector<TablePoint>> model_;
};

/// Batch per epoch of the reference adaptive run used by resnet18_cifar10():
/// 64 -> 216 over epochs 0-29, 324 -> 729 over 30-69, 1093 -> 2048 over 70-99.
Schedule reference_three_phase_schedule();

/// Sum of t(B_t). The schedule must cover epochs 0..n-1 in order.
double estimate_walltime(std::span<const ScheduleEntry> schedule,
                         const ThroughputModel& model);

struct SpeedupEstimate {
  double fixed_seconds = 0.0;
  double adaptive_seconds = 0.0;
  /// (fixed - adaptive) / fixed
  double speedup = 0.0;
};

struct ReplayResult {
  DecisionLog log;
  Schedule schedule;  // batch trained with at each epoch
  std::optional<SpeedupEstimate> speedup;
};

ReplayResult replay(std::span<const EpochRecord> records,
                    const SchedulerConfig& config, std::int64_t initial_batch,
                    const std::optional<ThroughputModel>& model = std::nullopt);

std::size_t count_adaptations(const DecisionLog& log) noexcept;

/// Named configuration presets: per-architecture thresholds and the ablation
/// variants (universal thresholds, cooldown 2/5/10, full history).
std::vector<std::string_view> preset_names();

/// Applies a preset on top of base; nullopt for an unknown name.
std::optional<SchedulerConfig> apply_preset(std::string_view name,
                                            SchedulerConfig base);

}  // namespace deba
