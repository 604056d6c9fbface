// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "deba/types.hpp"

namespace deba {

struct StabilityProfile {
  double stability_score = 1.0;
  double cv_grad_variance = 0.0;
  double mean_grad_norm_variation = 0.0;
  double mean_loss_variation = 0.0;
  std::int64_t n_epochs = 0;
};

enum class Taxonomy {
  OverlyStable,
  ModeratelyStable,
  DynamicallyStable,
  NaturallyUnstable,
  Unclassified,
};

std::string_view taxonomy_name(Taxonomy taxonomy) noexcept;

struct SeedAggregate {
  double mu_s = 0.0;
  double sigma_s = 0.0;
  std::int64_t n_seeds = 0;
  Taxonomy taxonomy = Taxonomy::Unclassified;
};

struct CalibratedThresholds {
  double theta_stab = 0.0;
  double theta_conf = 0.0;
};

struct DebaDiagnostics {
  double decision_aggressiveness = 0.0;
  double convergence_stability = 0.0;
};

// Taxonomy boundaries.
inline constexpr double kDynamicSigmaMin = 0.15;
inline constexpr double kOverlyStableMuMin = 0.54;
inline constexpr double kModerateMuMin = 0.45;
inline constexpr double kUnstableMuMax = 0.26;

/// S = 1 / (1 + CV(variance) + mean(norm variation) + mean(loss variation))
/// over all given frames. Throws InsufficientEpochs below two frames.
StabilityProfile stability_score(std::span<const SignalFrame> frames);

/// Mean and population std of S across seeds, plus the taxonomy class.
SeedAggregate aggregate_seeds(std::span<const StabilityProfile> profiles);

Taxonomy classify_taxonomy(double mu_s, double sigma_s) noexcept;

/// Thresholds from a fixed-batch run: theta_stab is the 75th percentile of
/// gradient-norm variation, theta_conf the median confidence, both over
/// non-warmup epochs (epoch > 0). Needs at least four such frames.
CalibratedThresholds calibrate_thresholds(std::span<const SignalFrame> frames);

/// Signed rate of batch-changing decisions over rule-eligible epochs and the
/// std of the loss series.
DebaDiagnostics deba_diagnostics(const DecisionLog& log,
                                 std::span<const double> losses);

/// Signals of a trace replayed at fixed batch, i.e. the frames a profiling run
/// would log. Thresholds in the config only affect the stability flags.
std::vector<SignalFrame> profile_frames(std::span<const EpochRecord> records,
                                        const SchedulerConfig& config);

}  // namespace deba
