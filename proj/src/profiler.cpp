// SPDX-License-Identifier: Apache-2.0
#include "deba/profiler.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "deba/error.hpp"
#include "deba/signals.hpp"
#include "deba/stats.hpp"

namespace deba {

std::string_view taxonomy_name(Taxonomy taxonomy) noexcept {
  switch (taxonomy) {
    case Taxonomy::OverlyStable: return "overly_stable";
    case Taxonomy::ModeratelyStable: return "moderately_stable";
    case Taxonomy::DynamicallyStable: return "dynamically_stable";
    case Taxonomy::NaturallyUnstable: return "naturally_unstable";
    case Taxonomy::Unclassified: return "unclassified";
  }
  return "unclassified";
}

StabilityProfile stability_score(std::span<const SignalFrame> frames) {
  if (frames.size() < 2) {
    throw Error(Errc::InsufficientEpochs,
                "stability score needs at least 2 epochs, got " +
                    std::to_string(frames.size()));
  }
  std::vector<double> variances;
  std::vector<double> gnv;
  std::vector<double> lv;
  variances.reserve(frames.size());
  gnv.reserve(frames.size());
  lv.reserve(frames.size());
  for (const SignalFrame& f : frames) {
    if (!std::isfinite(f.grad_variance) || !std::isfinite(f.grad_norm_variation) ||
        !std::isfinite(f.loss_variation)) {
      throw Error(Errc::NonFiniteValue,
                  "epoch " + std::to_string(f.epoch) + ": non-finite signal");
    }
    variances.push_back(f.grad_variance);
    gnv.push_back(f.grad_norm_variation);
    lv.push_back(f.loss_variation);
  }

  StabilityProfile p;
  const double mean_var = stats::mean(variances);
  p.cv_grad_variance =
      mean_var == 0.0 ? 0.0 : stats::population_std(variances) / mean_var;
  p.mean_grad_norm_variation = stats::mean(gnv);
  p.mean_loss_variation = stats::mean(lv);
  p.stability_score = 1.0 / (1.0 + p.cv_grad_variance +
                             p.mean_grad_norm_variation + p.mean_loss_variation);
  p.n_epochs = static_cast<std::int64_t>(frames.size());
  return p;
}

Taxonomy classify_taxonomy(double mu_s, double sigma_s) noexcept {
  if (sigma_s > kDynamicSigmaMin) return Taxonomy::DynamicallyStable;
  if (mu_s > kOverlyStableMuMin) return Taxonomy::OverlyStable;
  if (mu_s >= kModerateMuMin) return Taxonomy::ModeratelyStable;
  if (mu_s < kUnstableMuMax) return Taxonomy::NaturallyUnstable;
  return Taxonomy::Unclassified;
}

SeedAggregate aggregate_seeds(std::span<const StabilityProfile> profiles) {
  if (profiles.empty()) {
    throw Error(Errc::EmptyInput, "no stability profiles to aggregate");
  }
  std::vector<double> scores;
  scores.reserve(profiles.size());
  for (const auto& p : profiles) scores.push_back(p.stability_score);

  SeedAggregate agg;
  agg.n_seeds = static_cast<std::int64_t>(scores.size());
  agg.mu_s = stats::mean(scores);
  agg.sigma_s = scores.size() == 1 ? 0.0 : stats::population_std(scores);
  agg.taxonomy = classify_taxonomy(agg.mu_s, agg.sigma_s);
  return agg;
}

CalibratedThresholds calibrate_thresholds(std::span<const SignalFrame> frames) {
  std::vector<double> gnv;
  std::vector<double> conf;
  for (const SignalFrame& f : frames) {
    if (f.epoch == 0) continue;
    gnv.push_back(f.grad_norm_variation);
    conf.push_back(f.confidence);
  }
  if (gnv.size() < 4) {
    throw Error(Errc::InsufficientEpochs,
                "calibration needs at least 4 post-warmup epochs, got " +
                    std::to_string(gnv.size()));
  }
  CalibratedThresholds out;
  out.theta_stab = stats::quantile(gnv, 0.75);
  out.theta_conf = stats::median(conf);
  if (!(std::isfinite(out.theta_stab) && out.theta_stab > 0.0)) {
    throw Error(Errc::DegenerateCalibration,
                "calibrated theta_stab is not positive; the run shows no "
                "gradient-norm variation");
  }
  if (!(std::isfinite(out.theta_conf) && out.theta_conf > 0.0)) {
    throw Error(Errc::DegenerateCalibration,
                "calibrated theta_conf is not positive");
  }
  return out;
}

DebaDiagnostics deba_diagnostics(const DecisionLog& log,
                                 std::span<const double> losses) {
  if (log.empty()) throw Error(Errc::EmptyInput, "empty decision log");
  if (losses.empty()) throw Error(Errc::EmptyInput, "empty loss sequence");

  std::int64_t increases = 0;
  std::int64_t rollbacks = 0;
  std::int64_t eligible = 0;
  for (const StepOutcome& o : log) {
    if (o.decision.reason == Reason::WarmupHold ||
        o.decision.reason == Reason::CooldownHold) {
      continue;
    }
    ++eligible;
    if (o.decision.action == Action::Increase) ++increases;
    if (o.decision.action == Action::Rollback) ++rollbacks;
  }

  DebaDiagnostics d;
  d.decision_aggressiveness =
      eligible == 0 ? 0.0
                    : static_cast<double>(increases - rollbacks) /
                          static_cast<double>(eligible);
  d.convergence_stability = stats::population_std(losses);
  return d;
}

std::vector<SignalFrame> profile_frames(std::span<const EpochRecord> records,
                                        const SchedulerConfig& config) {
  SchedulerState state = new_state(config, config.b_min);
  std::vector<SignalFrame> frames;
  frames.reserve(records.size());
  for (const EpochRecord& r : records) {
    frames.push_back(build_signal_frame(r, state, config));
    state.prev_loss = r.loss;
    state.prev_grad_norm = frames.back().grad_norm;
    ++state.epoch;
  }
  return frames;
}

}  // namespace deba
