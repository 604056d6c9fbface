// SPDX-License-Identifier: Apache-2.0
#include "deba/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "deba/decision.hpp"
#include "deba/error.hpp"

namespace deba {
namespace {

/// Standard normal draws from mt19937_64 via Box-Muller. std::normal_distribution
/// is implementation-defined, this is not.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

 private:
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

void require_spec(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidSpec, what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

DynamicsSpec DynamicsSpec::three_phase(std::int64_t n_epochs, std::uint64_t seed) {
  DynamicsSpec spec;
  spec.n_epochs = n_epochs;
  spec.seed = seed;
  const auto split = [n_epochs](double f) {
    return static_cast<std::int64_t>(std::llround(f * static_cast<double>(n_epochs)));
  };
  spec.phases = {
      {split(0.3), 1e-5, 1e-6, 2.0, 0.12},
      {split(0.7), 1e-6, 1e-8, 1.2, 0.06},
      {n_epochs, 1e-8, 1e-9, 0.8, 0.03},
  };
  return spec;
}

void validate(const DynamicsSpec& spec) {
  require_spec(spec.n_epochs >= 0, "n_epochs must be non-negative");
  require_spec(std::isfinite(spec.loss_initial) && std::isfinite(spec.loss_final),
               "loss endpoints must be finite");
  require_spec(std::isfinite(spec.loss_tau) && spec.loss_tau > 0.0,
               "loss_tau must be positive");
  require_spec(finite_nonneg(spec.loss_noise), "loss_noise must be >= 0");
  require_spec(finite_nonneg(spec.variance_jitter), "variance_jitter must be >= 0");
  if (spec.n_epochs == 0) return;
  require_spec(!spec.phases.empty(), "at least one phase is required");
  std::int64_t prev_end = 0;
  for (const PhaseSpec& p : spec.phases) {
    require_spec(p.end_epoch >= prev_end, "phase boundaries must not decrease");
    require_spec(std::isfinite(p.variance_lo) && std::isfinite(p.variance_hi) &&
                     p.variance_lo > 0.0 && p.variance_lo <= p.variance_hi,
                 "phase variance band must satisfy 0 < lo <= hi");
    require_spec(finite_nonneg(p.grad_norm), "phase grad_norm must be >= 0");
    require_spec(finite_nonneg(p.norm_jitter), "phase norm_jitter must be >= 0");
    prev_end = p.end_epoch;
  }
  require_spec(prev_end >= spec.n_epochs, "phases must cover every epoch");
}

std::vector<EpochRecord> generate_trace(const DynamicsSpec& spec) {
  validate(spec);
  NormalSampler normal(spec.seed);
  std::vector<EpochRecord> records;
  records.reserve(static_cast<std::size_t>(spec.n_epochs));

  std::int64_t phase_start = 0;
  std::size_t phase_index = 0;
  for (std::int64_t t = 0; t < spec.n_epochs; ++t) {
    while (t >= spec.phases[phase_index].end_epoch) {
      phase_start = spec.phases[phase_index].end_epoch;
      ++phase_index;
    }
    const PhaseSpec& phase = spec.phases[phase_index];
    const double z_loss = normal();
    const double z_norm = normal();
    const double z_var = normal();

    const double decay = std::exp(-static_cast<double>(t) / spec.loss_tau);
    const double loss = (spec.loss_final + (spec.loss_initial - spec.loss_final) * decay) *
                        (1.0 + spec.loss_noise * z_loss);

    const double norm = phase.grad_norm * std::exp(phase.norm_jitter * z_norm);

    const double span = static_cast<double>(
        std::max<std::int64_t>(1, phase.end_epoch - phase_start - 1));
    const double frac = static_cast<double>(t - phase_start) / span;
    const double log_level = std::log(phase.variance_hi) +
                             frac * (std::log(phase.variance_lo) - std::log(phase.variance_hi));
    const double variance =
        std::clamp(std::exp(log_level + spec.variance_jitter * z_var),
                   phase.variance_lo, phase.variance_hi);

    records.push_back({t, loss, PrecomputedStats{norm, variance}});
  }
  return records;
}

std::vector<EpochRecord> all_stable_trace(std::int64_t n_epochs,
                                          double variance_decay) {
  if (n_epochs < 0) throw Error(Errc::InvalidSpec, "n_epochs must be non-negative");
  if (!(variance_decay > 0.0 && variance_decay < 1.0)) {
    throw Error(Errc::InvalidSpec, "variance_decay must be in (0, 1)");
  }
  std::vector<EpochRecord> records;
  double variance = 1e-2;
  for (std::int64_t t = 0; t < n_epochs; ++t) {
    records.push_back({t, 1.0, PrecomputedStats{1.0, variance}});
    variance *= variance_decay;
  }
  return records;
}

Schedule constant_schedule(std::int64_t n_epochs, std::int64_t batch) {
  Schedule s;
  for (std::int64_t t = 0; t < n_epochs; ++t) s.push_back({t, batch});
  return s;
}

ThroughputModel ThroughputModel::parametric(double c1, double c2) {
  if (!finite_nonneg(c1) || !finite_nonneg(c2) || (c1 == 0.0 && c2 == 0.0)) {
    throw Error(Errc::InvalidValue,
                "parametric throughput model needs finite c1, c2 >= 0, not both 0");
  }
  return ThroughputModel(Parametric{c1, c2});
}

ThroughputModel ThroughputModel::table(std::vector<TablePoint> points) {
  if (points.empty()) throw Error(Errc::InvalidValue, "empty throughput table");
  std::sort(points.begin(), points.end(),
            [](const TablePoint& a, const TablePoint& b) { return a.batch < b.batch; });
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].batch < 1 || !std::isfinite(points[i].seconds) ||
        points[i].seconds <= 0.0) {
      throw Error(Errc::InvalidValue,
                  "throughput table needs positive batches and seconds");
    }
    if (i > 0 && points[i].batch == points[i - 1].batch) {
      throw Error(Errc::InvalidValue, "duplicate batch " +
                                          std::to_string(points[i].batch) +
                                          " in throughput table");
    }
  }
  return ThroughputModel(std::move(points));
}

ThroughputModel ThroughputModel::fit_two_runs(std::span<const ScheduleEntry> run_a,
                                              double total_a,
                                              std::span<const ScheduleEntry> run_b,
                                              double total_b) {
  const auto inverse_sum = [](std::span<const ScheduleEntry> run) {
    double s = 0.0;
    for (const ScheduleEntry& e : run) {
      if (e.batch < 1) throw Error(Errc::InvalidValue, "batch must be positive");
      s += 1.0 / static_cast<double>(e.batch);
    }
    return s;
  };
  // total = n * c1 + (sum 1/B) * c2 for each run.
  const double na = static_cast<double>(run_a.size());
  const double nb = static_cast<double>(run_b.size());
  const double sa = inverse_sum(run_a);
  const double sb = inverse_sum(run_b);
  const double det = na * sb - nb * sa;
  if (std::abs(det) < 1e-12) {
    throw Error(Errc::InvalidValue, "runs do not determine a throughput model");
  }
  const double c1 = (total_a * sb - total_b * sa) / det;
  const double c2 = (na * total_b - nb * total_a) / det;
  return parametric(c1, c2);
}

Schedule reference_three_phase_schedule() {
  constexpr std::pair<std::int64_t, std::int64_t> kSteps[] = {
      {64, 8},   {96, 7},   {144, 7},   {216, 8},  {324, 13},
      {486, 13}, {729, 14}, {1093, 10}, {1639, 10}, {2048, 10},
  };
  Schedule s;
  std::int64_t t = 0;
  for (const auto& [batch, epochs] : kSteps) {
    for (std::int64_t i = 0; i < epochs; ++i) s.push_back({t++, batch});
  }
  return s;
}

ThroughputModel ThroughputModel::resnet18_cifar10() {
  const Schedule fixed = constant_schedule(100, 64);
  const Schedule adaptive = reference_three_phase_schedule();
  return fit_two_runs(fixed, 778.0, adaptive, 512.0);
}

double ThroughputModel::seconds_per_epoch(std::int64_t batch) const {
  if (batch < 1) {
    throw Error(Errc::ModelDomainError, "batch " + std::to_string(batch) +
                                            " is not positive");
  }
  if (const auto* p = std::get_if<Parametric>(&model_)) {
    return p->c1 + p->c2 / static_cast<double>(batch);
  }
  const auto& pts = std::get<std::vector<TablePoint>>(model_);
  if (batch < pts.front().batch || batch > pts.back().batch) {
    throw Error(Errc::ModelDomainError,
                "batch " + std::to_string(batch) + " outside throughput table [" +
                    std::to_string(pts.front().batch) + ", " +
                    std::to_string(pts.back().batch) + "]");
  }
  const auto hi = std::lower_bound(
      pts.begin(), pts.end(), batch,
      [](const TablePoint& p, std::int64_t b) { return p.batch < b; });
  if (hi->batch == batch) return hi->seconds;
  const auto lo = hi - 1;
  const double w = static_cast<double>(batch - lo->batch) /
                   static_cast<double>(hi->batch - lo->batch);
  return lo->seconds + w * (hi->seconds - lo->seconds);
}

double estimate_walltime(std::span<const ScheduleEntry> schedule,
                         const ThroughputModel& model) {
  double total = 0.0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].epoch != static_cast<std::int64_t>(i)) {
      throw Error(Errc::NonContiguousEpochs,
                  "schedule must cover epochs 0..n-1 in order; entry " +
                      std::to_string(i) + " has epoch " +
                      std::to_string(schedule[i].epoch));
    }
    total += model.seconds_per_epoch(schedule[i].batch);
  }
  return total;
}

ReplayResult replay(std::span<const EpochRecord> records,
                    const SchedulerConfig& config, std::int64_t initial_batch,
                    const std::optional<ThroughputModel>& model) {
  SchedulerState state = new_state(config, initial_batch);
  ReplayResult result;
  result.schedule.reserve(records.size());
  for (const EpochRecord& r : records) {
    const StepOutcome o = step(state, r, config);
    result.schedule.push_back({o.frame.epoch, o.batch_before});
  }
  result.log = std::move(state.decision_log);
  if (model) {
    SpeedupEstimate est;
    est.fixed_seconds = estimate_walltime(
        constant_schedule(static_cast<std::int64_t>(records.size()), initial_batch),
        *model);
    est.adaptive_seconds = estimate_walltime(result.schedule, *model);
    est.speedup = est.fixed_seconds > 0.0
                      ? (est.fixed_seconds - est.adaptive_seconds) / est.fixed_seconds
                      : 0.0;
    result.speedup = est;
  }
  return result;
}

std::size_t count_adaptations(const DecisionLog& log) noexcept {
  return static_cast<std::size_t>(std::count_if(
      log.begin(), log.end(),
      [](const StepOutcome& o) { return o.decision.action != Action::Hold; }));
}

namespace {

struct ThresholdPreset {
  std::string_view name;
  double theta_stab;
  double theta_conf;
};

// Per-architecture thresholds from baseline profiling, plus the universal pair.
constexpr ThresholdPreset kThresholdPresets[] = {
    {"mobilenet-v3", 0.25, 0.5},  {"efficientnet-b0", 0.60, 0.8},
    {"resnet-18", 0.55, 0.6},     {"resnet-50", 12.0, 0.8},
    {"densenet-121", 0.55, 0.6},  {"vit-b16", 0.40, 0.7},
    {"universal-thresholds", 0.1, 0.5},
};

}  // namespace

std::vector<std::string_view> preset_names() {
  std::vector<std::string_view> names;
  for (const auto& p : kThresholdPresets) names.push_back(p.name);
  for (std::string_view n : {"cooldown-2", "cooldown-5", "cooldown-10", "full-history"}) {
    names.push_back(n);
  }
  return names;
}

std::optional<SchedulerConfig> apply_preset(std::string_view name,
                                            SchedulerConfig base) {
  for (const auto& p : kThresholdPresets) {
    if (p.name == name) {
      base.theta_stab = p.theta_stab;
      base.theta_conf = p.theta_conf;
      return base;
    }
  }
  if (name == "cooldown-2") base.cooldown_epochs = 2;
  else if (name == "cooldown-5") base.cooldown_epochs = 5;
  else if (name == "cooldown-10") base.cooldown_epochs = 10;
  else if (name == "full-history") base.stats_mode = StatsMode::FullHistory;
  else return std::nullopt;
  return base;
}

}  // namespace deba
