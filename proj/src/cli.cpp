// SPDX-License-Identifier: Apache-2.0
#include "deba/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "deba/decision.hpp"
#include "deba/profiler.hpp"
#include "deba/sim.hpp"
#include "deba/trace_io.hpp"

namespace deba::cli {

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::BadArguments: return kBadArguments;
    case Errc::ParseError: return kParseError;
    case Errc::UnknownVersion: return kUnknownVersion;
    case Errc::UnknownKey: return kUnknownKey;
    case Errc::MissingKey: return kMissingKey;
    case Errc::InvalidValue: return kInvalidValue;
    case Errc::InvalidConfig: return kInvalidConfig;
    case Errc::NonContiguousEpochs: return kNonContiguousEpochs;
    case Errc::NonFiniteValue:
    case Errc::NonFiniteInput: return kNonFiniteValue;
    case Errc::DegenerateGradient: return kDegenerateGradient;
    case Errc::InsufficientEpochs: return kInsufficientEpochs;
    case Errc::EmptyInput:
    case Errc::EmptyWindow: return kEmptyInput;
    case Errc::InitialBatchOutOfBounds: return kInitialBatchOutOfBounds;
    case Errc::ModelDomainError: return kModelDomainError;
    case Errc::InvalidSpec: return kInvalidSpec;
    case Errc::EpochMismatch: return kEpochMismatch;
    case Errc::DegenerateCalibration: return kDegenerateCalibration;
    case Errc::ClosedHandle: return kInternalError;
    case Errc::IoError: return kIoError;
  }
  return kInternalError;
}

namespace {

constexpr std::int64_t kDefaultInitialBatch = 64;

struct ConfigOptions {
  std::string config_path;
  std::vector<std::string> presets;
  std::string stats_mode;
  std::optional<std::int64_t> cooldown;
};

void add_config_options(CLI::App& cmd, ConfigOptions& o, bool config_required) {
  auto* opt = cmd.add_option("--config", o.config_path, "Scheduler config file");
  if (config_required) opt->required();
  cmd.add_option("--preset", o.presets,
                 "Named preset applied on top of the config (repeatable)");
  cmd.add_option("--stats-mode", o.stats_mode,
                 "Override statistics mode: sliding_window | full_history");
  cmd.add_option("--cooldown", o.cooldown, "Override cooldown epochs");
}

std::string preset_list() {
  std::string out;
  for (std::string_view n : preset_names()) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

SchedulerConfig load_config(const ConfigOptions& o) {
  SchedulerConfig c = o.config_path.empty() ? SchedulerConfig{} : read_config(o.config_path);
  for (const std::string& name : o.presets) {
    auto applied = apply_preset(name, c);
    if (!applied) {
      throw Error(Errc::BadArguments,
                  "unknown preset '" + name + "'; valid presets: " + preset_list());
    }
    c = *applied;
  }
  if (!o.stats_mode.empty()) {
    const auto mode = parse_stats_mode(o.stats_mode);
    if (!mode) {
      throw Error(Errc::BadArguments,
                  "--stats-mode must be sliding_window or full_history");
    }
    c.stats_mode = *mode;
  }
  if (o.cooldown) c.cooldown_epochs = *o.cooldown;
  validate(c);
  return c;
}

std::optional<ThroughputModel> parse_model(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "resnet18-cifar10") return ThroughputModel::resnet18_cifar10();
  if (text.rfind("parametric:", 0) == 0) {
    const std::string rest = text.substr(11);
    const auto comma = rest.find(',');
    const auto c1 = parse_real(rest.substr(0, comma));
    const auto c2 = comma == std::string::npos ? std::nullopt
                                               : parse_real(rest.substr(comma + 1));
    if (!c1 || !c2) {
      throw Error(Errc::BadArguments, "expected --throughput-model parametric:C1,C2");
    }
    return ThroughputModel::parametric(*c1, *c2);
  }
  if (text.rfind("table:", 0) == 0) {
    // CSV with a "batch,seconds" header.
    std::istringstream in(read_text_file(text.substr(6)));
    std::string line;
    std::vector<ThroughputModel::TablePoint> points;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
      ++ln;
      if (line.empty() || line[0] == '#' || line.rfind("batch", 0) == 0) continue;
      const auto comma = line.find(',');
      const auto batch = parse_real(line.substr(0, comma));
      const auto secs = comma == std::string::npos ? std::nullopt
                                                   : parse_real(line.substr(comma + 1));
      if (!batch || !secs || *batch != std::floor(*batch)) {
        throw ParseError(Errc::ParseError, ln, 0, "expected 'batch,seconds'");
      }
      points.push_back({static_cast<std::int64_t>(*batch), *secs});
    }
    return ThroughputModel::table(std::move(points));
  }
  throw Error(Errc::BadArguments,
              "unknown --throughput-model '" + text +
                  "'; use resnet18-cifar10, parametric:C1,C2 or table:PATH");
}

std::int64_t initial_batch_for(const std::optional<std::int64_t>& flag,
                               const TraceHeader& header) {
  if (flag) return *flag;
  return header.initial_batch.value_or(kDefaultInitialBatch);
}

std::string format_schedule(const Schedule& schedule) {
  std::ostringstream out;
  out << "epoch,batch\n";
  for (const ScheduleEntry& e : schedule) out << e.epoch << ',' << e.batch << '\n';
  return out.str();
}

std::string format_series(std::span<const EpochRecord> records,
                          const DecisionLog& log) {
  std::ostringstream out;
  out << "epoch,batch,loss,grad_norm,grad_variance,confidence,decision\n";
  for (std::size_t i = 0; i < log.size(); ++i) {
    const StepOutcome& o = log[i];
    out << o.frame.epoch << ',' << o.batch_before << ','
        << format_real(records[i].loss) << ',' << format_real(o.frame.grad_norm)
        << ',' << format_real(o.frame.grad_variance) << ','
        << format_real(o.frame.confidence) << ',' << action_name(o.decision.action)
        << '\n';
  }
  return out.str();
}

/// Epochs where the batch changed, as "epoch:batch" pairs.
std::string change_points(const Schedule& schedule) {
  std::string out;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0 && schedule[i].batch == schedule[i - 1].batch) continue;
    if (!out.empty()) out += ' ';
    out += std::to_string(schedule[i].epoch) + ":" + std::to_string(schedule[i].batch);
  }
  return out;
}

void print_run_summary(std::ostream& out, std::span<const EpochRecord> records,
                       const ReplayResult& r, std::int64_t initial_batch) {
  std::size_t inc = 0, roll = 0, rule_hold = 0, cool = 0, warm = 0;
  for (const StepOutcome& o : r.log) {
    switch (o.decision.reason) {
      case Reason::RuleIncrease: ++inc; break;
      case Reason::RuleRollbackConfidence:
      case Reason::RuleRollbackGradSpike: ++roll; break;
      case Reason::RuleHold: ++rule_hold; break;
      case Reason::CooldownHold: ++cool; break;
      case Reason::WarmupHold: ++warm; break;
    }
  }
  const std::int64_t final_batch = r.log.empty() ? initial_batch : r.log.back().batch_after;
  out << "epochs: " << r.log.size() << '\n'
      << "initial_batch: " << initial_batch << '\n'
      << "final_batch: " << final_batch << '\n'
      << "adaptations: " << inc + roll << " (increase " << inc << ", rollback "
      << roll << ")\n"
      << "holds: rule " << rule_hold << ", cooldown " << cool << ", warmup " << warm
      << '\n'
      << "schedule: " << change_points(r.schedule) << '\n';
  if (!r.log.empty()) {
    std::vector<double> losses;
    for (const EpochRecord& rec : records) losses.push_back(rec.loss);
    const DebaDiagnostics d = deba_diagnostics(r.log, losses);
    out << "decision_aggressiveness: " << format_real(d.decision_aggressiveness) << '\n'
        << "convergence_stability: " << format_real(d.convergence_stability) << '\n';
  }
  if (r.speedup) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.4f (fixed %.2f s, adaptive %.2f s)",
                  r.speedup->speedup, r.speedup->fixed_seconds,
                  r.speedup->adaptive_seconds);
    out << "speedup: " << buf << '\n';
  }
}

struct OutputOptions {
  std::string log_path;
  std::string schedule_path;
  std::string series_path;
};

void add_output_options(CLI::App& cmd, OutputOptions& o) {
  cmd.add_option("--out", o.log_path, "Decision log output path");
  cmd.add_option("--schedule-out", o.schedule_path,
                 "Batch schedule output path (epoch,batch)");
  cmd.add_option("--series-out", o.series_path,
                 "Per-epoch series for plotting (batch, loss, signals)");
}

void write_outputs(const OutputOptions& o, std::span<const EpochRecord> records,
                   const ReplayResult& r) {
  if (!o.log_path.empty()) write_decision_log(r.log, o.log_path);
  if (!o.schedule_path.empty()) write_text_file(o.schedule_path, format_schedule(r.schedule));
  if (!o.series_path.empty()) write_text_file(o.series_path, format_series(records, r.log));
}

std::vector<StabilityProfile> profile_traces(const std::vector<Trace>& traces,
                                             const SchedulerConfig& config,
                                             std::size_t jobs) {
  std::vector<StabilityProfile> profiles(traces.size());
  std::vector<std::exception_ptr> errors(traces.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < traces.size(); i = next++) {
      try {
        profiles[i] = stability_score(profile_frames(traces[i].records, config));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, traces.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return profiles;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Adaptive batch-size scheduler: replay, profile, calibrate, simulate",
               "deba"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "deba 0.1.0");

  // run
  std::string run_trace;
  ConfigOptions run_cfg;
  OutputOptions run_out;
  std::string run_model;
  std::optional<std::int64_t> run_batch;
  auto* run_cmd = app.add_subcommand("run", "Replay a trace through the scheduler");
  run_cmd->add_option("--trace", run_trace, "Epoch trace")->required();
  add_config_options(*run_cmd, run_cfg, true);
  add_output_options(*run_cmd, run_out);
  run_cmd->add_option("--throughput-model", run_model,
                      "resnet18-cifar10 | parametric:C1,C2 | table:PATH");
  run_cmd->add_option("--initial-batch", run_batch,
                      "Starting batch (default: trace header, else 64)");

  // profile
  std::vector<std::string> prof_traces;
  ConfigOptions prof_cfg;
  std::string prof_out;
  std::size_t prof_jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* prof_cmd = app.add_subcommand(
      "profile", "Stability profile of fixed-batch traces (one per seed)");
  prof_cmd->add_option("--trace", prof_traces, "Fixed-batch trace (repeatable)")
      ->required();
  add_config_options(*prof_cmd, prof_cfg, false);
  prof_cmd->add_option("--out", prof_out, "Write the profile report here");
  prof_cmd->add_option("--jobs", prof_jobs, "Worker threads")->check(CLI::PositiveNumber);

  // calibrate
  std::string cal_trace;
  ConfigOptions cal_cfg;
  std::string cal_out;
  auto* cal_cmd = app.add_subcommand(
      "calibrate", "Derive thresholds from a fixed-batch trace and write a config");
  cal_cmd->add_option("--trace", cal_trace, "Fixed-batch trace")->required();
  add_config_options(*cal_cmd, cal_cfg, false);
  cal_cmd->add_option("--out", cal_out, "Output config path")->required();

  // simulate
  std::uint64_t sim_seed = 0;
  std::int64_t sim_epochs = 100;
  ConfigOptions sim_cfg;
  OutputOptions sim_out;
  std::string sim_trace_out;
  std::string sim_model = "resnet18-cifar10";
  std::optional<std::int64_t> sim_batch;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Generate a synthetic three-phase trace and replay it");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed")->required();
  sim_cmd->add_option("--epochs", sim_epochs, "Number of epochs")
      ->check(CLI::NonNegativeNumber);
  add_config_options(*sim_cmd, sim_cfg, false);
  add_output_options(*sim_cmd, sim_out);
  sim_cmd->add_option("--trace-out", sim_trace_out, "Write the generated trace here");
  sim_cmd->add_option("--throughput-model", sim_model,
                      "resnet18-cifar10 | parametric:C1,C2 | table:PATH");
  sim_cmd->add_option("--initial-batch", sim_batch, "Starting batch (default 64)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: BadArguments: " << e.what() << '\n';
    return kBadArguments;
  }

  try {
    if (*run_cmd) {
      const SchedulerConfig config = load_config(run_cfg);
      const auto model = parse_model(run_model);
      const Trace trace = read_trace(run_trace);
      const std::int64_t b0 = initial_batch_for(run_batch, trace.header);
      const ReplayResult r = replay(trace.records, config, b0, model);
      write_outputs(run_out, trace.records, r);
      print_run_summary(out, trace.records, r, b0);
    } else if (*prof_cmd) {
      const SchedulerConfig config = load_config(prof_cfg);
      std::vector<Trace> traces;
      for (const std::string& p : prof_traces) traces.push_back(read_trace(p));
      const auto profiles = profile_traces(traces, config, prof_jobs);
      const SeedAggregate agg = aggregate_seeds(profiles);
      std::ostringstream report;
      for (std::size_t i = 0; i < profiles.size(); ++i) {
        const StabilityProfile& p = profiles[i];
        report << "trace " << prof_traces[i] << ": S=" << format_real(p.stability_score)
               << " cv_grad_variance=" << format_real(p.cv_grad_variance)
               << " mean_grad_norm_variation=" << format_real(p.mean_grad_norm_variation)
               << " mean_loss_variation=" << format_real(p.mean_loss_variation)
               << " epochs=" << p.n_epochs << '\n';
      }
      report << "aggregate: mu_S=" << format_real(agg.mu_s)
             << " sigma_S=" << format_real(agg.sigma_s) << " seeds=" << agg.n_seeds
             << " class=" << taxonomy_name(agg.taxonomy) << '\n';
      out << report.str();
      if (!prof_out.empty()) write_text_file(prof_out, report.str());
    } else if (*cal_cmd) {
      SchedulerConfig config = load_config(cal_cfg);
      const Trace trace = read_trace(cal_trace);
      const CalibratedThresholds th =
          calibrate_thresholds(profile_frames(trace.records, config));
      config.theta_stab = th.theta_stab;
      config.theta_conf = th.theta_conf;
      validate(config);
      const std::vector<std::string> comments = {
          "calibrated from " + cal_trace + " (" + std::to_string(trace.records.size()) +
          " epochs)",
          "theta_stab: 75th percentile of gradient-norm variation",
          "theta_conf: median confidence score"};
      write_config(config, cal_out, comments);
      out << "theta_stab: " << format_real(th.theta_stab) << '\n'
          << "theta_conf: " << format_real(th.theta_conf) << '\n'
          << "config: " << cal_out << '\n';
    } else if (*sim_cmd) {
      const SchedulerConfig config = load_config(sim_cfg);
      const auto model = parse_model(sim_model);
      const DynamicsSpec spec = DynamicsSpec::three_phase(sim_epochs, sim_seed);
      Trace trace;
      trace.header.producer = "deba simulate seed=" + std::to_string(sim_seed);
      trace.header.initial_batch = sim_batch.value_or(kDefaultInitialBatch);
      trace.records = generate_trace(spec);
      if (!sim_trace_out.empty()) write_trace(trace, sim_trace_out);
      const ReplayResult r =
          replay(trace.records, config, *trace.header.initial_batch, model);
      write_outputs(sim_out, trace.records, r);
      out << "seed: " << sim_seed << '\n';
      std::int64_t start = 0;
      static constexpr std::string_view kPhase[] = {"explore", "stabilize", "large-batch"};
      for (std::size_t i = 0; i < spec.phases.size(); ++i) {
        const std::int64_t end = spec.phases[i].end_epoch;
        if (end > start) {
          out << "phase " << kPhase[i] << " (epochs " << start << "-" << end - 1
              << "): batch " << r.schedule[start].batch << " -> "
              << r.log[end - 1].batch_after << '\n';
        }
        start = end;
      }
      print_run_summary(out, trace.records, r, *trace.header.initial_batch);
    }
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kInternalError;
  }
  return kOk;
}

}  // namespace deba::cli
