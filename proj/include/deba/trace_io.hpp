// SPDX-License-Identifier: Apache-2.0
//
// Text formats shared by the CLI, the simulator and the bindings:
//
//   trace         "deba-trace v1" header, key: value lines, a column line, then
//                 one comma-separated record per epoch
//   decision log  "deba-decisions v1" header, column line, one row per epoch
//   config        key = value lines, '#' comments
//   state         JSON checkpoint of a SchedulerState
//
// Reals are written in shortest round-trip form with std::to_chars and parsed
// with std::from_chars, so the output does not depend on the C locale.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deba/types.hpp"

namespace deba {

inline constexpr std::string_view kTraceMagic = "deba-trace";
inline constexpr std::string_view kDecisionLogMagic = "deba-decisions";
inline constexpr int kFormatVersion = 1;

inline constexpr std::string_view kPrecomputedColumns =
    "epoch,loss,grad_norm,grad_variance";
inline constexpr std::string_view kRawInlineColumns = "epoch,loss,gradient";
inline constexpr std::string_view kRawSidecarColumns = "epoch,loss";
inline constexpr std::string_view kDecisionLogColumns =
    "epoch,grad_variance,grad_norm,grad_norm_variation,loss_variation,"
    "confidence,stable_gradients,stable_loss,decision,reason,batch_before,"
    "batch_after";

enum class StatsConvention { Precomputed, Raw };

struct TraceHeader {
  int version = kFormatVersion;
  std::string producer;
  StatsConvention stats = StatsConvention::Precomputed;
  std::optional<std::int64_t> initial_batch;
  /// Raw mode only: binary file of length-prefixed little-endian float64
  /// vectors, one per record, relative to the trace's directory.
  std::optional<std::string> sidecar;
};

struct Trace {
  TraceHeader header;
  std::vector<EpochRecord> records;
};

std::string format_real(double value);
std::optional<double> parse_real(std::string_view text) noexcept;

/// Parses a trace. sidecar_dir resolves a relative sidecar path.
Trace parse_trace(std::istream& in,
                  const std::filesystem::path& sidecar_dir = {});
Trace read_trace(const std::filesystem::path& path);

/// Writes a trace. In raw mode with a sidecar set, the gradients go to the
/// sidecar next to path.
void write_trace(const Trace& trace, const std::filesystem::path& path);

void write_sidecar(std::span<const EpochRecord> records,
                   const std::filesystem::path& path);

std::string format_decision_log(const DecisionLog& log);
DecisionLog parse_decision_log(std::istream& in);
void write_decision_log(const DecisionLog& log,
                        const std::filesystem::path& path);
DecisionLog read_decision_log(const std::filesystem::path& path);

/// Key-value config text. theta_stab/theta_conf carry calibrated thresholds;
/// comments are emitted as leading '#' lines.
std::string format_config(const SchedulerConfig& config,
                          std::span<const std::string> comments = {});
SchedulerConfig parse_config(std::istream& in);
void write_config(const SchedulerConfig& config,
                  const std::filesystem::path& path,
                  std::span<const std::string> comments = {});
SchedulerConfig read_config(const std::filesystem::path& path);

std::string serialize_state(const SchedulerState& state);
SchedulerState deserialize_state(std::string_view text);

/// Writes text to path, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace deba
