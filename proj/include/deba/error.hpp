// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace deba {

enum class Errc {
  InvalidConfig,
  InitialBatchOutOfBounds,
  DegenerateGradient,
  NonFiniteInput,
  EmptyWindow,
  EpochMismatch,
  InsufficientEpochs,
  EmptyInput,
  DegenerateCalibration,
  ParseError,
  NonContiguousEpochs,
  NonFiniteValue,
  UnknownVersion,
  UnknownKey,
  MissingKey,
  InvalidValue,
  InvalidSpec,
  ModelDomainError,
  ClosedHandle,
  BadArguments,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

/// Base of every error raised by the library. The code identifies the failure
/// class; the message is a single human-readable line.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

enum class ConfigField {
  ThetaStab,
  ThetaConf,
  AlphaGrow,
  AlphaRoll,
  BatchMin,
  BatchMax,
  BatchBounds,
  CooldownEpochs,
  WindowLen,
  Epsilon,
};

std::string_view config_field_name(ConfigField field) noexcept;

/// Rejected SchedulerConfig; names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(ConfigField field, const std::string& message)
      : Error(Errc::InvalidConfig, message), field_(field) {}

  ConfigField field() const noexcept { return field_; }

 private:
  ConfigField field_;
};

/// Malformed text input. Line and column are 1-based; column 0 means the whole
/// line.
class ParseError : public Error {
 public:
  ParseError(Errc code, std::size_t line, std::size_t column,
             const std::string& what);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace deba
