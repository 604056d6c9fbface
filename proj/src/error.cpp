// SPDX-License-Identifier: Apache-2.0
#include "deba/error.hpp"

#include <string>

namespace deba {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InitialBatchOutOfBounds: return "InitialBatchOutOfBounds";
    case Errc::DegenerateGradient: return "DegenerateGradient";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::EpochMismatch: return "EpochMismatch";
    case Errc::InsufficientEpochs: return "InsufficientEpochs";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DegenerateCalibration: return "DegenerateCalibration";
    case Errc::ParseError: return "ParseError";
    case Errc::NonContiguousEpochs: return "NonContiguousEpochs";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::UnknownVersion: return "UnknownVersion";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::MissingKey: return "MissingKey";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::ModelDomainError: return "ModelDomainError";
    case Errc::ClosedHandle: return "ClosedHandle";
    case Errc::BadArguments: return "BadArguments";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view config_field_name(ConfigField field) noexcept {
  switch (field) {
    case ConfigField::ThetaStab: return "theta_stab";
    case ConfigField::ThetaConf: return "theta_conf";
    case ConfigField::AlphaGrow: return "alpha_grow";
    case ConfigField::AlphaRoll: return "alpha_roll";
    case ConfigField::BatchMin: return "b_min";
    case ConfigField::BatchMax: return "b_max";
    case ConfigField::BatchBounds: return "b_min/b_max";
    case ConfigField::CooldownEpochs: return "cooldown_epochs";
    case ConfigField::WindowLen: return "window_len";
    case ConfigField::Epsilon: return "epsilon";
  }
  return "unknown";
}

namespace {

std::string located(std::size_t line, std::size_t column,
                    const std::string& what) {
  std::string out = "line " + std::to_string(line);
  if (column > 0) out += ", column " + std::to_string(column);
  return out + ": " + what;
}

}  // namespace

ParseError::ParseError(Errc code, std::size_t line, std::size_t column,
                       const std::string& what)
    : Error(code, located(line, column, what)), line_(line), column_(column) {}

}  // namespace deba
