// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "deba/error.hpp"

namespace deba::cli {

enum ExitCode : int {
  kOk = 0,
  kBadArguments = 2,
  kParseError = 3,
  kUnknownVersion = 4,
  kUnknownKey = 5,
  kMissingKey = 6,
  kInvalidValue = 7,
  kInvalidConfig = 8,
  kNonContiguousEpochs = 9,
  kNonFiniteValue = 10,
  kDegenerateGradient = 11,
  kInsufficientEpochs = 12,
  kEmptyInput = 13,
  kInitialBatchOutOfBounds = 14,
  kModelDomainError = 15,
  kInvalidSpec = 16,
  kEpochMismatch = 17,
  kDegenerateCalibration = 18,
  kInternalError = 19,
  kIoError = 20,
};

int exit_code_for(Errc code) noexcept;

/// Runs the command line (args excludes the program name). Summaries go to
/// out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace deba::cli
