// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace apl {

enum class ErrorCode {
  kFormat,
  kValidation,
  kConsistency,
  kRange,
  kDegenerateInput,
  kDegenerateDataset,
  kDegenerateBatch,
  kShape,
  kState,
  kConfig,
  kNumeric,
  kLabel,
  kInfeasibleBand,
  kTraining,
  kUsage,
  kIo,
  kCompatibility,
  kCheckInvalid,
};

/// Machine-parsable token for an error code, e.g. "format_error".
std::string_view error_code_name(ErrorCode code);

/// Every failure path in the library throws this.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace apl
