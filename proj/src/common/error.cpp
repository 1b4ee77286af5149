// SPDX-License-Identifier: Apache-2.0

#include "apl/common/error.hpp"

namespace apl {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return "format_error";
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kConsistency: return "consistency_error";
    case ErrorCode::kRange: return "range_error";
    case ErrorCode::kDegenerateInput: return "degenerate_input_error";
    case ErrorCode::kDegenerateDataset: return "degenerate_dataset_error";
    case ErrorCode::kDegenerateBatch: return "degenerate_batch_error";
    case ErrorCode::kShape: return "shape_error";
    case ErrorCode::kState: return "state_error";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kNumeric: return "numeric_error";
    case ErrorCode::kLabel: return "label_error";
    case ErrorCode::kInfeasibleBand: return "infeasible_band_error";
    case ErrorCode::kTraining: return "training_error";
    case ErrorCode::kUsage: return "usage_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kCompatibility: return "compatibility_error";
    case ErrorCode::kCheckInvalid: return "check_invalid";
  }
  return "unknown_error";
}

}  // namespace apl
