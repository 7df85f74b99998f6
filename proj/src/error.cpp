#include "cardiotox/error.hpp"

namespace cardiotox {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::io_error: return "IO_ERROR";
    case ErrorCode::malformed_row: return "MALFORMED_ROW";
    case ErrorCode::unknown_patient: return "UNKNOWN_PATIENT";
    case ErrorCode::duplicate_patient: return "DUPLICATE_PATIENT";
    case ErrorCode::unknown_feature: return "UNKNOWN_FEATURE";
    case ErrorCode::dimension_mismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::bad_k: return "BAD_K";
    case ErrorCode::one_class_only: return "ONE_CLASS_ONLY";
    case ErrorCode::invalid_spec: return "INVALID_SPEC";
    case ErrorCode::separation_detected: return "SEPARATION_DETECTED";
    case ErrorCode::singular_information: return "SINGULAR_INFORMATION";
    case ErrorCode::not_converged: return "NOT_CONVERGED";
    case ErrorCode::degenerate_outcome: return "DEGENERATE_OUTCOME";
    case ErrorCode::too_few_rows: return "TOO_FEW_ROWS";
    case ErrorCode::zero_se: return "ZERO_SE";
    case ErrorCode::missing_arm: return "MISSING_ARM";
    case ErrorCode::empty_cohort_mean: return "EMPTY_COHORT_MEAN";
    case ErrorCode::too_many_boot_failures: return "TOO_MANY_BOOT_FAILURES";
    case ErrorCode::config_error: return "CONFIG_ERROR";
    }
    return "UNKNOWN";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::io_error:
    case ErrorCode::malformed_row:
    case ErrorCode::unknown_patient:
    case ErrorCode::duplicate_patient:
    case ErrorCode::invalid_spec:
        return 2;
    case ErrorCode::unknown_feature:
    case ErrorCode::bad_k:
    case ErrorCode::config_error:
        return 4;
    default:
        return 3;
    }
}

}  // namespace cardiotox
