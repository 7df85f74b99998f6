#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cardiotox {

enum class ErrorCode {
    // input / validation
    io_error,
    malformed_row,
    unknown_patient,
    duplicate_patient,
    unknown_feature,
    dimension_mismatch,
    bad_k,
    one_class_only,
    invalid_spec,
    // statistical
    separation_detected,
    singular_information,
    not_converged,
    degenerate_outcome,
    too_few_rows,
    zero_se,
    missing_arm,
    empty_cohort_mean,
    too_many_boot_failures,
    // configuration
    config_error,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for a failure of the given kind:
/// 2 input/validation, 3 statistical, 4 configuration.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

    ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix, for re-wrapping with more context.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace cardiotox
