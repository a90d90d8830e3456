#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace densiflow {

/// Failure categories shared by every module. Each maps to one documented
/// error condition of an operation.
enum class ErrorCode {
    // fields / io
    GridMismatch,
    BadGrid,
    IoError,
    FormatError,
    // transport
    OutOfRange,
    NonFinite,
    NonPositiveTimes,
    WrapAround,
    DomainError,
    // solver
    BadParams,
    CFLViolation,
    PressureSolveStall,
    BoundsBreach,
    BadTestFunction,
    // functionals / stability lab
    TooFewSnapshots,
    DegenerateField,
    DegeneratePair,
    StepTooCoarse,
    // analytic
    BadTol,
    BadExponent,
    NegativeEntries,
    // configuration
    ParseError,
    ValidationError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace densiflow
