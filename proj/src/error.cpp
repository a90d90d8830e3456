#include "densiflow/error.hpp"

namespace densiflow {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::BadGrid: return "BadGrid";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NonPositiveTimes: return "NonPositiveTimes";
        case ErrorCode::WrapAround: return "WrapAround";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::BadParams: return "BadParams";
        case ErrorCode::CFLViolation: return "CFLViolation";
        case ErrorCode::PressureSolveStall: return "PressureSolveStall";
        case ErrorCode::BoundsBreach: return "BoundsBreach";
        case ErrorCode::BadTestFunction: return "BadTestFunction";
        case ErrorCode::TooFewSnapshots: return "TooFewSnapshots";
        case ErrorCode::DegenerateField: return "DegenerateField";
        case ErrorCode::DegeneratePair: return "DegeneratePair";
        case ErrorCode::StepTooCoarse: return "StepTooCoarse";
        case ErrorCode::BadTol: return "BadTol";
        case ErrorCode::BadExponent: return "BadExponent";
        case ErrorCode::NegativeEntries: return "NegativeEntries";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace densiflow
