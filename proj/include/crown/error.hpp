#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crown {

enum class ErrorCode {
    DimensionMismatch,
    InvalidInput,
    SingularFactorGram,
    NonConvergence,
    DegenerateResidual,
    SingularFactorCov,
    SingularBracket,
    NotPositiveDefinite,
    DegenerateDenominator,
    DegenerateSpread,
    DegenerateDirection,
    EmptyComplement,
    NegativeQuadraticForm,
    ZeroRisk,
    ZeroOracleRisk,
    ZeroOracleSR,
    AlignmentError,
    SeriesTooShort,
    NonStationary,
    ParseError,
    DateMisalignment,
    ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::SingularFactorGram: return "SingularFactorGram";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::DegenerateResidual: return "DegenerateResidual";
        case ErrorCode::SingularFactorCov: return "SingularFactorCov";
        case ErrorCode::SingularBracket: return "SingularBracket";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::DegenerateSpread: return "DegenerateSpread";
        case ErrorCode::DegenerateDirection: return "DegenerateDirection";
        case ErrorCode::EmptyComplement: return "EmptyComplement";
        case ErrorCode::NegativeQuadraticForm: return "NegativeQuadraticForm";
        case ErrorCode::ZeroRisk: return "ZeroRisk";
        case ErrorCode::ZeroOracleRisk: return "ZeroOracleRisk";
        case ErrorCode::ZeroOracleSR: return "ZeroOracleSR";
        case ErrorCode::AlignmentError: return "AlignmentError";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::NonStationary: return "NonStationary";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DateMisalignment: return "DateMisalignment";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace crown
