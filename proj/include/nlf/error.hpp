#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlf {

enum class ErrorCode {
    MalformedRow,
    NonMonotonic,
    GridMisaligned,
    EmptySeries,
    Upsample,
    InvertedRange,
    InsufficientHistory,
    EmptyRange,
    InvalidForecast,
    EmptyEnsemble,
    NonFinite,
    LevelOrder,
    LengthMismatch,
    NegativeScore,
    DegenerateReference,
    TimepointMismatch,
    EmptyDay,
    EmptyInput,
    ConfigInvalid,
    InvalidFilter,
    UnknownPenetration,
    StoreInvalid,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotonic: return "NonMonotonic";
    case ErrorCode::GridMisaligned: return "GridMisaligned";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::Upsample: return "Upsample";
    case ErrorCode::InvertedRange: return "InvertedRange";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::InvalidForecast: return "InvalidForecast";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::LevelOrder: return "LevelOrder";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NegativeScore: return "NegativeScore";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::TimepointMismatch: return "TimepointMismatch";
    case ErrorCode::EmptyDay: return "EmptyDay";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::InvalidFilter: return "InvalidFilter";
    case ErrorCode::UnknownPenetration: return "UnknownPenetration";
    case ErrorCode::StoreInvalid: return "StoreInvalid";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure in the library is reported as an `nlf::Error` carrying a
/// machine-checkable code; `what()` is "<Code>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace nlf
