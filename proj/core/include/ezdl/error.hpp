#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ezdl {

enum class ErrorKind {
    // sparseness / projection
    ZeroVector,
    DimensionTooSmall,
    OutOfRange,
    InfeasibleSupport,
    EmptySupport,
    NonUniqueProjection,
    InvalidTarget,
    NumericalInconsistency,
    DegenerateGradient,
    MaxRoundsExceeded,
    // linalg
    ConvergenceFailure,
    NotSymmetric,
    DimensionMismatch,
    // learning
    ZeroResponse,
    ZeroVariance,
    InsufficientData,
    InvalidConfig,
    // imaging and file formats
    MalformedHeader,
    UnsupportedMaxval,
    TruncatedData,
    InsufficientVariance,
    RankDeficient,
    TooSmall,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one ErrorKind so callers and
/// tests can branch on the cause without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
        case ErrorKind::ZeroVector: return "ZeroVector";
        case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::InfeasibleSupport: return "InfeasibleSupport";
        case ErrorKind::EmptySupport: return "EmptySupport";
        case ErrorKind::NonUniqueProjection: return "NonUniqueProjection";
        case ErrorKind::InvalidTarget: return "InvalidTarget";
        case ErrorKind::NumericalInconsistency: return "NumericalInconsistency";
        case ErrorKind::DegenerateGradient: return "DegenerateGradient";
        case ErrorKind::MaxRoundsExceeded: return "MaxRoundsExceeded";
        case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorKind::NotSymmetric: return "NotSymmetric";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ZeroResponse: return "ZeroResponse";
        case ErrorKind::ZeroVariance: return "ZeroVariance";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::MalformedHeader: return "MalformedHeader";
        case ErrorKind::UnsupportedMaxval: return "UnsupportedMaxval";
        case ErrorKind::TruncatedData: return "TruncatedData";
        case ErrorKind::InsufficientVariance: return "InsufficientVariance";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::TooSmall: return "TooSmall";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

} // namespace ezdl
