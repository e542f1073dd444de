#include "volnet/error.hpp"

namespace volnet {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicateDate: return "DuplicateDate";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::EmptyIntersection: return "EmptyIntersection";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::NonPositivePrice: return "NonPositivePrice";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::MissingInstrument: return "MissingInstrument";
    case ErrorKind::ConstantColumn: return "ConstantColumn";
    case ErrorKind::EmptyTrain: return "EmptyTrain";
    case ErrorKind::EmptyTest: return "EmptyTest";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::ConstantVector: return "ConstantVector";
    case ErrorKind::ZeroActual: return "ZeroActual";
    case ErrorKind::TooFew: return "TooFew";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::NumericalDivergence: return "NumericalDivergence";
    case ErrorKind::LineSearchFail: return "LineSearchFail";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::NumericalDivergence:
    case ErrorKind::LineSearchFail:
    case ErrorKind::DegenerateVariance:
        return ErrorCategory::Numerical;
    case ErrorKind::InvalidArgument:
    case ErrorKind::ConfigError:
        return ErrorCategory::Usage;
    default:
        return ErrorCategory::Data;
    }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind)
{
}

}  // namespace volnet
