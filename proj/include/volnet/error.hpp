#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace volnet {

/// Every failure the library reports carries one of these kinds.
enum class ErrorKind {
    // data
    MalformedRow,
    DuplicateDate,
    EmptyFile,
    EmptyIntersection,
    TooShort,
    NonPositivePrice,
    EmptyWindow,
    WindowTooSmall,
    MissingInstrument,
    ConstantColumn,
    EmptyTrain,
    EmptyTest,
    DimensionMismatch,
    LengthMismatch,
    Empty,
    ConstantVector,
    ZeroActual,
    TooFew,
    IoFailure,
    // numerical
    NumericalDivergence,
    LineSearchFail,
    DegenerateVariance,
    // usage
    InvalidArgument,
    ConfigError,
};

enum class ErrorCategory { Usage, Data, Numerical };

std::string_view to_string(ErrorKind kind);
ErrorCategory category_of(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_of(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace volnet
