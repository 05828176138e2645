#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qrm {

enum class ErrorKind {
    InvalidArgument,
    TruncationNotConverged,
    EigenstateTrackingLost,
    DegenerateCoefficient,
    NegativeCarrier,
    DegeneratePoint,
    UndefinedAtZeroAngle,
    StepSizeUnderflow,
    NormUnderflow,
    PositivityViolation,
    ZeroDenominator,
    EmptyWindow,
    ParseError,
    ValidationError,
    IoError,
    GateFailed,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }

    /// Input problems (bad files, bad parameters) vs. numerical failures.
    bool is_validation() const noexcept;

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

} // namespace qrm
