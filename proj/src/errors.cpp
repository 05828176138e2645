#include "qrm/errors.hpp"

namespace qrm {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TruncationNotConverged: return "TruncationNotConverged";
    case ErrorKind::EigenstateTrackingLost: return "EigenstateTrackingLost";
    case ErrorKind::DegenerateCoefficient: return "DegenerateCoefficient";
    case ErrorKind::NegativeCarrier: return "NegativeCarrier";
    case ErrorKind::DegeneratePoint: return "DegeneratePoint";
    case ErrorKind::UndefinedAtZeroAngle: return "UndefinedAtZeroAngle";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::NormUnderflow: return "NormUnderflow";
    case ErrorKind::PositivityViolation: return "PositivityViolation";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::GateFailed: return "GateFailed";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
{
}

bool Error::is_validation() const noexcept
{
    switch (kind_) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::IoError:
    case ErrorKind::NegativeCarrier:
    case ErrorKind::DegenerateCoefficient:
        return true;
    default:
        return false;
    }
}

void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace qrm
