#include "parkloc/error.hpp"

namespace parkloc {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::TooFewPairs: return "TooFewPairs";
        case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::SingularMatrix: return "SingularMatrix";
        case ErrorKind::PointAtInfinity: return "PointAtInfinity";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::DuplicateLabel: return "DuplicateLabel";
        case ErrorKind::EmptyMap: return "EmptyMap";
        case ErrorKind::Overflow: return "Overflow";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
        case ErrorKind::FrameMismatch: return "FrameMismatch";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

bool Error::is_input_error() const noexcept {
    switch (kind_) {
        case ErrorKind::SingularMatrix:
        case ErrorKind::PointAtInfinity:
            return false;
        default:
            return true;
    }
}

}  // namespace parkloc
