#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parkloc {

enum class ErrorKind {
    TooFewPairs,
    DegenerateConfiguration,
    NonFinite,
    SingularMatrix,
    PointAtInfinity,
    ParseError,
    DuplicateLabel,
    EmptyMap,
    Overflow,
    EmptyInput,
    NonMonotoneTimestamp,
    FrameMismatch,
    InvalidConfig,
    Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }

    // Errors caused by bad input files or arguments, as opposed to bugs.
    bool is_input_error() const noexcept;

private:
    ErrorKind kind_;
};

}  // namespace parkloc
