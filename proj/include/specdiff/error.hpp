// error.hpp: error taxonomy shared by every module.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specdiff {

enum class ErrorCode {
    InvalidArgument,
    Io,
    MalformedHeader,
    NonMonotonicAxis,
    RaggedRow,
    NonFinite,
    NegativeIntensity,
    DuplicateTimestamp,
    NonIncreasingTime,
    NonUniformSampling,
    WindowTooNarrow,
    TooManyFailedFits,
    TooFewPoints,
    DegenerateData,
    NonPositiveValue,
    EmptySelection,
    SingularMatrix,
    Diverged,
    LengthMismatch,
    OutOfRange,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every library failure is reported as an Error carrying a code that tests
// and the CLI can branch on.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace specdiff
