#include "specdiff/error.hpp"

namespace specdiff {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::Io: return "i/o error";
        case ErrorCode::MalformedHeader: return "malformed header";
        case ErrorCode::NonMonotonicAxis: return "non-monotonic axis";
        case ErrorCode::RaggedRow: return "ragged row";
        case ErrorCode::NonFinite: return "non-finite value";
        case ErrorCode::NegativeIntensity: return "negative intensity";
        case ErrorCode::DuplicateTimestamp: return "duplicate timestamp";
        case ErrorCode::NonIncreasingTime: return "non-increasing time";
        case ErrorCode::NonUniformSampling: return "non-uniform sampling";
        case ErrorCode::WindowTooNarrow: return "window too narrow";
        case ErrorCode::TooManyFailedFits: return "too many failed fits";
        case ErrorCode::TooFewPoints: return "too few points";
        case ErrorCode::DegenerateData: return "degenerate data";
        case ErrorCode::NonPositiveValue: return "non-positive value";
        case ErrorCode::EmptySelection: return "empty selection";
        case ErrorCode::SingularMatrix: return "singular matrix";
        case ErrorCode::Diverged: return "diverged";
        case ErrorCode::LengthMismatch: return "length mismatch";
        case ErrorCode::OutOfRange: return "out of range";
    }
    return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace specdiff
