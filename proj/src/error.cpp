#include "gaitkit/error.hpp"

namespace gaitkit {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::InitFailure: return "init-failure";
    case ErrorKind::Gap: return "gap";
    case ErrorKind::Misalignment: return "misalignment";
    case ErrorKind::QuasiStatic: return "not-quasi-static";
    case ErrorKind::InsufficientPeaks: return "insufficient-peaks";
    case ErrorKind::SpanOutOfBounds: return "span-out-of-bounds";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::MalformedLine: return "malformed-line";
    case ErrorKind::DuplicateRecord: return "duplicate-record";
    case ErrorKind::NonMonotoneTick: return "non-monotone-tick";
    case ErrorKind::MissingTriggerTick: return "missing-trigger-tick";
    case ErrorKind::UnitRange: return "unit-range";
    case ErrorKind::NoCommonRange: return "no-common-range";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace gaitkit
