#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aware_ground {

enum class Errc {
  kDegenerateTriangle,
  kOutOfDomain,
  kParseError,
  kInvalidLayout,
  kInsufficientAnchors,
  kDegenerateGeometry,
  kNoConvergence,
  kOutOfOrder,
  kOutOfRange,
  kInvalidSpec,
  kInsufficientSamples,
  kIllConditioned,
  kNeverReaches,
  kMissingInput,
  kNoBallsFaced,
  kIoFailure,
  kCorruptRecord,
  kVersionMismatch,
  kLayoutMismatch,
  kInvalidArgument,
};

inline constexpr std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kDegenerateTriangle: return "DegenerateTriangle";
    case Errc::kOutOfDomain: return "OutOfDomain";
    case Errc::kParseError: return "ParseError";
    case Errc::kInvalidLayout: return "InvalidLayout";
    case Errc::kInsufficientAnchors: return "InsufficientAnchors";
    case Errc::kDegenerateGeometry: return "DegenerateGeometry";
    case Errc::kNoConvergence: return "NoConvergence";
    case Errc::kOutOfOrder: return "OutOfOrder";
    case Errc::kOutOfRange: return "OutOfRange";
    case Errc::kInvalidSpec: return "InvalidSpec";
    case Errc::kInsufficientSamples: return "InsufficientSamples";
    case Errc::kIllConditioned: return "IllConditioned";
    case Errc::kNeverReaches: return "NeverReaches";
    case Errc::kMissingInput: return "MissingInput";
    case Errc::kNoBallsFaced: return "NoBallsFaced";
    case Errc::kIoFailure: return "IoFailure";
    case Errc::kCorruptRecord: return "CorruptRecord";
    case Errc::kVersionMismatch: return "VersionMismatch";
    case Errc::kLayoutMismatch: return "LayoutMismatch";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Single exception type for the library. `subject()` carries the offending
// field name, file path or similar context when there is one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::string subject = {})
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        subject_(std::move(subject)) {}

  Errc code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  Errc code_;
  std::string subject_;
};

}  // namespace aware_ground
