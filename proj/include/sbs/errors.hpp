#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sbs {

enum class ErrorKind {
  PoleError,
  ZeroSetProximity,
  OutsideRegion,
  DivisionByZero,
  TruncationOverflow,
  NonGlobalSection,
  InvalidLoop,
  NonSimpleLoop,
  EmbeddednessLost,
  InvalidPair,
  ZeroSetCollision,
  StepSizeTooLarge,
  Resonance,
  NotClosed,
  PreconditionViolated,
  DegenerateLevel,
  SyntaxError,
  DegreeExceeded,
  InvalidDocument,
  MaxIterations,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PoleError: return "PoleError";
    case ErrorKind::ZeroSetProximity: return "ZeroSetProximity";
    case ErrorKind::OutsideRegion: return "OutsideRegion";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::TruncationOverflow: return "TruncationOverflow";
    case ErrorKind::NonGlobalSection: return "NonGlobalSection";
    case ErrorKind::InvalidLoop: return "InvalidLoop";
    case ErrorKind::NonSimpleLoop: return "NonSimpleLoop";
    case ErrorKind::EmbeddednessLost: return "EmbeddednessLost";
    case ErrorKind::InvalidPair: return "InvalidPair";
    case ErrorKind::ZeroSetCollision: return "ZeroSetCollision";
    case ErrorKind::StepSizeTooLarge: return "StepSizeTooLarge";
    case ErrorKind::Resonance: return "Resonance";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::DegenerateLevel: return "DegenerateLevel";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::DegreeExceeded: return "DegreeExceeded";
    case ErrorKind::InvalidDocument: return "InvalidDocument";
    case ErrorKind::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is what callers branch on;
/// `position()` is only meaningful for SyntaxError.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::size_t position = 0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        position_(position) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }

 private:
  ErrorKind kind_;
  std::size_t position_;
};

}  // namespace sbs
