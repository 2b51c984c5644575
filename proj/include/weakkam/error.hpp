#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wkam {

enum class ErrorKind {
  ModelViolation,
  BadGrid,
  NotSubsolution,
  ContractionViolated,
  NoConvergence,
  IterationLimit,
  NegativeCycle,
  NonFiniteState,
  EmptyMeasureList,
  Config,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ModelViolation: return "ModelViolation";
    case ErrorKind::BadGrid: return "BadGrid";
    case ErrorKind::NotSubsolution: return "NotSubsolution";
    case ErrorKind::ContractionViolated: return "ContractionViolated";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::IterationLimit: return "IterationLimit";
    case ErrorKind::NegativeCycle: return "NegativeCycle";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::EmptyMeasureList: return "EmptyMeasureList";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wkam
