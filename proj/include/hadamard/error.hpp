#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hadamard {

enum class ErrorKind {
  DegenerateMetric,
  DimensionMismatch,
  CoincidentPole,
  OutsideDomain,
  MapInversion,
  Injectivity,
  PoleSeparation,
  PatchRadius,
  Evaluation,
  TooCloseToSingularity,
  Configuration,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. Every failure path in the library throws this type
/// so callers (the CLI runner in particular) can report the kind per check.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hadamard
