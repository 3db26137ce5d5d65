#include "hadamard/error.hpp"

namespace hadamard {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateMetric: return "degenerate metric";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::CoincidentPole: return "coincident poles";
    case ErrorKind::OutsideDomain: return "outside domain";
    case ErrorKind::MapInversion: return "map inversion failed";
    case ErrorKind::Injectivity: return "injectivity gate failed";
    case ErrorKind::PoleSeparation: return "pole separation violated";
    case ErrorKind::PatchRadius: return "patch radius too large";
    case ErrorKind::Evaluation: return "evaluation error";
    case ErrorKind::TooCloseToSingularity: return "too close to pole or boundary";
    case ErrorKind::Configuration: return "configuration error";
  }
  return "unknown error";
}

}  // namespace hadamard
