#pragma once

// Configuration-driven experiment runner behind the `hadamard` CLI.
//
// Config (JSON, strict: unknown fields are errors):
//   {
//     "domain": "dilation" | {"base": [[re, im], ...], "perturbation": [...], "t_max": 0.5},
//     "metric": "flat" | {"conformal_phi": [[px, py, c], ...]},
//     "a": [x, y], "b": [x, y], "c": [x, y],
//     "quadrature": {"n_r": 64, "n_theta": 128, "n_patch": 32, "rho": 0.05, "boundary_nodes": 256},
//     "fd_dt": 5e-5,
//     "tolerances": {"boundary": 1e-5, "volume": 5e-3, "abs_floor": 1e-8},
//     "velocity_extension": "holomorphic" | "radial_blend",
//     "levels": 5,
//     "output": {"report": "path.json", "csv": "path.csv"}
//   }

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hadamard/domains.hpp"
#include "hadamard/green.hpp"
#include "hadamard/quadrature.hpp"
#include "hadamard/variation.hpp"

namespace hadamard {

enum ExitStatus : int { kExitPass = 0, kExitFail = 1, kExitConfig = 2 };

struct ExperimentConfig {
  nlohmann::json domain_spec = "dilation";
  DomainFamily family = builtin_family("dilation");
  std::optional<ConformalMetric2D> conformal;  // empty means flat
  Point a = Point{{0.0, 0.0}};
  Point b = Point{{0.5, 0.0}};
  std::optional<Point> c;
  QuadParams quad;
  std::size_t boundary_nodes = kDefaultBoundaryNodes;
  std::optional<double> fd_dt;
  Tolerances tol;
  VelocityExtension extension = VelocityExtension::Holomorphic;
  int levels = 5;
  std::optional<std::string> report_path;
  std::optional<std::string> csv_path;

  MetricField metric() const;
  VariationOptions variation_options() const;
  /// Normalized echo of the effective configuration.
  nlohmann::json echo() const;
};

/// Throws Error(Configuration) with the offending field named.
ExperimentConfig parse_config(const nlohmann::json& j);
/// Parses text; JSON syntax errors report line and column.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Checks pole margins (>= 0.05 from the boundary), distinctness and tolerances.
void validate_config(const ExperimentConfig& config);

struct RunOutcome {
  int exit_code = kExitPass;
  std::string text;  // JSON report or CSV table
};

RunOutcome run_verify(const ExperimentConfig& config);
RunOutcome run_vary(const ExperimentConfig& config);
RunOutcome run_convergence(const ExperimentConfig& config, int levels);
RunOutcome run_triple(const ExperimentConfig& config);

inline constexpr const char* kConvergenceHeader = "level,estimator,value,abs_error";

/// Deterministic JSON text: sorted keys, doubles with 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);
std::string format_double(double x);

}  // namespace hadamard
