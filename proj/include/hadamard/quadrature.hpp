#pragma once

// Interior quadrature on the unit disk with graded polar refinement around
// integrable |x - pole|^{-1} singularities, its pushforward to mapped domains,
// and periodic trapezoidal quadrature on boundary grids.
//
// With poles present the integral is split by a smooth partition of unity,
//   psi_p(x) = prod_{q != p} |x - q|^2 / sum_s prod_{q != s} |x - q|^2,
// and each piece f psi_p is integrated in polar coordinates centred at p over
// the whole disk. Along every ray the radial interval [0, rho] carries graded
// nodes r = rho s^2 (Gauss-Legendre in s) and [rho, R(theta)] plain
// Gauss-Legendre nodes. The polar Jacobian cancels the 1/r singularity, and
// psi_p vanishes quadratically at the other poles.

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "hadamard/domains.hpp"
#include "hadamard/tensor.hpp"

namespace hadamard {

struct QuadParams {
  int n_r = 64;
  int n_theta = 128;
  int n_patch = 32;
  /// Patch radius; defaults to 0.1 * min(pole separation, pole-to-boundary distance).
  std::optional<double> rho;

  QuadParams halved() const;
  QuadParams doubled() const;
};

struct QuadratureRule {
  std::vector<Point> nodes;
  std::vector<double> weights;  // area measure of the (mapped) domain
  std::vector<Point> pole_centers;
  double rho = 0.0;
  QuadParams params;

  std::vector<Complex> disk_poles;  // pole preimages used to build the rule
  std::optional<ConformalMap> map;  // set for pushed-forward rules

  std::size_t size() const { return nodes.size(); }
  double total_weight() const;
};

struct IntegrationResult {
  double value = 0.0;
  double half_value = 0.0;  // same rule at half resolution
  double rel_change = 0.0;
  bool converged = false;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

double default_patch_radius(const std::vector<Complex>& disk_poles);

/// Unit-disk rule; `poles` are points of the open unit disk.
QuadratureRule disk_rule(const QuadParams& params, const std::vector<Complex>& poles);

/// Rule on map(D) with refinement at the given ambient poles.
QuadratureRule domain_rule(const ConformalMap& map, const std::vector<Point>& poles, const QuadParams& params);

QuadratureRule pushforward(const QuadratureRule& disk, const ConformalMap& map);

/// The same rule rebuilt with every resolution parameter halved.
QuadratureRule rebuild(const QuadratureRule& rule, const QuadParams& params);

/// Weighted sum in node order. Throws Evaluation on a non-finite value.
double integrate_sum(const QuadratureRule& rule, const std::function<double(const Point&)>& f);

/// Weighted sum plus a convergence flag from the half-resolution rule.
IntegrationResult integrate(const QuadratureRule& rule, const std::function<double(const Point&)>& f,
                            double rel_tol = 5e-3);

double boundary_integrate(const BoundaryGrid& grid, const std::function<double(std::size_t)>& f);

}  // namespace hadamard
