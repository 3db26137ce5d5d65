#pragma once

// Closed-form Dirichlet Green functions, -Laplace G = delta_a, G = 0 on the
// boundary, for the unit disk and its images under injective polynomial maps.
// In two dimensions G is conformally invariant, so the same functions are the
// Laplace-Beltrami Green functions of any conformally flat metric e^{2 phi} delta.

#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hadamard/domains.hpp"
#include "hadamard/quadrature.hpp"
#include "hadamard/tensor.hpp"

namespace hadamard {

/// Coincident-pole threshold: |x - a| below this is an error, never a clamp.
inline constexpr double kPoleTolerance = 1e-12;

using GradientField = std::function<Vec(const Point&)>;

double disk_green(const Point& x, const Point& a);
Vec disk_green_gradient(const Point& x, const Point& a);
/// dG/dn at a point of the unit circle: -(1/2pi)(1 - |a|^2) / |x - a|^2.
double poisson_normal_derivative(const Point& x_on_circle, const Point& a);

class GreenFunction {
 public:
  explicit GreenFunction(ConformalMap map);

  const ConformalMap& map() const { return map_; }

  double eval(const Point& x, const Point& a) const;
  /// alpha_i = dG(x, a)/dx^i.
  Vec gradient(const Point& x, const Point& a) const;
  /// Outward normal derivative at boundary parameter zeta (|zeta| = 1).
  double normal_derivative(Complex zeta, const Point& a) const;
  double normal_derivative(const BoundaryGrid& grid, std::size_t m, const Point& a) const;

  /// x -> grad_x G(x, a) with the pole preimage computed once.
  GradientField gradient_field(const Point& a) const;

  bool contains(const Point& x, double margin = 0.0) const;
  /// Preimage of an interior pole; throws OutsideDomain otherwise.
  Complex pole_preimage(const Point& a) const;

 private:
  Complex point_preimage(const Point& x) const;
  ConformalMap map_;
};

double mapped_green(const ConformalMap& map, const Point& x, const Point& a);

/// Conformal factor e^{2 phi} with phi a real polynomial sum c x1^px x2^py.
struct ConformalMetric2D {
  struct Term {
    int px = 0;
    int py = 0;
    double c = 0.0;
  };
  std::vector<Term> terms;

  double phi(const Point& x) const;
  Vec grad_phi(const Point& x) const;
  MetricField metric() const;

  nlohmann::json to_json() const;
  /// Array of [px, py, c] triples.
  static ConformalMetric2D from_json(const nlohmann::json& j);
};

/// G(a, b) = integral over the domain of alpha_k beta^k sqrt(g).
IntegrationResult mutual_energy(const GreenFunction& green, const MetricField& metric, const Point& a, const Point& b,
                                const QuadParams& params = {}, double rel_tol = 5e-3);

}  // namespace hadamard
