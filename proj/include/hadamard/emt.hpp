#pragma once

// Polarized energy-momentum tensor of two Green functions,
//   T_ij = alpha_i beta_j + alpha_j beta_i - Phi g_ij,   Phi = alpha_k beta^k,
// with alpha = dG(., a) and beta = dG(., b). This normalization is twice the
// usual physics convention. Its divergence vanishes away from the poles and
// carries point sources mu = -alpha(b) delta_b - beta(a) delta_a.

#include <functional>

#include "hadamard/green.hpp"
#include "hadamard/tensor.hpp"

namespace hadamard {

class PolarizedEMT {
 public:
  PolarizedEMT(MetricField metric, GradientField alpha, GradientField beta, Point a, Point b,
               std::function<bool(const Point&)> inside = {});

  static PolarizedEMT from_green(const GreenFunction& green, MetricField metric, const Point& a, const Point& b);

  const MetricField& metric() const { return metric_; }
  const Point& pole_a() const { return a_; }
  const Point& pole_b() const { return b_; }

  Vec alpha(const Point& x) const;
  Vec beta(const Point& x) const;
  double phi(const Point& x) const;
  Mat covariant(const Point& x) const;
  Mat contravariant(const Point& x) const;
  TensorAtPoint tensor(const Point& x) const;

  /// Lagrangian density; identical to phi.
  double lagrangian_density(const Point& x) const { return phi(x); }

  /// Source-pairing term v_i(b) alpha^i(b) + v_i(a) beta^i(a), i.e. -v_i mu^i.
  double source_pairing(const VectorFieldDesc& v) const;

  /// T^{ij}_{;j} with centred differences of T^{ij} at step h plus analytic
  /// Christoffel terms. Requires x to be more than 10h from both poles and
  /// x +- 10h e_j inside the domain.
  Vec divergence(const Point& x, double h) const;

  /// max_i |T^{ij}_{;j}| * min(|x - a|, |x - b|) / ||T(x)||.
  double scaled_divergence_residual(const Point& x, double h) const;

 private:
  void check_off_pole(const Point& x) const;

  MetricField metric_;
  GradientField alpha_;
  GradientField beta_;
  Point a_;
  Point b_;
  std::function<bool(const Point&)> inside_;
};

}  // namespace hadamard
