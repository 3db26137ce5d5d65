#include "hadamard/emt.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hadamard/error.hpp"

namespace hadamard {

PolarizedEMT::PolarizedEMT(MetricField metric, GradientField alpha, GradientField beta, Point a, Point b,
                           std::function<bool(const Point&)> inside)
    : metric_(std::move(metric)),
      alpha_(std::move(alpha)),
      beta_(std::move(beta)),
      a_(std::move(a)),
      b_(std::move(b)),
      inside_(std::move(inside)) {
  check_point(a_, metric_.dim);
  check_point(b_, metric_.dim);
  if ((a_ - b_).norm() < kPoleTolerance) throw Error(ErrorKind::CoincidentPole, "energy-momentum tensor needs a != b");
}

PolarizedEMT PolarizedEMT::from_green(const GreenFunction& green, MetricField metric, const Point& a, const Point& b) {
  if (metric.dim != 2) throw Error(ErrorKind::DimensionMismatch, "closed-form Green functions are two-dimensional");
  return PolarizedEMT(std::move(metric), green.gradient_field(a), green.gradient_field(b), a, b,
                      [green](const Point& x) { return green.contains(x); });
}

void PolarizedEMT::check_off_pole(const Point& x) const {
  check_point(x, metric_.dim);
  if ((x - a_).norm() < kPoleTolerance || (x - b_).norm() < kPoleTolerance) {
    throw Error(ErrorKind::CoincidentPole, fmt::format("evaluation point coincides with a pole"));
  }
}

Vec PolarizedEMT::alpha(const Point& x) const {
  check_off_pole(x);
  return alpha_(x);
}

Vec PolarizedEMT::beta(const Point& x) const {
  check_off_pole(x);
  return beta_(x);
}

double PolarizedEMT::phi(const Point& x) const { return alpha(x).dot(raise(metric_, x, beta(x))); }

Mat PolarizedEMT::covariant(const Point& x) const {
  const Vec al = alpha(x);
  const Vec be = beta(x);
  const Mat g = metric_at(metric_, x);
  const double phi_x = al.dot(raise(metric_, x, be));
  return al * be.transpose() + be * al.transpose() - phi_x * g;
}

Mat PolarizedEMT::contravariant(const Point& x) const { return raise_both(metric_, x, covariant(x)); }

TensorAtPoint PolarizedEMT::tensor(const Point& x) const {
  return TensorAtPoint{covariant(x), {Slot::Down, Slot::Down}, true};
}

double PolarizedEMT::source_pairing(const VectorFieldDesc& v) const {
  if (v.dim != metric_.dim) throw Error(ErrorKind::DimensionMismatch, "vector field and metric dimensions differ");
  // alpha evaluated at b, beta evaluated at a
  const Vec alpha_up_b = raise(metric_, b_, alpha_(b_));
  const Vec beta_up_a = raise(metric_, a_, beta_(a_));
  return lower(metric_, b_, v.eval(b_)).dot(alpha_up_b) + lower(metric_, a_, v.eval(a_)).dot(beta_up_a);
}

Vec PolarizedEMT::divergence(const Point& x, double h) const {
  check_off_pole(x);
  const int n = metric_.dim;
  if (!(h > 0.0)) throw Error(ErrorKind::Configuration, "finite-difference step must be positive");
  if ((x - a_).norm() <= 10.0 * h || (x - b_).norm() <= 10.0 * h) {
    throw Error(ErrorKind::TooCloseToSingularity, fmt::format("x is within 10h = {} of a pole", 10.0 * h));
  }
  if (inside_) {
    for (int j = 0; j < n; ++j) {
      for (double s : {-1.0, 1.0}) {
        Point probe = x;
        probe(j) += s * 10.0 * h;
        if (!inside_(probe)) throw Error(ErrorKind::TooCloseToSingularity, "x is within 10h of the boundary");
      }
    }
  }
  Vec div = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    Point xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const Mat dT = (contravariant(xp) - contravariant(xm)) / (2.0 * h);
    div += dT.col(j);
  }
  const Mat T = contravariant(x);
  const Christoffel gamma = christoffel(metric_, x);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) div(i) += gamma(i, j, k) * T(k, j) + gamma(j, j, k) * T(i, k);
  return div;
}

double PolarizedEMT::scaled_divergence_residual(const Point& x, double h) const {
  const Vec div = divergence(x, h);
  const double dist = std::min((x - a_).norm(), (x - b_).norm());
  const double scale = contravariant(x).norm();
  return div.cwiseAbs().maxCoeff() * dist / scale;
}

}  // namespace hadamard
