#include "hadamard/green.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hadamard/error.hpp"

namespace hadamard {

namespace {

constexpr double kInvTwoPi = 0.5 / std::numbers::pi;
constexpr double kBoundarySlack = 1e-12;

void check_distinct(const Point& x, const Point& a) {
  if ((x - a).norm() < kPoleTolerance) {
    throw Error(ErrorKind::CoincidentPole, fmt::format("|x - a| < {} at ({}, {})", kPoleTolerance, x(0), x(1)));
  }
}

// holomorphic F with G = Re F on the disk: F(z) = (1/2pi)(log(1 - z conj(w)) - log(z - w))
double disk_value(Complex z, Complex w) {
  return kInvTwoPi * std::log(std::abs(1.0 - z * std::conj(w)) / std::abs(z - w));
}

Complex disk_dF(Complex z, Complex w) {
  return kInvTwoPi * (-std::conj(w) / (1.0 - z * std::conj(w)) - 1.0 / (z - w));
}

void check_disk_pole(Complex w) {
  if (!(std::abs(w) < 1.0)) {
    throw Error(ErrorKind::OutsideDomain, fmt::format("pole ({}, {}) is not interior", w.real(), w.imag()));
  }
}

void check_disk_point(Complex z) {
  if (std::abs(z) > 1.0 + kBoundarySlack) {
    throw Error(ErrorKind::OutsideDomain, fmt::format("point ({}, {}) lies outside the closed domain", z.real(), z.imag()));
  }
}

}  // namespace

double disk_green(const Point& x, const Point& a) {
  check_point(x, 2);
  check_point(a, 2);
  check_distinct(x, a);
  const Complex z = to_complex(x), w = to_complex(a);
  check_disk_pole(w);
  check_disk_point(z);
  return disk_value(z, w);
}

Vec disk_green_gradient(const Point& x, const Point& a) {
  check_point(x, 2);
  check_point(a, 2);
  check_distinct(x, a);
  const Complex z = to_complex(x), w = to_complex(a);
  check_disk_pole(w);
  check_disk_point(z);
  const Complex g = std::conj(disk_dF(z, w));
  return Vec{{g.real(), g.imag()}};
}

double poisson_normal_derivative(const Point& x_on_circle, const Point& a) {
  check_point(x_on_circle, 2);
  check_point(a, 2);
  const Complex w = to_complex(a);
  check_disk_pole(w);
  return -kInvTwoPi * (1.0 - std::norm(w)) / std::norm(to_complex(x_on_circle) - w);
}

GreenFunction::GreenFunction(ConformalMap map) : map_(std::move(map)) {}

Complex GreenFunction::point_preimage(const Point& x) const {
  check_point(x, 2);
  const Complex z = map_.inverse(to_complex(x));
  check_disk_point(z);
  return z;
}

Complex GreenFunction::pole_preimage(const Point& a) const {
  check_point(a, 2);
  const Complex w = map_.inverse(to_complex(a));
  check_disk_pole(w);
  return w;
}

bool GreenFunction::contains(const Point& x, double margin) const {
  check_point(x, 2);
  return std::abs(map_.inverse(to_complex(x))) < 1.0 - margin;
}

double GreenFunction::eval(const Point& x, const Point& a) const {
  check_point(x, 2);
  check_point(a, 2);
  check_distinct(x, a);
  return disk_value(point_preimage(x), pole_preimage(a));
}

Vec GreenFunction::gradient(const Point& x, const Point& a) const {
  check_point(x, 2);
  check_point(a, 2);
  check_distinct(x, a);
  const Complex z = point_preimage(x);
  const Complex g = std::conj(disk_dF(z, pole_preimage(a)) / map_.derivative(z));
  return Vec{{g.real(), g.imag()}};
}

GradientField GreenFunction::gradient_field(const Point& a) const {
  const Complex w = pole_preimage(a);
  return [this_map = map_, w, a](const Point& x) -> Vec {
    check_point(x, 2);
    check_distinct(x, a);
    const Complex z = this_map.inverse(to_complex(x));
    check_disk_point(z);
    const Complex g = std::conj(disk_dF(z, w) / this_map.derivative(z));
    return Vec{{g.real(), g.imag()}};
  };
}

double GreenFunction::normal_derivative(Complex zeta, const Point& a) const {
  const Complex w = pole_preimage(a);
  return std::real(zeta * disk_dF(zeta, w)) / std::abs(map_.derivative(zeta));
}

double GreenFunction::normal_derivative(const BoundaryGrid& grid, std::size_t m, const Point& a) const {
  return normal_derivative(grid.params.at(m), a);
}

double mapped_green(const ConformalMap& map, const Point& x, const Point& a) { return GreenFunction(map).eval(x, a); }

// ---- conformal metric ---------------------------------------------------------------

double ConformalMetric2D::phi(const Point& x) const {
  double s = 0.0;
  for (const Term& t : terms) s += t.c * std::pow(x(0), t.px) * std::pow(x(1), t.py);
  return s;
}

Vec ConformalMetric2D::grad_phi(const Point& x) const {
  Vec g = Vec::Zero(2);
  for (const Term& t : terms) {
    if (t.px > 0) g(0) += t.c * t.px * std::pow(x(0), t.px - 1) * std::pow(x(1), t.py);
    if (t.py > 0) g(1) += t.c * t.py * std::pow(x(0), t.px) * std::pow(x(1), t.py - 1);
  }
  return g;
}

MetricField ConformalMetric2D::metric() const {
  const ConformalMetric2D self = *this;
  return conformal_metric(2, [self](const Point& x) { return self.phi(x); },
                          [self](const Point& x) { return self.grad_phi(x); });
}

nlohmann::json ConformalMetric2D::to_json() const {
  auto arr = nlohmann::json::array();
  for (const Term& t : terms) arr.push_back({t.px, t.py, t.c});
  return arr;
}

ConformalMetric2D ConformalMetric2D::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorKind::Configuration, "\"conformal_phi\" must be an array of [px, py, c] triples");
  ConformalMetric2D out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& t = j[k];
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() || !t[2].is_number()) {
      throw Error(ErrorKind::Configuration, fmt::format("\"conformal_phi\"[{}] must be [px, py, c] with integer powers", k));
    }
    const int px = t[0].get<int>(), py = t[1].get<int>();
    if (px < 0 || py < 0) throw Error(ErrorKind::Configuration, fmt::format("\"conformal_phi\"[{}] has a negative power", k));
    out.terms.push_back({px, py, t[2].get<double>()});
  }
  return out;
}

IntegrationResult mutual_energy(const GreenFunction& green, const MetricField& metric, const Point& a, const Point& b,
                                const QuadParams& params, double rel_tol) {
  if ((a - b).norm() < kPoleTolerance) throw Error(ErrorKind::CoincidentPole, "mutual energy needs a != b");
  // canonical pole order makes the result bit-identical under a <-> b
  const bool swap = b(0) < a(0) || (b(0) == a(0) && b(1) < a(1));
  const Point& p = swap ? b : a;
  const Point& q = swap ? a : b;
  const GradientField alpha = green.gradient_field(p);
  const GradientField beta = green.gradient_field(q);
  const QuadratureRule rule = domain_rule(green.map(), {p, q}, params);
  return integrate(
      rule,
      [&](const Point& x) {
        const Vec al = alpha(x);
        return al.dot(raise(metric, x, beta(x))) * volume_density(metric, x);
      },
      rel_tol);
}

}  // namespace hadamard
