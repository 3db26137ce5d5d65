#include "hadamard/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "hadamard/error.hpp"

namespace hadamard {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPoleExclusion = 1e-10;

void check_params(const QuadParams& p) {
  if (p.n_r < 1 || p.n_theta < 3 || p.n_patch < 1) {
    throw Error(ErrorKind::Configuration,
                fmt::format("quadrature resolution too small (n_r={}, n_theta={}, n_patch={})", p.n_r, p.n_theta, p.n_patch));
  }
}

// distance from p to the unit circle along direction e
double ray_length(Complex p, Complex e) {
  const double b = std::real(p * std::conj(e));
  const double c = 1.0 - std::norm(p);
  const double root = std::sqrt(b * b + c);
  return b > 0.0 ? c / (b + root) : root - b;
}

double partition_weight(const std::vector<Complex>& poles, std::size_t owner, Complex x) {
  if (poles.size() == 1) return 1.0;
  // products of squared distances, excluding one pole each
  std::vector<double> excl(poles.size(), 1.0);
  for (std::size_t s = 0; s < poles.size(); ++s)
    for (std::size_t q = 0; q < poles.size(); ++q)
      if (q != s) excl[s] *= std::norm(x - poles[q]);
  double denom = 0.0;
  for (double e : excl) denom += e;
  return excl[owner] / denom;
}

}  // namespace

QuadParams QuadParams::halved() const {
  QuadParams p = *this;
  p.n_r = std::max(1, n_r / 2);
  p.n_theta = std::max(3, n_theta / 2);
  p.n_patch = std::max(1, n_patch / 2);
  return p;
}

QuadParams QuadParams::doubled() const {
  QuadParams p = *this;
  p.n_r *= 2;
  p.n_theta *= 2;
  p.n_patch *= 2;
  return p;
}

double QuadratureRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(n - 1 - i)] = wi;
  }
  return {x, w};
}

double default_patch_radius(const std::vector<Complex>& disk_poles) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < disk_poles.size(); ++i) {
    d = std::min(d, 1.0 - std::abs(disk_poles[i]));
    for (std::size_t j = i + 1; j < disk_poles.size(); ++j) d = std::min(d, std::abs(disk_poles[i] - disk_poles[j]));
  }
  return std::isfinite(d) ? 0.1 * d : 0.0;
}

QuadratureRule disk_rule(const QuadParams& params, const std::vector<Complex>& poles) {
  check_params(params);
  QuadratureRule rule;
  rule.params = params;
  rule.disk_poles = poles;
  for (const Complex& p : poles) {
    if (!(std::abs(p) < 1.0)) {
      throw Error(ErrorKind::OutsideDomain, fmt::format("pole ({}, {}) is not inside the unit disk", p.real(), p.imag()));
    }
    rule.pole_centers.push_back(to_point(p));
  }

  const auto [gx, gw] = gauss_legendre(params.n_r);
  const double dtheta = kTwoPi / params.n_theta;

  if (poles.empty()) {
    rule.rho = 0.0;
    for (int j = 0; j < params.n_theta; ++j) {
      const Complex e = std::polar(1.0, dtheta * (j + 0.5));
      for (int i = 0; i < params.n_r; ++i) {
        const double r = 0.5 * (gx[static_cast<std::size_t>(i)] + 1.0);
        rule.nodes.push_back(to_point(r * e));
        rule.weights.push_back(0.5 * gw[static_cast<std::size_t>(i)] * r * dtheta);
      }
    }
    return rule;
  }

  const double rho = params.rho.value_or(default_patch_radius(poles));
  if (!(rho > 0.0)) throw Error(ErrorKind::PatchRadius, "patch radius must be positive");
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (rho >= 1.0 - std::abs(poles[i])) {
      throw Error(ErrorKind::PatchRadius, fmt::format("rho = {} is not below the distance of pole {} to the boundary", rho, i));
    }
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      if (std::abs(poles[i] - poles[j]) <= 2.0 * rho) {
        throw Error(ErrorKind::PoleSeparation, fmt::format("poles {} and {} are not separated by more than 2 rho", i, j));
      }
    }
  }
  rule.rho = rho;

  const auto [sx, sw] = gauss_legendre(params.n_patch);
  for (std::size_t owner = 0; owner < poles.size(); ++owner) {
    const Complex p = poles[owner];
    for (int j = 0; j < params.n_theta; ++j) {
      const Complex e = std::polar(1.0, dtheta * (j + 0.5));
      const double reach = ray_length(p, e);
      auto emit = [&](double r, double radial_weight) {
        const Complex x = p + r * e;
        for (const Complex& q : poles)
          if (std::abs(x - q) < kPoleExclusion) return;
        const double w = radial_weight * r * dtheta * partition_weight(poles, owner, x);
        if (w > 0.0) {
          rule.nodes.push_back(to_point(x));
          rule.weights.push_back(w);
        }
      };
      for (int k = 0; k < params.n_patch; ++k) {
        const double s = 0.5 * (sx[static_cast<std::size_t>(k)] + 1.0);
        emit(rho * s * s, 0.5 * sw[static_cast<std::size_t>(k)] * 2.0 * rho * s);
      }
      const double half = 0.5 * (reach - rho);
      for (int i = 0; i < params.n_r; ++i) {
        emit(rho + half * (gx[static_cast<std::size_t>(i)] + 1.0), half * gw[static_cast<std::size_t>(i)]);
      }
    }
  }
  return rule;
}

QuadratureRule pushforward(const QuadratureRule& disk, const ConformalMap& map) {
  QuadratureRule out = disk;
  out.map = map;
  for (std::size_t k = 0; k < disk.size(); ++k) {
    const Complex z = to_complex(disk.nodes[k]);
    out.nodes[k] = to_point(map(z));
    out.weights[k] = disk.weights[k] * std::norm(map.derivative(z));
  }
  for (std::size_t k = 0; k < disk.disk_poles.size(); ++k) out.pole_centers[k] = to_point(map(disk.disk_poles[k]));
  return out;
}

QuadratureRule domain_rule(const ConformalMap& map, const std::vector<Point>& poles, const QuadParams& params) {
  std::vector<Complex> pre;
  pre.reserve(poles.size());
  for (const Point& p : poles) {
    check_point(p, 2);
    pre.push_back(map.inverse(to_complex(p)));
  }
  return pushforward(disk_rule(params, pre), map);
}

QuadratureRule rebuild(const QuadratureRule& rule, const QuadParams& params) {
  QuadParams p = params;
  p.rho = rule.rho > 0.0 ? std::optional<double>(rule.rho) : std::nullopt;
  QuadratureRule disk = disk_rule(p, rule.disk_poles);
  return rule.map ? pushforward(disk, *rule.map) : disk;
}

double integrate_sum(const QuadratureRule& rule, const std::function<double(const Point&)>& f) {
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double value = f(rule.nodes[k]);
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::Evaluation, fmt::format("non-finite integrand at node {} = ({}, {})", k,
                                                     rule.nodes[k](0), rule.nodes[k](1)));
    }
    sum += rule.weights[k] * value;
  }
  return sum;
}

IntegrationResult integrate(const QuadratureRule& rule, const std::function<double(const Point&)>& f,
                            double rel_tol) {
  IntegrationResult result;
  result.value = integrate_sum(rule, f);
  result.half_value = integrate_sum(rebuild(rule, rule.params.halved()), f);
  const double scale = std::max(std::abs(result.value), std::numeric_limits<double>::min());
  result.rel_change = std::abs(result.value - result.half_value) / scale;
  result.converged = result.rel_change < rel_tol || std::abs(result.value - result.half_value) < 1e-14;
  return result;
}

double boundary_integrate(const BoundaryGrid& grid, const std::function<double(std::size_t)>& f) {
  double sum = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) sum += f(m) * grid.weights[m];
  return sum;
}

}  // namespace hadamard
