#include "hadamard/variation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hadamard/emt.hpp"
#include "hadamard/error.hpp"

namespace hadamard {

namespace {

void check_poles(const Point& a, const Point& b) {
  check_point(a, 2);
  check_point(b, 2);
  if ((a - b).norm() < kPoleTolerance) throw Error(ErrorKind::CoincidentPole, "variation needs a != b");
}

std::vector<double> normal_derivatives(const GreenFunction& green, const BoundaryGrid& grid, const Point& pole) {
  std::vector<double> out(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) out[m] = green.normal_derivative(grid, m, pole);
  return out;
}

}  // namespace

double boundary_variation(const DomainFamily& family, const Point& a, const Point& b, std::size_t nodes) {
  check_poles(a, b);
  const BoundaryGrid grid = boundary_grid(family, 0.0, nodes);
  const GreenFunction green(family.map_at(0.0));
  const std::vector<double> da = normal_derivatives(green, grid, a);
  const std::vector<double> db = normal_derivatives(green, grid, b);
  return boundary_integrate(grid, [&](std::size_t m) { return da[m] * db[m] * grid.normal_speed[m]; });
}

double boundary_variation(const ConformalMap& map, const VectorFieldDesc& v, const Point& a, const Point& b,
                          std::size_t nodes) {
  check_poles(a, b);
  const BoundaryGrid grid = boundary_grid(map, nodes);
  const GreenFunction green(map);
  const std::vector<double> da = normal_derivatives(green, grid, a);
  const std::vector<double> db = normal_derivatives(green, grid, b);
  const std::vector<double> dn = normal_speed(grid, v);
  return boundary_integrate(grid, [&](std::size_t m) { return da[m] * db[m] * dn[m]; });
}

VolumeVariation volume_variation(const DomainFamily& family, const MetricField& metric, const Point& a,
                                 const Point& b, const QuadParams& params, double rel_tol,
                                 VelocityExtension extension) {
  return volume_variation(family.map_at(0.0), metric, velocity_field(family, extension), a, b, params, rel_tol);
}

VolumeVariation volume_variation(const ConformalMap& map, const MetricField& metric, const VectorFieldDesc& v,
                                 const Point& a, const Point& b, const QuadParams& params, double rel_tol) {
  check_poles(a, b);
  const GreenFunction green(map);
  const PolarizedEMT emt = PolarizedEMT::from_green(green, metric, a, b);
  const QuadratureRule rule = domain_rule(green.map(), {a, b}, params);

  const auto integrand = [&](const Point& x) {
    const Mat T = emt.contravariant(x);
    const Mat D = strain_tensor(metric, v, x);
    return T.cwiseProduct(D).sum() * volume_density(metric, x);
  };
  const IntegrationResult integral = integrate(rule, integrand, rel_tol);

  VolumeVariation out;
  out.integral = integral.value;
  out.source_pairing = emt.source_pairing(v);
  // the distributional divergence of T is mu, so the pairing enters as +v_i mu^i
  out.value = integral.value - out.source_pairing;
  out.half_value = integral.half_value - out.source_pairing;
  const double scale = std::max(std::abs(out.value), 1e-300);
  out.converged = std::abs(out.value - out.half_value) / scale < rel_tol ||
                  std::abs(out.value - out.half_value) < 1e-12;
  return out;
}

double flux_variation(const ConformalMap& map, const MetricField& metric, const VectorFieldDesc& v, const Point& a,
                      const Point& b, std::size_t nodes) {
  check_poles(a, b);
  const BoundaryGrid grid = boundary_grid(map, nodes);
  const GreenFunction green(map);
  const PolarizedEMT emt = PolarizedEMT::from_green(green, metric, a, b);
  // n_j dsigma = sqrt(g) nu_j ds with nu, ds the Euclidean normal and arclength
  return boundary_integrate(grid, [&](std::size_t m) {
    const Point& x = grid.nodes[m];
    const Vec v_low = lower(metric, x, v.eval(x));
    return v_low.dot(emt.contravariant(x) * grid.normals[m]) * volume_density(metric, x);
  });
}

double flux_variation(const DomainFamily& family, const MetricField& metric, const Point& a, const Point& b,
                      std::size_t nodes) {
  return flux_variation(family.map_at(0.0), metric, velocity_field(family), a, b, nodes);
}

double default_fd_step(const DomainFamily& family) { return 1e-4 * family.t_max(); }

double fd_oracle(const DomainFamily& family, const Point& a, const Point& b, std::optional<double> dt) {
  check_poles(a, b);
  const double step = dt.value_or(default_fd_step(family));
  if (!(step > 0.0) || step > family.t_max()) {
    throw Error(ErrorKind::Configuration, fmt::format("fd step {} must lie in (0, t_max = {}]", step, family.t_max()));
  }
  auto value_at = [&](double t) {
    const GreenFunction green(family.map_at(t));
    for (const Point* p : {&a, &b}) {
      if (!green.contains(*p)) {
        throw Error(ErrorKind::Configuration,
                    fmt::format("pole ({}, {}) exits the domain at t = {}", (*p)(0), (*p)(1), t));
      }
    }
    return green.eval(a, b);
  };
  return (value_at(step) - value_at(-step)) / (2.0 * step);
}

VectorFieldDesc green_gradient_field(const GreenFunction& green, const Point& c) {
  const GradientField grad = green.gradient_field(c);
  VectorFieldDesc v;
  v.dim = 2;
  v.eval = grad;
  return v;
}

double triple_variation(const ConformalMap& map, const Point& a, const Point& b, const Point& c, std::size_t nodes) {
  return triple_permutations(map, a, b, c, nodes)[0];
}

std::array<double, 6> triple_permutations(const ConformalMap& map, const Point& a, const Point& b, const Point& c,
                                          std::size_t nodes) {
  check_poles(a, b);
  check_poles(a, c);
  check_poles(b, c);
  const BoundaryGrid grid = boundary_grid(map, nodes);
  const GreenFunction green(map);
  const std::array<std::vector<double>, 3> d{normal_derivatives(green, grid, a), normal_derivatives(green, grid, b),
                                             normal_derivatives(green, grid, c)};
  constexpr std::array<std::array<int, 3>, 6> orders{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::array<double, 6> out{};
  for (std::size_t k = 0; k < orders.size(); ++k) {
    const auto& o = orders[k];
    out[k] = boundary_integrate(grid, [&](std::size_t m) {
      return d[static_cast<std::size_t>(o[0])][m] * d[static_cast<std::size_t>(o[1])][m] *
             d[static_cast<std::size_t>(o[2])][m];
    });
  }
  return out;
}

// ---- report -------------------------------------------------------------------

void VariationReport::set_estimate(const std::string& name, double value) {
  estimates_[name] = value;
  skipped_.erase(name);
}

void VariationReport::skip(const std::string& name, const std::string& reason) {
  estimates_.erase(name);
  skipped_[name] = reason;
}

std::optional<double> VariationReport::estimate(const std::string& name) const {
  const auto it = estimates_.find(name);
  if (it == estimates_.end()) return std::nullopt;
  return it->second;
}

double VariationReport::relative(double x, double y) const {
  return std::abs(x - y) / std::max({std::abs(x), std::abs(y), tolerances.abs_floor});
}

std::vector<Discrepancy> VariationReport::discrepancies() const {
  std::vector<Discrepancy> out;
  for (std::size_t i = 0; i < kEstimators.size(); ++i) {
    for (std::size_t j = i + 1; j < kEstimators.size(); ++j) {
      const auto x = estimate(kEstimators[i]);
      const auto y = estimate(kEstimators[j]);
      if (!x || !y) continue;
      out.push_back({kEstimators[i], kEstimators[j], std::abs(*x - *y), relative(*x, *y)});
    }
  }
  return out;
}

double VariationReport::max_rel() const {
  double worst = 0.0;
  for (const Discrepancy& d : discrepancies()) worst = std::max(worst, d.rel);
  return worst;
}

bool VariationReport::passed() const {
  std::string reference = estimate("fd_oracle") ? "fd_oracle" : "boundary";
  const auto ref = estimate(reference);
  if (!ref) return false;
  for (const auto& [name, value] : estimates_) {
    if (name == reference) continue;
    const double tol = name == "volume" ? tolerances.volume : tolerances.boundary;
    if (!(relative(value, *ref) < tol) && !(std::abs(value - *ref) < tolerances.abs_floor)) return false;
  }
  if (estimate("volume") && !volume_detail.converged) return false;
  return skipped_.empty();
}

nlohmann::json VariationReport::to_json() const {
  nlohmann::json est = nlohmann::json::object();
  for (const char* name : kEstimators) {
    if (const auto v = estimate(name)) est[name] = *v;
  }
  nlohmann::json skipped = nlohmann::json::object();
  for (const auto& [name, reason] : skipped_) skipped[name] = reason;
  nlohmann::json pairs = nlohmann::json::array();
  for (const Discrepancy& d : discrepancies()) {
    pairs.push_back({{"first", d.first}, {"second", d.second}, {"abs", d.abs}, {"rel", d.rel}});
  }
  return nlohmann::json{
      {"estimates", est},
      {"skipped", skipped},
      {"discrepancies", {{"pairs", pairs}, {"max_rel", max_rel()}}},
      {"volume_detail",
       {{"integral", volume_detail.integral},
        {"source_pairing", volume_detail.source_pairing},
        {"half_resolution_value", volume_detail.half_value},
        {"converged", volume_detail.converged}}},
      {"fd_detail", {{"dt", fd_dt}, {"half_dt_value", fd_half_dt}, {"richardson", fd_richardson}}},
      {"tolerances",
       {{"boundary", tolerances.boundary}, {"volume", tolerances.volume}, {"abs_floor", tolerances.abs_floor}}},
      {"params", params},
      {"passed", passed()},
  };
}

VariationReport build_report(const DomainFamily& family, const MetricField& metric, const Point& a, const Point& b,
                             const VariationOptions& options) {
  check_poles(a, b);
  VariationReport report;
  report.tolerances = options.tol;
  report.fd_dt = options.fd_dt.value_or(default_fd_step(family));
  report.params = {{"boundary_nodes", options.boundary_nodes},
                   {"n_r", options.quad.n_r},
                   {"n_theta", options.quad.n_theta},
                   {"n_patch", options.quad.n_patch},
                   {"fd_dt", report.fd_dt},
                   {"t_max", family.t_max()},
                   {"velocity_extension", to_string(options.extension)}};
  if (options.quad.rho) report.params["rho"] = *options.quad.rho;

  auto guarded = [&](const char* name, auto&& compute) {
    try {
      report.set_estimate(name, compute());
    } catch (const Error& e) {
      report.skip(name, e.what());
    }
  };
  guarded("boundary", [&] { return boundary_variation(family, a, b, options.boundary_nodes); });
  guarded("volume", [&] {
    report.volume_detail =
        volume_variation(family, metric, a, b, options.quad, options.tol.volume, options.extension);
    return report.volume_detail.value;
  });
  guarded("flux", [&] { return flux_variation(family, metric, a, b, options.boundary_nodes); });
  guarded("fd_oracle", [&] {
    const double full = fd_oracle(family, a, b, report.fd_dt);
    report.fd_half_dt = fd_oracle(family, a, b, 0.5 * report.fd_dt);
    report.fd_richardson = (4.0 * report.fd_half_dt - full) / 3.0;
    return full;
  });
  return report;
}

}  // namespace hadamard
