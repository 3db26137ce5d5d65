#include "hadamard/domains.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hadamard/error.hpp"

namespace hadamard {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kGateBoundary = 720;
constexpr int kGateRadial = 50;
constexpr int kGateAngular = 72;
constexpr double kGateRelativeFloor = 1e-6;
constexpr int kNewtonSteps = 50;

Complex unit(double theta) { return std::polar(1.0, theta); }

std::optional<Complex> newton(const Polynomial& f, Complex x, Complex z) {
  const double tol = 1e-15 * (1.0 + std::abs(x));
  for (int it = 0; it < kNewtonSteps; ++it) {
    const Complex residual = f(z) - x;
    if (std::abs(residual) <= tol) return z;
    const Complex d = f.derivative(z);
    if (d == Complex{0.0, 0.0} || !std::isfinite(std::abs(d))) return std::nullopt;
    const Complex step = residual / d;
    z -= step;
    if (!std::isfinite(std::abs(z))) return std::nullopt;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) {
      // stagnated at roundoff level; accept if the residual is tiny
      if (std::abs(f(z) - x) <= 1e-12 * (1.0 + std::abs(x))) return z;
      return std::nullopt;
    }
  }
  if (std::abs(f(z) - x) <= 1e-13 * (1.0 + std::abs(x))) return z;
  return std::nullopt;
}

std::vector<Complex> parse_coeffs(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) throw Error(ErrorKind::Configuration, fmt::format("\"{}\" must be an array of [re, im] pairs", field));
  std::vector<Complex> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& pair = j[k];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw Error(ErrorKind::Configuration, fmt::format("\"{}\"[{}] must be a [re, im] pair of numbers", field, k));
    }
    out.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  return out;
}

nlohmann::json coeffs_json(const Polynomial& p) {
  auto arr = nlohmann::json::array();
  for (const Complex& c : p.coeffs()) arr.push_back({c.real(), c.imag()});
  return arr;
}

}  // namespace

// ---- Polynomial -------------------------------------------------------------

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back() == Complex{0.0, 0.0}) coeffs_.pop_back();
}

Complex Polynomial::operator()(Complex z) const {
  Complex acc{0.0, 0.0};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = (acc + *it) * z;
  return acc;
}

Complex Polynomial::derivative(Complex z) const {
  Complex acc{0.0, 0.0};
  for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * z + static_cast<double>(k + 1) * coeffs_[k];
  return acc;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  std::vector<Complex> out(std::max(coeffs_.size(), other.coeffs_.size()), Complex{0.0, 0.0});
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out[k] += coeffs_[k];
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) out[k] += other.coeffs_[k];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::scaled(double s) const {
  std::vector<Complex> out = coeffs_;
  for (Complex& c : out) c *= s;
  return Polynomial(std::move(out));
}

// ---- injectivity ----------------------------------------------------------------

InjectivityReport injectivity_gate(const Polynomial& f) {
  InjectivityReport report;
  if (f.coeffs().empty() || f.coeffs().front() == Complex{0.0, 0.0}) return report;
  const double scale = std::abs(f.coeffs().front());

  double min_abs = std::numeric_limits<double>::infinity();
  double winding = 0.0;
  Complex prev = f.derivative(unit(0.0));
  for (int m = 0; m < kGateBoundary; ++m) {
    const Complex d = f.derivative(unit(kTwoPi * m / kGateBoundary));
    min_abs = std::min(min_abs, std::abs(d));
    if (m > 0) winding += std::arg(d / prev);
    prev = d;
  }
  winding += std::arg(f.derivative(unit(0.0)) / prev);
  for (int i = 0; i < kGateRadial; ++i) {
    const double r = static_cast<double>(i) / kGateRadial;
    for (int j = 0; j < kGateAngular; ++j) {
      min_abs = std::min(min_abs, std::abs(f.derivative(std::polar(r, kTwoPi * j / kGateAngular))));
    }
  }
  report.min_abs_derivative = min_abs / scale;
  report.derivative_winding = static_cast<int>(std::lround(winding / kTwoPi));
  report.passed = std::isfinite(min_abs) && report.min_abs_derivative > kGateRelativeFloor &&
                  report.derivative_winding == 0;
  return report;
}

// ---- ConformalMap -----------------------------------------------------------------

ConformalMap::ConformalMap(Polynomial f) : f_(std::move(f)) {
  const InjectivityReport gate = injectivity_gate(f_);
  if (!gate.passed) {
    throw Error(ErrorKind::Injectivity,
                fmt::format("min |f'|/|c1| = {:.3e}, winding of f' = {}", gate.min_abs_derivative,
                            gate.derivative_winding));
  }
}

ConformalMap ConformalMap::identity() { return ConformalMap(Polynomial({Complex{1.0, 0.0}})); }

Complex ConformalMap::inverse(Complex x) const {
  const Complex c1 = f_.coeffs().front();
  if (auto z = newton(f_, x, x / c1)) return *z;
  // fallback: best start on a coarse polar scan of the closed disk
  Complex best = x / c1;
  double best_res = std::abs(f_(best) - x);
  for (int j = 0; j < 72; ++j) {
    for (int i = 1; i <= 10; ++i) {
      const Complex z = std::polar(0.1 * i, kTwoPi * j / 72.0);
      const double res = std::abs(f_(z) - x);
      if (res < best_res) {
        best_res = res;
        best = z;
      }
    }
  }
  if (auto z = newton(f_, x, best)) return *z;
  throw Error(ErrorKind::MapInversion, fmt::format("Newton did not converge for x = ({}, {})", x.real(), x.imag()));
}

bool ConformalMap::contains(Complex x, double tol) const { return std::abs(inverse(x)) < 1.0 - tol; }

// ---- DomainFamily -------------------------------------------------------------------

double DomainFamily::scan_t_max(const Polynomial& base, const Polynomial& perturbation, double step, double limit) {
  const int steps = static_cast<int>(std::lround(limit / step));
  for (int k = 1; k <= steps; ++k) {
    const double t = k * step;
    if (!injectivity_gate(base + perturbation.scaled(t)).passed ||
        !injectivity_gate(base + perturbation.scaled(-t)).passed) {
      return 0.5 * t;
    }
  }
  return 0.5 * limit;
}

DomainFamily::DomainFamily(Polynomial base, Polynomial perturbation, std::optional<double> t_max)
    : base_(std::move(base)), perturbation_(std::move(perturbation)), t_max_(0.0) {
  if (!injectivity_gate(base_).passed) throw Error(ErrorKind::Injectivity, "base map fails the injectivity gate");
  if (t_max) {
    if (!(*t_max > 0.0) || !std::isfinite(*t_max)) throw Error(ErrorKind::Configuration, "t_max must be positive");
    if (!injectivity_gate(polynomial_at(*t_max)).passed || !injectivity_gate(polynomial_at(-*t_max)).passed) {
      throw Error(ErrorKind::Injectivity, fmt::format("family fails the injectivity gate at |t| = t_max = {}", *t_max));
    }
    t_max_ = *t_max;
  } else {
    t_max_ = scan_t_max(base_, perturbation_);
  }
}

std::vector<std::string> builtin_family_names() {
  return {"dilation", "rotation", "quadratic", "cubic", "generic", "mapped"};
}

DomainFamily builtin_family(const std::string& name) {
  const Polynomial id({Complex{1.0, 0.0}});
  if (name == "dilation") return DomainFamily(id, Polynomial({Complex{1.0, 0.0}}));
  if (name == "rotation") return DomainFamily(id, Polynomial({Complex{0.0, 1.0}}));
  if (name == "quadratic") return DomainFamily(id, Polynomial({Complex{0.0}, Complex{1.0, 0.0}}));
  if (name == "cubic") return DomainFamily(id, Polynomial({Complex{0.0}, Complex{0.0}, Complex{1.0, 0.0}}));
  if (name == "generic") return DomainFamily(id, Polynomial({Complex{0.0}, Complex{0.05, 0.0}, Complex{0.03, 0.0}}));
  if (name == "mapped") {
    return DomainFamily(Polynomial({Complex{1.0, 0.0}, Complex{0.1, 0.0}}),
                        Polynomial({Complex{0.0}, Complex{0.0, 0.02}, Complex{0.05, 0.0}}));
  }
  throw Error(ErrorKind::Configuration, fmt::format("unknown built-in family \"{}\"", name));
}

nlohmann::json family_to_json(const DomainFamily& family) {
  return nlohmann::json{{"base", coeffs_json(family.base())},
                        {"perturbation", coeffs_json(family.perturbation())},
                        {"t_max", family.t_max()}};
}

DomainFamily family_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Configuration, "domain family must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "base" && key != "perturbation" && key != "t_max") {
      throw Error(ErrorKind::Configuration, fmt::format("unknown field \"{}\" in domain family", key));
    }
  }
  if (!j.contains("base")) throw Error(ErrorKind::Configuration, "domain family is missing \"base\"");
  if (!j.contains("perturbation")) throw Error(ErrorKind::Configuration, "domain family is missing \"perturbation\"");
  std::optional<double> t_max;
  if (j.contains("t_max")) {
    if (!j["t_max"].is_number()) throw Error(ErrorKind::Configuration, "\"t_max\" must be a number");
    t_max = j["t_max"].get<double>();
  }
  Polynomial base(parse_coeffs(j["base"], "base"));
  if (base.coeffs().empty() || base.coeffs().front() == Complex{0.0, 0.0}) {
    throw Error(ErrorKind::Configuration, "\"base\" must have a nonzero linear coefficient c1");
  }
  return DomainFamily(std::move(base), Polynomial(parse_coeffs(j["perturbation"], "perturbation")), t_max);
}

// ---- velocity and boundary data ---------------------------------------------------------

std::string to_string(VelocityExtension ext) {
  return ext == VelocityExtension::Holomorphic ? "holomorphic" : "radial_blend";
}

VelocityExtension velocity_extension_from_string(const std::string& name) {
  if (name == "holomorphic") return VelocityExtension::Holomorphic;
  if (name == "radial_blend") return VelocityExtension::RadialBlend;
  throw Error(ErrorKind::Configuration, fmt::format("unknown velocity extension \"{}\"", name));
}

VectorFieldDesc velocity_field(const DomainFamily& family, VelocityExtension extension) {
  const ConformalMap base = family.map_at(0.0);
  const Polynomial h = family.perturbation();
  const bool blend = extension == VelocityExtension::RadialBlend;
  VectorFieldDesc v;
  v.dim = 2;
  v.eval = [base, h, blend](const Point& x) -> Vec {
    check_point(x, 2);
    const Complex z = base.inverse(to_complex(x));
    const Complex w = blend ? std::norm(z) * h(z) : h(z);
    return Vec{{w.real(), w.imag()}};
  };
  v.jacobian = [base, h, blend](const Point& x) -> Mat {
    check_point(x, 2);
    const Complex z = base.inverse(to_complex(x));
    const Complex dz_dx = 1.0 / base.derivative(z);
    // Wirtinger derivatives of V(x): A = dV/dx, B = dV/dconj(x)
    Complex A = h.derivative(z) * dz_dx;
    Complex B{0.0, 0.0};
    if (blend) {
      A = (std::conj(z) * h(z) + std::norm(z) * h.derivative(z)) * dz_dx;
      B = z * h(z) * std::conj(dz_dx);
    }
    const Complex d1 = A + B;
    const Complex d2 = Complex{0.0, 1.0} * (A - B);
    Mat jac(2, 2);
    jac << d1.real(), d2.real(), d1.imag(), d2.imag();
    return jac;
  };
  return v;
}

namespace {

BoundaryGrid grid_for(const Polynomial& f, const Polynomial* h, std::size_t count) {
  if (count < 3) throw Error(ErrorKind::Configuration, "boundary grid needs at least 3 nodes");
  BoundaryGrid grid;
  grid.params.reserve(count);
  grid.nodes.reserve(count);
  grid.normals.reserve(count);
  grid.weights.reserve(count);
  grid.normal_speed.reserve(count);
  const double dtheta = kTwoPi / static_cast<double>(count);
  for (std::size_t m = 0; m < count; ++m) {
    const Complex zeta = unit(dtheta * static_cast<double>(m));
    const Complex d = f.derivative(zeta);
    const Complex n = zeta * d / std::abs(d);
    grid.params.push_back(zeta);
    grid.nodes.push_back(to_point(f(zeta)));
    grid.normals.push_back(to_point(n));
    grid.weights.push_back(std::abs(d) * dtheta);
    grid.normal_speed.push_back(h ? std::real((*h)(zeta) * std::conj(n)) : 0.0);
  }
  return grid;
}

}  // namespace

BoundaryGrid boundary_grid(const DomainFamily& family, double t, std::size_t count) {
  if (std::abs(t) > family.t_max() * (1.0 + 1e-12)) {
    throw Error(ErrorKind::Injectivity, fmt::format("|t| = {} exceeds the family's t_max = {}", std::abs(t), family.t_max()));
  }
  const ConformalMap map = family.map_at(t);
  return grid_for(map.polynomial(), &family.perturbation(), count);
}

BoundaryGrid boundary_grid(const ConformalMap& map, std::size_t count) {
  return grid_for(map.polynomial(), nullptr, count);
}

std::vector<double> normal_speed(const BoundaryGrid& grid, const VectorFieldDesc& v) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) out.push_back(v.eval(grid.nodes[m]).dot(grid.normals[m]));
  return out;
}

double boundary_area(const BoundaryGrid& grid) {
  double area = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) area += 0.5 * grid.nodes[m].dot(grid.normals[m]) * grid.weights[m];
  return area;
}

}  // namespace hadamard
