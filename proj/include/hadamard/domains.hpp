#pragma once

// Model domains in the plane: images of the closed unit disk under injective
// polynomial maps f(z) = c1 z + ... + cK z^K, and linear deformation families
// f_t = f + t h. Points of the plane are identified with complex numbers.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hadamard/tensor.hpp"

namespace hadamard {

using Complex = std::complex<double>;

inline Complex to_complex(const Point& x) { return {x(0), x(1)}; }
inline Point to_point(Complex z) { return Point{{z.real(), z.imag()}}; }

/// p(z) = sum_k coeffs[k] z^{k+1}; p(0) = 0.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Complex> coeffs);

  const std::vector<Complex>& coeffs() const { return coeffs_; }
  Complex operator()(Complex z) const;
  Complex derivative(Complex z) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial scaled(double s) const;

 private:
  std::vector<Complex> coeffs_;
};

struct InjectivityReport {
  bool passed = false;
  double min_abs_derivative = 0.0;  // over both grids, relative to |c1|
  int derivative_winding = 0;       // winding number of f' around 0 on |z| = 1
};

/// Derivative gate on a 720-point boundary grid and a 50 x 72 interior polar
/// grid, plus a zero winding number of f' on the unit circle.
InjectivityReport injectivity_gate(const Polynomial& f);

/// Injective polynomial map of the closed unit disk; the constructor enforces
/// the injectivity gate.
class ConformalMap {
 public:
  explicit ConformalMap(Polynomial f);
  static ConformalMap identity();

  const Polynomial& polynomial() const { return f_; }
  Complex operator()(Complex z) const { return f_(z); }
  Complex derivative(Complex z) const { return f_.derivative(z); }

  /// Solve f(z) = x. Newton from x / c1, with a 72-direction scan as fallback
  /// start. Throws MapInversion after 50 failed Newton steps.
  Complex inverse(Complex x) const;
  /// True when f^{-1}(x) lies in the open unit disk (with margin `tol`).
  bool contains(Complex x, double tol = 0.0) const;

 private:
  Polynomial f_;
};

/// Linear one-parameter family f_t = base + t * perturbation.
class DomainFamily {
 public:
  /// Builds the family, validates the base and determines t_max by a scan when
  /// `t_max` is not given.
  DomainFamily(Polynomial base, Polynomial perturbation, std::optional<double> t_max = std::nullopt);

  const Polynomial& base() const { return base_; }
  const Polynomial& perturbation() const { return perturbation_; }
  double t_max() const { return t_max_; }

  Polynomial polynomial_at(double t) const { return base_ + perturbation_.scaled(t); }
  ConformalMap map_at(double t) const { return ConformalMap(polynomial_at(t)); }

  /// Half the smallest |t| (in steps of `step` up to `limit`) where the gate
  /// fails; limit / 2 when it never fails.
  static double scan_t_max(const Polynomial& base, const Polynomial& perturbation, double step = 0.01,
                           double limit = 2.0);

 private:
  Polynomial base_;
  Polynomial perturbation_;
  double t_max_;
};

/// Built-in families: dilation, rotation, quadratic, cubic, generic, mapped.
DomainFamily builtin_family(const std::string& name);
std::vector<std::string> builtin_family_names();

nlohmann::json family_to_json(const DomainFamily& family);
/// Accepts exactly the keys "base", "perturbation" and optionally "t_max".
DomainFamily family_from_json(const nlohmann::json& j);

struct BoundaryGrid {
  std::vector<Complex> params;    // zeta_m = e^{i theta_m} on the unit circle
  std::vector<Point> nodes;       // x_m = f_t(zeta_m)
  std::vector<Point> normals;     // unit outward normals
  std::vector<double> weights;    // arclength weights |f_t'(zeta_m)| 2 pi / M
  std::vector<double> normal_speed;  // v(x_m) . n_m for the family's velocity at t

  std::size_t size() const { return nodes.size(); }
};

/// Interior extension of the boundary velocity. Holomorphic is h(f^{-1}(x));
/// RadialBlend is |z|^2 h(z) with z = f^{-1}(x), which has the same values on
/// the boundary but is not a conformal vector field, so its strain tensor has
/// a nonzero trace-free part.
enum class VelocityExtension { Holomorphic, RadialBlend };

std::string to_string(VelocityExtension ext);
VelocityExtension velocity_extension_from_string(const std::string& name);

/// Velocity of the family at t = 0, with analytic Jacobian.
VectorFieldDesc velocity_field(const DomainFamily& family,
                               VelocityExtension extension = VelocityExtension::Holomorphic);

BoundaryGrid boundary_grid(const DomainFamily& family, double t, std::size_t count);
/// Grid of a fixed map; normal_speed is left zero.
BoundaryGrid boundary_grid(const ConformalMap& map, std::size_t count);

std::vector<double> normal_speed(const BoundaryGrid& grid, const VectorFieldDesc& v);

/// Area by Green's theorem over the boundary grid.
double boundary_area(const BoundaryGrid& grid);

}  // namespace hadamard
