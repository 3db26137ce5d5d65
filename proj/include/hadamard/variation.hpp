#pragma once

// Estimators of dG_{Omega(t)}(a, b)/dt at t = 0 with a, b held fixed in the
// plane:
//   boundary   closed-surface formula  sum (dG_a/dn)(dG_b/dn) dn dsigma
//   volume     integral of T^{ij} D_ij vol  +  v_i mu^i (two point evaluations)
//   flux       closed-surface flux of T^{ij} v_i n_j
//   fd_oracle  central difference of the exact mapped Green function in t

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hadamard/domains.hpp"
#include "hadamard/green.hpp"
#include "hadamard/quadrature.hpp"
#include "hadamard/tensor.hpp"

namespace hadamard {

inline constexpr std::size_t kDefaultBoundaryNodes = 256;

double boundary_variation(const DomainFamily& family, const Point& a, const Point& b,
                          std::size_t nodes = kDefaultBoundaryNodes);
/// Same formula for an arbitrary deformation field v on a fixed domain.
double boundary_variation(const ConformalMap& map, const VectorFieldDesc& v, const Point& a, const Point& b,
                          std::size_t nodes = kDefaultBoundaryNodes);

struct VolumeVariation {
  double value = 0.0;          // integral + v_i mu^i
  double integral = 0.0;       // integral of T^{ij} D_ij sqrt(g)
  double source_pairing = 0.0; // v_i(b) alpha^i(b) + v_i(a) beta^i(a) = -v_i mu^i
  double half_value = 0.0;     // value at half quadrature resolution
  bool converged = false;
};

VolumeVariation volume_variation(const DomainFamily& family, const MetricField& metric, const Point& a,
                                 const Point& b, const QuadParams& params = {}, double rel_tol = 5e-3,
                                 VelocityExtension extension = VelocityExtension::Holomorphic);
VolumeVariation volume_variation(const ConformalMap& map, const MetricField& metric, const VectorFieldDesc& v,
                                 const Point& a, const Point& b, const QuadParams& params = {},
                                 double rel_tol = 5e-3);

double flux_variation(const DomainFamily& family, const MetricField& metric, const Point& a, const Point& b,
                      std::size_t nodes = kDefaultBoundaryNodes);
double flux_variation(const ConformalMap& map, const MetricField& metric, const VectorFieldDesc& v, const Point& a,
                      const Point& b, std::size_t nodes = kDefaultBoundaryNodes);

/// 1e-4 * t_max.
double default_fd_step(const DomainFamily& family);
double fd_oracle(const DomainFamily& family, const Point& a, const Point& b, std::optional<double> dt = std::nullopt);

/// Boundary integral of the product of three normal derivatives, i.e. the
/// boundary formula with v = grad G(., c).
double triple_variation(const ConformalMap& map, const Point& a, const Point& b, const Point& c,
                        std::size_t nodes = kDefaultBoundaryNodes);
/// Values for the six orderings (abc, acb, bac, bca, cab, cba).
std::array<double, 6> triple_permutations(const ConformalMap& map, const Point& a, const Point& b, const Point& c,
                                          std::size_t nodes = kDefaultBoundaryNodes);

/// grad_x G(x, c) as a deformation field.
VectorFieldDesc green_gradient_field(const GreenFunction& green, const Point& c);

struct Tolerances {
  double boundary = 1e-5;  // boundary and flux, relative
  double volume = 5e-3;    // volume, relative
  double abs_floor = 1e-8; // values below this are compared absolutely
};

struct VariationOptions {
  std::size_t boundary_nodes = kDefaultBoundaryNodes;
  QuadParams quad;
  std::optional<double> fd_dt;
  Tolerances tol;
  VelocityExtension extension = VelocityExtension::Holomorphic;
};

struct Discrepancy {
  std::string first;
  std::string second;
  double abs = 0.0;
  double rel = 0.0;
};

class VariationReport {
 public:
  static constexpr std::array<const char*, 4> kEstimators{"boundary", "volume", "flux", "fd_oracle"};

  void set_estimate(const std::string& name, double value);
  void skip(const std::string& name, const std::string& reason);

  std::optional<double> estimate(const std::string& name) const;
  const std::map<std::string, double>& estimates() const { return estimates_; }
  const std::map<std::string, std::string>& skipped() const { return skipped_; }

  /// Pairwise discrepancies, recomputed from the stored estimates on each call.
  std::vector<Discrepancy> discrepancies() const;
  double max_rel() const;
  /// Every present estimator agrees with the reference (fd_oracle, else boundary)
  /// within its tolerance and the volume quadrature converged.
  bool passed() const;

  Tolerances tolerances;
  VolumeVariation volume_detail;
  double fd_dt = 0.0;
  double fd_half_dt = 0.0;
  double fd_richardson = 0.0;
  nlohmann::json params = nlohmann::json::object();

  nlohmann::json to_json() const;

 private:
  double relative(double x, double y) const;
  std::map<std::string, double> estimates_;
  std::map<std::string, std::string> skipped_;
};

VariationReport build_report(const DomainFamily& family, const MetricField& metric, const Point& a, const Point& b,
                             const VariationOptions& options = {});

}  // namespace hadamard
