#pragma once

// Dense tensor calculus over a user-supplied Riemannian metric in any dimension.
// Index conventions: Jacobians are J(i, j) = d v^i / d x^j, metric derivatives
// are dg[k](i, j) = d g_ij / d x^k, Christoffel symbols are gamma(k, i, j) = Γ^k_ij.

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace hadamard {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
/// Coordinates x^i of a point in the ambient chart.
using Point = Eigen::VectorXd;

/// Metric derivative: one n x n matrix per coordinate direction.
using MetricDerivative = std::vector<Mat>;

/// Default centered finite-difference step, h = 1e-5 (1 + |x|).
double default_fd_step(const Point& x);

/// Throws DimensionMismatch / Evaluation unless x has `dim` finite entries (dim >= 2).
void check_point(const Point& x, int dim);

struct MetricField {
  int dim = 2;
  std::function<Mat(const Point&)> eval;
  /// Optional analytic derivative; when empty a centered FD fallback is used.
  std::function<MetricDerivative(const Point&)> deriv;
};

struct VectorFieldDesc {
  int dim = 2;
  std::function<Vec(const Point&)> eval;
  /// Optional analytic Jacobian; when empty a centered FD fallback is used.
  std::function<Mat(const Point&)> jacobian;
};

enum class Slot { Up, Down };

/// Rank <= 2 tensor at a point with explicit index placement.
struct TensorAtPoint {
  Mat components;  // n x n for rank 2, n x 1 for rank 1, 1 x 1 for scalars
  std::vector<Slot> slots;
  bool symmetric = false;

  int rank() const { return static_cast<int>(slots.size()); }
};

class Christoffel {
 public:
  explicit Christoffel(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int k, int i, int j) { return data_[index(k, i, j)]; }
  double operator()(int k, int i, int j) const { return data_[index(k, i, j)]; }

  /// Largest |Γ^k_ij - Γ^k_ji|.
  double max_asymmetry() const;
  void symmetrize();

 private:
  std::size_t index(int k, int i, int j) const {
    return static_cast<std::size_t>((k * dim_ + i) * dim_ + j);
  }
  int dim_;
  std::vector<double> data_;
};

// ---- metric constructors -----------------------------------------------------

MetricField euclidean_metric(int dim);

/// g_ij = e^{2 phi(x)} delta_ij in any dimension, with analytic derivative.
MetricField conformal_metric(int dim, std::function<double(const Point&)> phi,
                             std::function<Vec(const Point&)> grad_phi);

// ---- metric evaluation --------------------------------------------------------

/// g_ij(x) after symmetry and positive-definiteness checks (DegenerateMetric).
Mat metric_at(const MetricField& metric, const Point& x);
Mat inverse_metric(const MetricField& metric, const Point& x);
MetricDerivative metric_derivative(const MetricField& metric, const Point& x);
MetricDerivative metric_derivative_fd(const MetricField& metric, const Point& x, double h);

Mat field_jacobian(const VectorFieldDesc& v, const Point& x);
Mat field_jacobian_fd(const VectorFieldDesc& v, const Point& x, double h);

// ---- operations ---------------------------------------------------------------

enum class Symmetrize { Yes, No };

Christoffel christoffel(const MetricField& metric, const Point& x, Symmetrize sym = Symmetrize::Yes);

Vec raise(const MetricField& metric, const Point& x, const Vec& covector);
Vec lower(const MetricField& metric, const Point& x, const Vec& vector);
/// T^{ij} = g^{ik} T_kl g^{lj}.
Mat raise_both(const MetricField& metric, const Point& x, const Mat& covariant);

/// v^i_{;j} = d_j v^i + Γ^i_{jk} v^k.
Mat covariant_derivative_vector(const MetricField& metric, const VectorFieldDesc& v, const Point& x);

/// D_ij = (v_{i;j} + v_{j;i}) / 2, i.e. half the Lie derivative of g along v.
Mat strain_tensor(const MetricField& metric, const VectorFieldDesc& v, const Point& x);

double divergence(const MetricField& metric, const VectorFieldDesc& v, const Point& x);

/// sqrt(det g).
double volume_density(const MetricField& metric, const Point& x);

double trace_tensor(const MetricField& metric, const Point& x, const Mat& covariant);

/// g_{ij;k} from finite differences of g plus Christoffel terms; zero for a
/// compatible connection up to FD error.
double metric_compatibility_residual(const MetricField& metric, const Point& x, double h);

}  // namespace hadamard
