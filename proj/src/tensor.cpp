#include "hadamard/tensor.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "hadamard/error.hpp"

namespace hadamard {

namespace {

void check_dim(const Point& x, int dim) { check_point(x, dim); }

Eigen::LLT<Mat> factor(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::DegenerateMetric, "Cholesky factorization failed (metric not positive definite)");
  }
  return llt;
}

}  // namespace

double default_fd_step(const Point& x) { return 1e-5 * (1.0 + x.norm()); }

void check_point(const Point& x, int dim) {
  if (dim < 2) {
    throw Error(ErrorKind::DimensionMismatch, fmt::format("ambient dimension must be >= 2, got {}", dim));
  }
  if (x.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch, fmt::format("point has {} coordinates, expected {}", x.size(), dim));
  }
  if (!x.allFinite()) throw Error(ErrorKind::Evaluation, "point has non-finite coordinates");
}

double Christoffel::max_asymmetry() const {
  double worst = 0.0;
  for (int k = 0; k < dim_; ++k)
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j) worst = std::max(worst, std::abs((*this)(k, i, j) - (*this)(k, j, i)));
  return worst;
}

void Christoffel::symmetrize() {
  for (int k = 0; k < dim_; ++k)
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j) {
        const double mean = 0.5 * ((*this)(k, i, j) + (*this)(k, j, i));
        (*this)(k, i, j) = mean;
        (*this)(k, j, i) = mean;
      }
}

MetricField euclidean_metric(int dim) {
  MetricField m;
  m.dim = dim;
  m.eval = [dim](const Point&) -> Mat { return Mat::Identity(dim, dim); };
  m.deriv = [dim](const Point&) { return MetricDerivative(static_cast<std::size_t>(dim), Mat::Zero(dim, dim)); };
  return m;
}

MetricField conformal_metric(int dim, std::function<double(const Point&)> phi,
                             std::function<Vec(const Point&)> grad_phi) {
  MetricField m;
  m.dim = dim;
  m.eval = [dim, phi](const Point& x) -> Mat { return std::exp(2.0 * phi(x)) * Mat::Identity(dim, dim); };
  m.deriv = [dim, phi, grad_phi](const Point& x) {
    const double scale = std::exp(2.0 * phi(x));
    const Vec dphi = grad_phi(x);
    MetricDerivative dg;
    dg.reserve(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) dg.push_back(2.0 * dphi(k) * scale * Mat::Identity(dim, dim));
    return dg;
  };
  return m;
}

Mat metric_at(const MetricField& metric, const Point& x) {
  check_dim(x, metric.dim);
  Mat g = metric.eval(x);
  if (g.rows() != metric.dim || g.cols() != metric.dim) {
    throw Error(ErrorKind::DimensionMismatch, "metric callback returned a matrix of the wrong size");
  }
  if (!g.allFinite()) throw Error(ErrorKind::DegenerateMetric, "metric has non-finite entries");
  const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * (1.0 + g.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::DegenerateMetric, fmt::format("metric not symmetric (asymmetry {:.3e})", asym));
  }
  factor(g);
  return g;
}

Mat inverse_metric(const MetricField& metric, const Point& x) {
  const Mat g = metric_at(metric, x);
  return factor(g).solve(Mat::Identity(metric.dim, metric.dim));
}

MetricDerivative metric_derivative_fd(const MetricField& metric, const Point& x, double h) {
  check_dim(x, metric.dim);
  MetricDerivative dg;
  dg.reserve(static_cast<std::size_t>(metric.dim));
  for (int k = 0; k < metric.dim; ++k) {
    Point xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    dg.push_back((metric.eval(xp) - metric.eval(xm)) / (2.0 * h));
  }
  return dg;
}

MetricDerivative metric_derivative(const MetricField& metric, const Point& x) {
  if (!metric.deriv) return metric_derivative_fd(metric, x, default_fd_step(x));
  check_dim(x, metric.dim);
  MetricDerivative dg = metric.deriv(x);
  if (static_cast<int>(dg.size()) != metric.dim) {
    throw Error(ErrorKind::DimensionMismatch, "metric derivative callback returned the wrong number of slices");
  }
  return dg;
}

Mat field_jacobian_fd(const VectorFieldDesc& v, const Point& x, double h) {
  check_dim(x, v.dim);
  Mat jac(v.dim, v.dim);
  for (int j = 0; j < v.dim; ++j) {
    Point xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (v.eval(xp) - v.eval(xm)) / (2.0 * h);
  }
  return jac;
}

Mat field_jacobian(const VectorFieldDesc& v, const Point& x) {
  if (!v.jacobian) return field_jacobian_fd(v, x, default_fd_step(x));
  check_dim(x, v.dim);
  return v.jacobian(x);
}

Christoffel christoffel(const MetricField& metric, const Point& x, Symmetrize sym) {
  const int n = metric.dim;
  const Mat ginv = inverse_metric(metric, x);
  const MetricDerivative dg = metric_derivative(metric, x);
  // first kind: [ij, l] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
  Christoffel gamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec first(n);
      for (int l = 0; l < n; ++l) first(l) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
      const Vec second = ginv * first;
      for (int k = 0; k < n; ++k) gamma(k, i, j) = second(k);
    }
  if (sym == Symmetrize::Yes) gamma.symmetrize();
  return gamma;
}

Vec raise(const MetricField& metric, const Point& x, const Vec& covector) {
  if (covector.size() != metric.dim) throw Error(ErrorKind::DimensionMismatch, "covector size does not match metric");
  const Mat g = metric_at(metric, x);
  return factor(g).solve(covector);
}

Vec lower(const MetricField& metric, const Point& x, const Vec& vector) {
  if (vector.size() != metric.dim) throw Error(ErrorKind::DimensionMismatch, "vector size does not match metric");
  return metric_at(metric, x) * vector;
}

Mat raise_both(const MetricField& metric, const Point& x, const Mat& covariant) {
  if (covariant.rows() != metric.dim || covariant.cols() != metric.dim) {
    throw Error(ErrorKind::DimensionMismatch, "tensor size does not match metric");
  }
  const Mat ginv = inverse_metric(metric, x);
  return ginv * covariant * ginv;
}

Mat covariant_derivative_vector(const MetricField& metric, const VectorFieldDesc& v, const Point& x) {
  if (v.dim != metric.dim) throw Error(ErrorKind::DimensionMismatch, "vector field and metric dimensions differ");
  const int n = metric.dim;
  const Christoffel gamma = christoffel(metric, x);
  const Vec vx = v.eval(x);
  Mat cov = field_jacobian(v, x);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += gamma(i, j, k) * vx(k);
      cov(i, j) += s;
    }
  return cov;
}

Mat strain_tensor(const MetricField& metric, const VectorFieldDesc& v, const Point& x) {
  const Mat g = metric_at(metric, x);
  const Mat lowered = g * covariant_derivative_vector(metric, v, x);  // v_{i;j}
  return 0.5 * (lowered + lowered.transpose());
}

double divergence(const MetricField& metric, const VectorFieldDesc& v, const Point& x) {
  return covariant_derivative_vector(metric, v, x).trace();
}

double volume_density(const MetricField& metric, const Point& x) {
  const Mat g = metric_at(metric, x);
  const auto llt = factor(g);
  // det g = prod(L_ii)^2
  return llt.matrixL().toDenseMatrix().diagonal().prod();
}

double trace_tensor(const MetricField& metric, const Point& x, const Mat& covariant) {
  if (covariant.rows() != metric.dim || covariant.cols() != metric.dim) {
    throw Error(ErrorKind::DimensionMismatch, "tensor size does not match metric");
  }
  return (inverse_metric(metric, x).cwiseProduct(covariant)).sum();
}

double metric_compatibility_residual(const MetricField& metric, const Point& x, double h) {
  const int n = metric.dim;
  const Mat g = metric_at(metric, x);
  const MetricDerivative dg = metric_derivative_fd(metric, x, h);
  const Christoffel gamma = christoffel(metric, x);
  double worst = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double r = dg[k](i, j);
        for (int l = 0; l < n; ++l) r -= gamma(l, k, i) * g(l, j) + gamma(l, k, j) * g(i, l);
        worst = std::max(worst, std::abs(r));
      }
  return worst;
}

}  // namespace hadamard
