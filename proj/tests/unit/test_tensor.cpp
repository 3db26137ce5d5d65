#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hadamard/error.hpp"
#include "hadamard/tensor.hpp"
#include "oracles.hpp"

using namespace hadamard;
using oracle::pt;

namespace {

MetricField constant_metric(const Mat& g) {
  MetricField m;
  m.dim = static_cast<int>(g.rows());
  m.eval = [g](const Point&) { return g; };
  return m;
}

// phi = 0.3 x + 0.5 y^2 + 0.2 x y
double test_phi(const Point& x) { return 0.3 * x(0) + 0.5 * x(1) * x(1) + 0.2 * x(0) * x(1); }
Vec test_grad_phi(const Point& x) { return Vec{{0.3 + 0.2 * x(1), x(1) + 0.2 * x(0)}}; }

MetricField test_conformal() { return conformal_metric(2, test_phi, test_grad_phi); }

MetricField linear_phi_metric() {
  return conformal_metric(2, [](const Point& x) { return x(0); }, [](const Point&) { return Vec{{1.0, 0.0}}; });
}

VectorFieldDesc field(std::function<Vec(const Point&)> f) {
  VectorFieldDesc v;
  v.dim = 2;
  v.eval = std::move(f);
  return v;
}

VectorFieldDesc identity_field() {
  VectorFieldDesc v = field([](const Point& x) { return Vec(x); });
  v.jacobian = [](const Point&) { return Mat(Mat::Identity(2, 2)); };
  return v;
}

VectorFieldDesc rotation_field() {
  VectorFieldDesc v = field([](const Point& x) { return Vec{{-x(1), x(0)}}; });
  v.jacobian = [](const Point&) { return Mat{{0.0, -1.0}, {1.0, 0.0}}; };
  return v;
}

Mat random_spd(std::mt19937_64& rng, double max_cond) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Mat a = Mat::NullaryExpr(2, 2, [&]() { return u(rng); });
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU);
  std::uniform_real_distribution<double> logc(0.0, std::log(max_cond));
  Vec s{{1.0, std::exp(logc(rng))}};
  return svd.matrixU() * s.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

TEST(Christoffel, EuclideanVanishes) {
  const Christoffel G = christoffel(euclidean_metric(3), Point{{0.3, -1.0, 2.0}});
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_EQ(G(k, i, j), 0.0);
}

TEST(Christoffel, ConformalLinearPhiAtOrigin) {
  const Christoffel G = christoffel(linear_phi_metric(), pt(0.0, 0.0));
  EXPECT_NEAR(G(0, 0, 0), 1.0, 1e-12);
  EXPECT_NEAR(G(0, 1, 1), -1.0, 1e-12);
  EXPECT_NEAR(G(1, 0, 1), 1.0, 1e-12);
  EXPECT_NEAR(G(1, 1, 0), 1.0, 1e-12);
  EXPECT_NEAR(G(0, 0, 1), 0.0, 1e-12);
  EXPECT_NEAR(G(1, 0, 0), 0.0, 1e-12);
  EXPECT_NEAR(G(1, 1, 1), 0.0, 1e-12);
}

TEST(Christoffel, MatchesConformalFormulaAtRandomPoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const MetricField g = test_conformal();
  for (int trial = 0; trial < 50; ++trial) {
    const Point x = pt(u(rng), u(rng));
    const Vec dphi = test_grad_phi(x);
    const Christoffel G = christoffel(g, x);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double expected = (k == i) * dphi(j) + (k == j) * dphi(i) - (i == j) * dphi(k);
          EXPECT_NEAR(G(k, i, j), expected, 1e-12);
        }
  }
}

TEST(Christoffel, AnalyticAndFiniteDifferenceAgree) {
  MetricField fd_only = test_conformal();
  fd_only.deriv = nullptr;
  const Point x = pt(0.4, -0.3);
  const Christoffel exact = christoffel(test_conformal(), x);
  const Christoffel approx = christoffel(fd_only, x);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(exact(k, i, j), approx(k, i, j), 1e-8);
}

TEST(Christoffel, DegenerateMetricIsAnError) {
  const MetricField bad = constant_metric(Mat{{1.0, 0.0}, {0.0, -1.0}});
  try {
    christoffel(bad, pt(0.0, 0.0));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMetric);
  }
  EXPECT_THROW(volume_density(constant_metric(Mat::Zero(2, 2)), pt(0, 0)), Error);
}

TEST(RaiseLower, EuclideanIsIdentity) {
  const Vec r = raise(euclidean_metric(2), pt(0.1, 0.2), Vec{{1.0, 2.0}});
  EXPECT_DOUBLE_EQ(r(0), 1.0);
  EXPECT_DOUBLE_EQ(r(1), 2.0);
}

TEST(RaiseLower, DiagonalMetric) {
  const Vec r = raise(constant_metric(Mat{{4.0, 0.0}, {0.0, 1.0}}), pt(0, 0), Vec{{1.0, 2.0}});
  EXPECT_NEAR(r(0), 0.25, 1e-15);
  EXPECT_NEAR(r(1), 2.0, 1e-15);
}

TEST(RaiseLower, DimensionMismatch) {
  try {
    raise(euclidean_metric(2), pt(0, 0), Vec{{1.0, 2.0, 3.0}});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  EXPECT_THROW(lower(euclidean_metric(2), Point{{0.0, 0.0, 0.0}}, Vec{{1.0, 2.0}}), Error);
}

TEST(RaiseLower, RandomSpdAgainstExplicitInverse) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat g = random_spd(rng, 1e4);
    const MetricField m = constant_metric(g);
    const Vec alpha{{u(rng), u(rng)}};
    const Vec up = raise(m, pt(0, 0), alpha);
    const Vec expected = g.inverse() * alpha;
    EXPECT_LT((up - expected).norm(), 1e-12 * expected.norm() * 1e4);
    EXPECT_LT((lower(m, pt(0, 0), up) - alpha).norm(), 1e-12 * (1.0 + alpha.norm()));
  }
}

TEST(RaiseLower, RaiseBothMatchesMatrixProduct) {
  const Mat g{{2.0, 0.3}, {0.3, 1.0}};
  const Mat t{{1.0, -0.5}, {-0.5, 2.0}};
  const Mat expected = g.inverse() * t * g.inverse();
  EXPECT_LT((raise_both(constant_metric(g), pt(0, 0), t) - expected).norm(), 1e-14);
}

TEST(CovariantDerivative, EuclideanDilationIsIdentity) {
  const Mat d = covariant_derivative_vector(euclidean_metric(2), identity_field(), pt(0.3, 0.4));
  EXPECT_LT((d - Mat::Identity(2, 2)).norm(), 1e-15);
}

TEST(CovariantDerivative, EuclideanRotationIsAntisymmetric) {
  const Mat d = covariant_derivative_vector(euclidean_metric(2), rotation_field(), pt(0.3, 0.4));
  EXPECT_LT((d - Mat{{0.0, -1.0}, {1.0, 0.0}}).norm(), 1e-15);
}

TEST(CovariantDerivative, ConstantFieldPicksUpChristoffel) {
  VectorFieldDesc v = field([](const Point&) { return Vec{{1.0, 0.0}}; });
  v.jacobian = [](const Point&) { return Mat(Mat::Zero(2, 2)); };
  const Mat d = covariant_derivative_vector(linear_phi_metric(), v, pt(0.0, 0.0));
  EXPECT_LT((d - Mat::Identity(2, 2)).norm(), 1e-12);
}

TEST(CovariantDerivative, FiniteDifferenceJacobianFallback) {
  const VectorFieldDesc v = field([](const Point& x) { return Vec{{x(0) * x(1), std::sin(x(0))}}; });
  const Mat d = covariant_derivative_vector(euclidean_metric(2), v, pt(1.0, 2.0));
  EXPECT_NEAR(d(0, 0), 2.0, 1e-8);
  EXPECT_NEAR(d(0, 1), 1.0, 1e-8);
  EXPECT_NEAR(d(1, 0), std::cos(1.0), 1e-8);
  EXPECT_NEAR(d(1, 1), 0.0, 1e-8);
}

TEST(Strain, DilationIsMetric) {
  EXPECT_EQ(strain_tensor(euclidean_metric(2), identity_field(), pt(0.2, -0.7)), Mat(Mat::Identity(2, 2)));
}

TEST(Strain, RotationIsExactlyZero) {
  const Mat d = strain_tensor(euclidean_metric(2), rotation_field(), pt(0.2, -0.7));
  EXPECT_EQ(d, Mat(Mat::Zero(2, 2)));
}

TEST(Strain, HandComputedBilinearField) {
  VectorFieldDesc v = field([](const Point& x) { return Vec{{x(0) * x(1), 0.0}}; });
  v.jacobian = [](const Point& x) { return Mat{{x(1), x(0)}, {0.0, 0.0}}; };
  const Mat d = strain_tensor(euclidean_metric(2), v, pt(1.0, 2.0));
  EXPECT_DOUBLE_EQ(d(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(d(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(d(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(d(1, 1), 0.0);
}

TEST(Strain, SymmetricUnderConformalMetric) {
  const VectorFieldDesc v = field([](const Point& x) { return Vec{{x(0) * x(1) + 0.3, x(0) * x(0) - x(1)}}; });
  const Mat d = strain_tensor(test_conformal(), v, pt(0.1, 0.6));
  EXPECT_EQ(d(0, 1), d(1, 0));
}

TEST(Divergence, EuclideanDilationAndRotation) {
  EXPECT_NEAR(divergence(euclidean_metric(2), identity_field(), pt(0.5, 0.5)), 2.0, 1e-15);
  EXPECT_NEAR(divergence(euclidean_metric(2), rotation_field(), pt(0.5, 0.5)), 0.0, 1e-15);
  VectorFieldDesc v3;
  v3.dim = 3;
  v3.eval = [](const Point& x) { return Vec(x); };
  EXPECT_NEAR(divergence(euclidean_metric(3), v3, Point{{0.1, 0.2, 0.3}}), 3.0, 1e-8);
}

TEST(Divergence, ConformalMatchesDensityFormula) {
  // (1/sqrt g) d_j (sqrt g v^j) with sqrt g = e^{2 phi} in 2D, by central differences
  const MetricField g = test_conformal();
  const Point x = pt(0.3, -0.2);
  auto flux = [&](const Point& y) { return Vec(std::exp(2.0 * test_phi(y)) * y); };
  const double h = 1e-5;
  double expected = 0.0;
  for (int j = 0; j < 2; ++j) {
    Point xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    expected += (flux(xp)(j) - flux(xm)(j)) / (2.0 * h);
  }
  expected /= std::exp(2.0 * test_phi(x));
  EXPECT_NEAR(divergence(g, identity_field(), x), expected, 1e-8);
}

TEST(VolumeDensity, Examples) {
  EXPECT_DOUBLE_EQ(volume_density(euclidean_metric(2), pt(0, 0)), 1.0);
  EXPECT_NEAR(volume_density(constant_metric(Mat{{4.0, 0.0}, {0.0, 9.0}}), pt(0, 0)), 6.0, 1e-14);
  const Point x = pt(0.4, 0.7);
  EXPECT_NEAR(volume_density(test_conformal(), x), std::exp(2.0 * test_phi(x)), 1e-14);
}

TEST(Trace, MetricAndZero) {
  const MetricField g = test_conformal();
  const Point x = pt(-0.1, 0.3);
  EXPECT_NEAR(trace_tensor(g, x, metric_at(g, x)), 2.0, 1e-14);
  EXPECT_EQ(trace_tensor(g, x, Mat::Zero(2, 2)), 0.0);
  EXPECT_THROW(trace_tensor(g, x, Mat::Zero(3, 3)), Error);
}

TEST(MetricCompatibility, ConformalMetricResidualSmall) {
  for (const Point& x : {pt(0.0, 0.0), pt(0.5, -0.3), pt(-0.8, 0.6)}) {
    EXPECT_LT(metric_compatibility_residual(test_conformal(), x, 1e-4), 1e-6);
  }
}

TEST(FiniteDifference, SecondOrderAgainstAnalyticDerivative) {
  const MetricField g = test_conformal();
  const Point x = pt(0.35, 0.45);
  const MetricDerivative exact = metric_derivative(g, x);
  auto err = [&](double h) {
    const MetricDerivative fd = metric_derivative_fd(g, x, h);
    double e = 0.0;
    for (std::size_t k = 0; k < fd.size(); ++k) e = std::max(e, (fd[k] - exact[k]).cwiseAbs().maxCoeff());
    return e;
  };
  const double ratio = err(2e-2) / err(1e-2);
  EXPECT_NEAR(ratio, 4.0, 0.8);

  const VectorFieldDesc v = field([](const Point& y) { return Vec{{std::sin(y(0)) * y(1), std::exp(y(0) - y(1))}}; });
  const Mat jac{{std::cos(x(0)) * x(1), std::sin(x(0))},
                {std::exp(x(0) - x(1)), -std::exp(x(0) - x(1))}};
  const double r2 = (field_jacobian_fd(v, x, 2e-2) - jac).cwiseAbs().maxCoeff() /
                    (field_jacobian_fd(v, x, 1e-2) - jac).cwiseAbs().maxCoeff();
  EXPECT_NEAR(r2, 4.0, 0.8);
}

TEST(FiniteDifference, DefaultStepScalesWithPoint) {
  EXPECT_DOUBLE_EQ(default_fd_step(pt(0.0, 0.0)), 1e-5);
  EXPECT_DOUBLE_EQ(default_fd_step(pt(3.0, 4.0)), 6e-5);
}
