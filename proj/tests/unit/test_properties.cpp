// Randomized invariants over fixed seeds.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hadamard/emt.hpp"
#include "hadamard/variation.hpp"
#include "oracles.hpp"

using namespace hadamard;
using oracle::pt;

namespace {

double distance_to_boundary(const ConformalMap& f, const Point& x) {
  const BoundaryGrid g = boundary_grid(f, 720);
  double d = std::numeric_limits<double>::infinity();
  for (const Point& y : g.nodes) d = std::min(d, (x - y).norm());
  return d;
}

// pole pairs in the image domain with separation and boundary distance > 0.2
std::vector<std::pair<Point, Point>> admissible_pairs(const ConformalMap& f, std::size_t n, unsigned seed) {
  std::vector<std::pair<Point, Point>> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] { return to_point(f(std::polar(0.8 * std::sqrt(u(rng)), oracle::kTwoPi * u(rng)))); };
  while (out.size() < n) {
    const Point a = draw();
    const Point b = draw();
    if ((a - b).norm() > 0.2 && distance_to_boundary(f, a) > 0.2 && distance_to_boundary(f, b) > 0.2) {
      out.emplace_back(a, b);
    }
  }
  return out;
}

double rel(double x, double y) { return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-8}); }

ConformalMetric2D test_conformal() {
  ConformalMetric2D m;
  m.terms = {{1, 0, 0.2}, {0, 1, -0.1}, {2, 0, 0.15}};
  return m;
}

}  // namespace

TEST(Property, FourWayAgreementOnBuiltins) {
  unsigned seed = 100;
  for (const std::string& name : builtin_family_names()) {
    const DomainFamily fam = builtin_family(name);
    for (const auto& [a, b] : admissible_pairs(fam.map_at(0.0), 4, seed++)) {
      VariationOptions o;
      o.extension = VelocityExtension::RadialBlend;
      const VariationReport r = build_report(fam, euclidean_metric(2), a, b, o);
      EXPECT_TRUE(r.passed()) << name << " a=" << a.transpose() << " b=" << b.transpose() << "\n"
                              << r.to_json().dump(2);
      const double bd = *r.estimate("boundary");
      const double fl = *r.estimate("flux");
      const double fd = *r.estimate("fd_oracle");
      const double vol = *r.estimate("volume");
      if (name == "rotation") {
        for (double v : {bd, fl, fd, vol}) EXPECT_LT(std::abs(v), 1e-8) << name;
        continue;
      }
      EXPECT_LT(rel(bd, fl), 1e-5) << name;
      EXPECT_LT(rel(bd, fd), 1e-5) << name;
      EXPECT_LT(rel(fl, fd), 1e-5) << name;
      EXPECT_LT(rel(vol, fd), 5e-3) << name;
    }
  }
}

TEST(Property, EstimatorsSymmetricInPoles) {
  const DomainFamily fam = builtin_family("mapped");
  for (const auto& [a, b] : admissible_pairs(fam.map_at(0.0), 5, 7)) {
    EXPECT_NEAR(boundary_variation(fam, a, b), boundary_variation(fam, b, a), 1e-12);
    EXPECT_NEAR(flux_variation(fam, euclidean_metric(2), a, b), flux_variation(fam, euclidean_metric(2), b, a), 1e-12);
    EXPECT_NEAR(fd_oracle(fam, a, b), fd_oracle(fam, b, a), 1e-12);
    const double vab =
        volume_variation(fam, euclidean_metric(2), a, b, {}, 5e-3, VelocityExtension::RadialBlend).value;
    const double vba =
        volume_variation(fam, euclidean_metric(2), b, a, {}, 5e-3, VelocityExtension::RadialBlend).value;
    EXPECT_LT(rel(vab, vba), 5e-3);
  }
}

TEST(Property, LinearInVelocity) {
  const Polynomial base({1.0, Complex(0.0, 0.05)});
  const Polynomial h1({0.0, Complex(0.1, 0.02)});
  const Polynomial h2({0.0, 0.0, Complex(-0.03, 0.04)});
  const DomainFamily f1(base, h1);
  const DomainFamily f2(base, h2);
  const DomainFamily f12(base, h1 + h2);
  const Point a = pt(0.15, -0.2);
  const Point b = pt(-0.3, 0.3);
  const MetricField g = euclidean_metric(2);
  EXPECT_NEAR(boundary_variation(f12, a, b), boundary_variation(f1, a, b) + boundary_variation(f2, a, b), 1e-12);
  EXPECT_NEAR(flux_variation(f12, g, a, b), flux_variation(f1, g, a, b) + flux_variation(f2, g, a, b), 1e-12);
  EXPECT_NEAR(fd_oracle(f12, a, b), fd_oracle(f1, a, b) + fd_oracle(f2, a, b), 1e-8);
  auto vol = [&](const DomainFamily& f) {
    return volume_variation(f, g, a, b, {}, 5e-3, VelocityExtension::RadialBlend).value;
  };
  EXPECT_NEAR(vol(f12), vol(f1) + vol(f2), 1e-8);
}

TEST(Property, ConformalVolumeMatchesFlat) {
  const MetricField conf = test_conformal().metric();
  for (const std::string& name : {"dilation", "generic", "mapped"}) {
    const DomainFamily fam = builtin_family(name);
    for (const auto& [a, b] : admissible_pairs(fam.map_at(0.0), 2, 300)) {
      for (VelocityExtension ext : {VelocityExtension::Holomorphic, VelocityExtension::RadialBlend}) {
        const double flat = volume_variation(fam, euclidean_metric(2), a, b, {}, 5e-3, ext).value;
        const double curved = volume_variation(fam, conf, a, b, {}, 5e-3, ext).value;
        EXPECT_LT(rel(curved, flat), 2.0 * 5e-3) << name;
      }
    }
  }
}

TEST(Property, ChristoffelRawSymmetry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    ConformalMetric2D m;
    m.terms = {{1, 0, 0.3 * u(rng)}, {0, 1, 0.3 * u(rng)}, {1, 1, 0.3 * u(rng)}, {0, 2, 0.3 * u(rng)}};
    const Point x = pt(u(rng), u(rng));
    const Christoffel raw = christoffel(m.metric(), x, Symmetrize::No);
    EXPECT_LT(raw.max_asymmetry(), 1e-10);
    EXPECT_EQ(christoffel(m.metric(), x).max_asymmetry(), 0.0);
  }
}

TEST(Property, TraceIdentityBothMetrics) {
  const GreenFunction g(builtin_family("generic").map_at(0.0));
  const ConformalMetric2D conf = test_conformal();
  for (const MetricField& metric : {euclidean_metric(2), conf.metric()}) {
    const PolarizedEMT emt = PolarizedEMT::from_green(g, metric, pt(0.1, 0.1), pt(-0.2, 0.3));
    for (const auto& z : oracle::disk_points(1000, 0.99, 77)) {
      const Point x = to_point(g.map()(z));
      if ((x - emt.pole_a()).norm() < 1e-6 || (x - emt.pole_b()).norm() < 1e-6) continue;
      const Mat t = emt.covariant(x);
      EXPECT_LT(std::abs(trace_tensor(metric, x, t)), 1e-10 * t.norm());
    }
  }
}

TEST(Property, GreenPositiveAtRandomSamples) {
  const GreenFunction g(builtin_family("mapped").map_at(0.0));
  const Point a = pt(0.2, -0.1);
  int negatives = 0;
  for (const auto& z : oracle::disk_points(10000, 0.9999, 91)) {
    const Point x = to_point(g.map()(z));
    if ((x - a).norm() < 1e-9) continue;
    negatives += g.eval(x, a) > 0.0 ? 0 : 1;
  }
  EXPECT_EQ(negatives, 0);
}
