#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tmap/error.hpp"
#include "tmap/optimize.hpp"
#include "tmap/targets.hpp"
#include "tmap/triangular_map.hpp"

namespace tmap {
namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

TEST(Standardizer, FitsUnbiasedMoments) {
  SampleMatrix x(2, 1);
  x << 0.0, 2.0;
  const auto s = Standardizer::fit(x);
  EXPECT_DOUBLE_EQ(s.mean()[0], 1.0);
  EXPECT_NEAR(s.stddev()[0], std::sqrt(2.0), 1e-15);
}

TEST(Standardizer, StandardizedColumnsHaveUnitMoments) {
  const SampleMatrix x = sample(TargetSpec::banana(), 500, 4);
  const auto s = Standardizer::fit(x);
  const SampleMatrix u = s.standardize(x);
  for (int j = 0; j < 2; ++j) {
    const double m = u.col(j).mean();
    const double v = (u.col(j).array() - m).square().sum() / (u.rows() - 1);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v, 1.0, 1e-10);
  }
  for (Eigen::Index i = 0; i < 20; ++i) {
    const auto back = s.destandardize(s.standardize(row_span(x, i)));
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(back[j], x(i, j), 1e-12 * std::max(1.0, std::abs(x(i, j))));
  }
}

TEST(Standardizer, RejectsDegenerateData) {
  SampleMatrix c(3, 1);
  c << 5.0, 5.0, 5.0;
  EXPECT_THROW(Standardizer::fit(c), DegenerateDataError);
  SampleMatrix one(1, 2);
  one << 1.0, 2.0;
  EXPECT_THROW(Standardizer::fit(one), DegenerateDataError);
}

TEST(TriangularMap, ForwardExamples) {
  const auto id = TriangularMap::identity(2);
  const std::vector<double> a{0.2, -1.0};
  const auto za = id.forward(a);
  EXPECT_DOUBLE_EQ(za[0], 0.2);
  EXPECT_DOUBLE_EQ(za[1], -1.0);

  const auto g = testing::gaussian_map();
  const std::vector<double> b{1.0, 0.8};
  const auto zb = g.forward(b);
  EXPECT_NEAR(zb[0], 1.0, 1e-15);
  EXPECT_NEAR(zb[1], 0.0, 1e-15);

  const std::vector<double> p{1.0, 5.0}, q{1.0, -5.0};
  EXPECT_EQ(g.forward(p)[0], g.forward(q)[0]);
}

TEST(TriangularMap, LogDeterminant) {
  const std::vector<double> x{0.3, -0.4};
  EXPECT_DOUBLE_EQ(TriangularMap::identity(2).log_det_jacobian(x), 0.0);
  EXPECT_NEAR(testing::gaussian_map().log_det_jacobian(x), std::log(1.0 / 0.6), 1e-14);
}

TEST(TriangularMap, LogDeterminantMatchesFiniteDifferenceJacobian) {
  CounterRng rng(8);
  for (auto kind : {ComponentKind::Marginal, ComponentKind::Separable, ComponentKind::CrossTerm}) {
    const auto map = testing::random_map(kind, 3, 21, 3);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> x(3);
      for (auto& v : x) v = rng.normal();
      Eigen::Matrix3d J;
      const double h = 1e-6;
      for (int j = 0; j < 3; ++j) {
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const auto fp = map.forward(xp), fm = map.forward(xm);
        for (int i = 0; i < 3; ++i) J(i, j) = (fp[i] - fm[i]) / (2 * h);
      }
      // The standardizer's Jacobian is excluded from log_det_jacobian.
      double log_sd = 0.0;
      for (double s : map.standardizer().stddev()) log_sd += std::log(s);
      const double fd = std::log(std::abs(J.determinant())) + log_sd;
      const double an = map.log_det_jacobian(x);
      EXPECT_NEAR(an, fd, 1e-4 * std::max(1.0, std::abs(an))) << component_kind_name(kind);
    }
  }
}

TEST(TriangularMap, PullbackOfIdentityIsStandardNormal) {
  const std::vector<double> z1{0.0};
  EXPECT_NEAR(TriangularMap::identity(1).pullback_logpdf(z1), -kHalfLog2Pi, 1e-14);
  const std::vector<double> z2{0.0, 0.0};
  EXPECT_NEAR(TriangularMap::identity(2).pullback_logpdf(z2), -2 * kHalfLog2Pi, 1e-14);
}

TEST(TriangularMap, PullbackIntegratesToOne1D) {
  const SampleMatrix data = 0.5 * sample(TargetSpec::mixture_corners(), 2000, 9).leftCols(1);
  TemplateOptions o = testing::kind_options(ComponentKind::Separable);
  const auto map = fit_map_from_samples(make_template(1, o, &data), data).map;
  const int n = 2001;
  const double lo = -10.0, hi = 10.0, h = (hi - lo) / (n - 1);
  const auto w = testing::simpson_weights(n, h);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::vector<double> x{lo + i * h};
    total += w[static_cast<std::size_t>(i)] * std::exp(map.pullback_logpdf(x));
  }
  // Change of variables: the mass on [lo, hi] is Phi(z(hi)) - Phi(z(lo)).
  const auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  const std::vector<double> a{lo}, b{hi};
  const double inside = phi(map.forward(b)[0]) - phi(map.forward(a)[0]);
  EXPECT_NEAR(total, inside, 1e-6);
  EXPECT_GT(inside, 1.0 - 1e-5);
}

TEST(TriangularMap, InverseExamples) {
  const auto id = TriangularMap::identity(2);
  const std::vector<double> z{0.3, 0.7};
  const auto x = id.inverse(z);
  EXPECT_NEAR(x[0], 0.3, 1e-12);
  EXPECT_NEAR(x[1], 0.7, 1e-12);
  const std::vector<double> zg{1.0, 0.0};
  const auto xg = testing::gaussian_map().inverse(zg);
  EXPECT_NEAR(xg[0], 1.0, 1e-12);
  EXPECT_NEAR(xg[1], 0.8, 1e-12);
}

TEST(TriangularMap, RoundTripAllKinds) {
  for (auto kind : {ComponentKind::Marginal, ComponentKind::Separable, ComponentKind::CrossTerm}) {
    const auto map = testing::random_map(kind, 3, 55, 3);
    const SampleMatrix x = 2.0 * standard_normal_samples(1000, 3, 12);
    const SampleMatrix back = map.inverse(map.forward(x));
    EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-8) << component_kind_name(kind);
  }
}

TEST(TriangularMap, Triangularity) {
  const auto map = testing::random_map(ComponentKind::CrossTerm, 3, 4, 2);
  const std::vector<double> x{0.1, 0.2, 0.3};
  const auto base = map.forward(x);
  auto y = x;
  y[2] = -4.0;
  const auto moved = map.forward(y);
  EXPECT_EQ(moved[0], base[0]);
  EXPECT_EQ(moved[1], base[1]);
  y[1] = 2.5;
  EXPECT_EQ(map.forward(y)[0], base[0]);
}

TEST(TriangularMap, MarkovMapIgnoresDistantPast) {
  TemplateOptions o = testing::kind_options(ComponentKind::CrossTerm, 2);
  o.sparsity = Sparsity::Markov;
  CounterRng rng(6);
  std::vector<MapComponent> comps;
  for (const auto& c : make_template(3, o)) comps.push_back(testing::randomize(c, rng));
  const TriangularMap map(std::move(comps), Standardizer::identity(3));
  std::vector<double> x{0.5, -0.2, 1.1};
  const double z3 = map.forward(x)[2];
  for (double v : {-3.0, 0.0, 8.0}) {
    x[0] = v;
    EXPECT_EQ(map.forward(x)[2], z3);
  }
}

TEST(TriangularMap, ConditionalInverse) {
  const auto id = TriangularMap::identity(2);
  const std::vector<double> tail{0.3}, head{-7.0};
  EXPECT_NEAR(id.conditional_inverse(tail, head)[0], 0.3, 1e-12);

  const auto g = testing::gaussian_map();
  const std::vector<double> zero{0.0}, one{1.0};
  EXPECT_NEAR(g.conditional_inverse(zero, one)[0], 0.8, 1e-12);

  const std::vector<double> full{0.4, -0.9};
  const auto a = g.conditional_inverse(full, {});
  const auto b = g.inverse(full);
  EXPECT_EQ(a, b);
  const std::vector<double> two{1.0, 2.0};
  EXPECT_TRUE(g.conditional_inverse({}, two).empty());
}

TEST(TriangularMap, ConditionalGaussianMoments) {
  const auto g = testing::gaussian_map();
  const std::vector<double> head{1.0};
  const SampleMatrix s = g.sample_conditional(head, 20000, 3);
  const double m = s.col(0).mean();
  const double v = (s.col(0).array() - m).square().sum() / (s.rows() - 1);
  EXPECT_NEAR(m, 0.8, 0.02);
  EXPECT_NEAR(v, 0.36, 0.02);
}

TEST(TriangularMap, ConditionalInverseAgreesWithInverse) {
  const auto map = testing::random_map(ComponentKind::CrossTerm, 3, 70, 2);
  const SampleMatrix z = standard_normal_samples(50, 3, 1);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto x = map.inverse(row_span(z, i));
    const std::vector<double> head{x[0]};
    const std::vector<double> tail{z(i, 1), z(i, 2)};
    const auto c = map.conditional_inverse(tail, head);
    EXPECT_NEAR(c[0], x[1], 1e-10);
    EXPECT_NEAR(c[1], x[2], 1e-10);
  }
}

TEST(TriangularMap, CompositeWithOwnHeadReturnsSample) {
  const auto map = testing::random_map(ComponentKind::Separable, 3, 13, 3);
  const SampleMatrix x = standard_normal_samples(100, 3, 5);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const std::vector<double> head{x(i, 0), x(i, 1)};
    const auto tail = map.composite_conditional(row_span(x, i), head);
    EXPECT_NEAR(tail[0], x(i, 2), 1e-8);
  }
}

TEST(TriangularMap, SamplingIsDeterministicAndCentered) {
  const auto id = TriangularMap::identity(2);
  const Eigen::Index n = 10000;
  const SampleMatrix a = id.sample_pullback(n, 42);
  const SampleMatrix b = id.sample_pullback(n, 42, 3);
  EXPECT_EQ(a, b);
  for (int j = 0; j < 2; ++j) EXPECT_LE(std::abs(a.col(j).mean()), 4.0 / std::sqrt(double(n)));
}

TEST(TriangularMap, GaussianMapReproducesCovariance) {
  const SampleMatrix x = testing::gaussian_map().sample_pullback(100000, 9);
  const Eigen::RowVectorXd m = x.colwise().mean();
  const Eigen::MatrixXd c = (x.rowwise() - m).transpose() * (x.rowwise() - m) / double(x.rows() - 1);
  EXPECT_NEAR(c(0, 0), 1.0, 0.02);
  EXPECT_NEAR(c(1, 1), 1.0, 0.02);
  EXPECT_NEAR(c(0, 1), 0.8, 0.02);
}

TEST(TriangularMap, RejectsNonTriangularComponents) {
  std::vector<MapComponent> comps;
  comps.push_back(identity_component(1, ComponentKind::Separable));
  EXPECT_THROW(TriangularMap(comps, Standardizer::identity(1)), ParameterError);
}

}  // namespace
}  // namespace tmap
