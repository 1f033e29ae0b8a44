#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "tmap/basis.hpp"
#include "tmap/error.hpp"
#include "tmap/random.hpp"
#include "tmap/special.hpp"

namespace tmap {
namespace {

constexpr double kSqrtTau = 2.5066282746310002;

// Explicit polynomials, independent of the recurrence.
double he_closed(int n, double x) {
  switch (n) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return x * x - 1.0;
    case 3: return x * x * x - 3.0 * x;
    case 4: return std::pow(x, 4) - 6.0 * x * x + 3.0;
    case 5: return std::pow(x, 5) - 10.0 * std::pow(x, 3) + 15.0 * x;
  }
  return NAN;
}

TEST(Hermite, KnownValues) {
  EXPECT_DOUBLE_EQ(eval_hermite_poly(0, 1.7), 1.0);
  EXPECT_DOUBLE_EQ(eval_hermite_poly(1, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(eval_hermite_poly(3, 2.0), 2.0);
  for (int n = 0; n <= 5; ++n) {
    for (double x : {-2.3, -0.4, 0.0, 0.9, 3.1}) {
      EXPECT_NEAR(eval_hermite_poly(n, x), he_closed(n, x), 1e-12 * (1 + std::abs(he_closed(n, x))));
    }
  }
}

TEST(Hermite, RecurrenceHolds) {
  CounterRng rng(3);
  for (int j = 1; j <= 10; ++j) {
    for (int t = 0; t < 100; ++t) {
      const double x = -5.0 + 10.0 * rng.uniform();
      const double a = eval_hermite_poly(j + 1, x);
      const double b = x * eval_hermite_poly(j, x);
      const double c = j * eval_hermite_poly(j - 1, x);
      const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1.0});
      EXPECT_LE(std::abs(a - b + c) / scale, 1e-10);
    }
  }
}

TEST(Hermite, OrthogonalUnderGaussHermite) {
  // 64-node rule from Gauss-Legendre on a truncated range is too crude, so
  // build the probabilists' Gauss-Hermite nodes from the Jacobi matrix.
  const int n = 64;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const Eigen::VectorXd nodes = es.eigenvalues();
  const Eigen::VectorXd weights = es.eigenvectors().row(0).array().square();
  double fact[6] = {1, 1, 2, 6, 24, 120};
  for (int i = 0; i <= 5; ++i) {
    for (int j = 0; j <= 5; ++j) {
      double s = 0.0;
      for (int q = 0; q < n; ++q) s += weights[q] * eval_hermite_poly(i, nodes[q]) * eval_hermite_poly(j, nodes[q]);
      EXPECT_NEAR(s, i == j ? fact[j] : 0.0, 1e-6) << i << "," << j;
    }
  }
}

TEST(Hermite, DegreeLimit) {
  EXPECT_THROW(eval_hermite_poly(21, 0.0), ParameterError);
  EXPECT_NO_THROW(eval_hermite_poly(25, 0.0, 30));
  EXPECT_THROW(BasisFamily::hermite_poly(-1), ParameterError);
}

TEST(HermiteFunction, KnownValues) {
  EXPECT_DOUBLE_EQ(eval_hermite_function(2, 0.0), -1.0);
  EXPECT_DOUBLE_EQ(eval_hermite_function(3, 0.0), 0.0);
  EXPECT_LT(std::abs(eval_hermite_function(2, 40.0)), 1e-100);
  EXPECT_NEAR(eval_hermite_function(4, 1.3), he_closed(4, 1.3) * std::exp(-1.3 * 1.3 / 4), 1e-14);
}

TEST(HermiteFunction, LowDegreesAreUnweighted) {
  EXPECT_DOUBLE_EQ(eval_hermite_function(0, 7.0), 1.0);
  EXPECT_DOUBLE_EQ(eval_hermite_function(1, 7.0), 7.0);
  EXPECT_DOUBLE_EQ(BasisFamily::edge_controlled(1, 2.0).value(7.0), 7.0);
  EXPECT_DOUBLE_EQ(BasisFamily::edge_controlled(0, 2.0).value(7.0), 1.0);
}

TEST(EdgeControlled, RawEvaluatorWeightsEveryDegree) {
  EXPECT_DOUBLE_EQ(eval_edge_controlled(1, 1.0, 2.0), 0.5);
}

TEST(EdgeControlled, KnownValues) {
  EXPECT_DOUBLE_EQ(eval_edge_controlled(2, 0.0, 3.0), -1.0);
  EXPECT_DOUBLE_EQ(eval_edge_controlled(3, 3.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_edge_controlled(2, -3.0, 3.0), 0.0);
  // Degree >= 2 so the weight applies: He_2(1) = 0; use degree 3 at x = 1, r = 2.
  EXPECT_NEAR(eval_edge_controlled(3, 1.0, 2.0), -2.0 * 0.5, 1e-15);
  EXPECT_THROW(eval_edge_controlled(2, 0.0, 0.0), ParameterError);
  EXPECT_THROW(BasisFamily::edge_controlled(2, -1.0), ParameterError);
}

TEST(EdgeControlled, ZeroOutsideRadius) {
  for (int d = 2; d <= 6; ++d) {
    for (double x : {2.5, 2.5000001, 4.0, 100.0, -2.5, -50.0}) {
      EXPECT_EQ(eval_edge_controlled(d, x, 2.5), 0.0);
    }
  }
}

TEST(Rbf, KnownValues) {
  EXPECT_NEAR(eval_rbf_family(RbfKind::Rbf, 1.2, 1.2, 0.7), 1.0 / kSqrtTau, 1e-15);
  EXPECT_NEAR(eval_rbf_family(RbfKind::IntegratedRbf, -0.3, -0.3, 2.0), 0.5, 1e-15);
  EXPECT_THROW(eval_rbf_family(RbfKind::Rbf, 0.0, 0.0, 0.0), ParameterError);
  EXPECT_THROW(BasisFamily::rbf(RbfKind::LeftEdge, 0.0, -1.0), ParameterError);
}

TEST(Rbf, EdgeTermsSumToShift) {
  CounterRng rng(11);
  for (int t = 0; t < 1000; ++t) {
    const double mu = 4.0 * (rng.uniform() - 0.5);
    const double sigma = 0.05 + 3.0 * rng.uniform();
    const double x = mu + 20.0 * (rng.uniform() - 0.5);
    const double s = eval_rbf_family(RbfKind::LeftEdge, x, mu, sigma) +
                     eval_rbf_family(RbfKind::RightEdge, x, mu, sigma);
    EXPECT_NEAR(s, x - mu, 1e-12 * std::max(1.0, std::abs(x - mu)));
  }
}

TEST(Rbf, MatchesTextbookFormulas) {
  const double mu = 0.4, sigma = 0.8;
  for (double x : {-3.0, -0.2, 0.4, 1.1, 5.0}) {
    const double u = (x - mu) / (kSqrtTau * sigma);
    const double e = std::erf(u), g = std::exp(-u * u);
    EXPECT_NEAR(eval_rbf_family(RbfKind::Rbf, x, mu, sigma), g / kSqrtTau, 1e-15);
    EXPECT_NEAR(eval_rbf_family(RbfKind::IntegratedRbf, x, mu, sigma), 0.5 * (1 + e), 1e-15);
    EXPECT_NEAR(eval_rbf_family(RbfKind::LeftEdge, x, mu, sigma),
                0.5 * (sigma * kSqrtTau * u * (1 - e) - 4 * sigma / kSqrtTau * g), 1e-14);
    EXPECT_NEAR(eval_rbf_family(RbfKind::RightEdge, x, mu, sigma),
                0.5 * (sigma * kSqrtTau * u * (1 + e) + 4 * sigma / kSqrtTau * g), 1e-14);
  }
}

TEST(Rbf, MonotoneFamiliesAreNondecreasing) {
  const double mu = -0.5, sigma = 1.3;
  for (RbfKind kind : {RbfKind::IntegratedRbf, RbfKind::LeftEdge, RbfKind::RightEdge}) {
    double prev = -INFINITY;
    for (int i = 0; i < 1000; ++i) {
      const double x = mu - 10 * sigma + 20 * sigma * i / 999.0;
      const double v = eval_rbf_family(kind, x, mu, sigma);
      EXPECT_GE(v, prev - 1e-15);
      prev = v;
    }
  }
}

TEST(Erf, MatchesStd) {
  for (double x = -7.0; x <= 7.0; x += 0.013) {
    EXPECT_NEAR(special::erf(x), std::erf(x), 1e-15);
  }
}

std::vector<BasisFamily> all_families() {
  return {BasisFamily::constant(),
          BasisFamily::linear(),
          BasisFamily::hermite_poly(4),
          BasisFamily::hermite_function(3),
          BasisFamily::hermite_function(1),
          BasisFamily::edge_controlled(3, 2.5),
          BasisFamily::rbf(RbfKind::Rbf, 0.3, 0.9),
          BasisFamily::rbf(RbfKind::IntegratedRbf, -0.2, 1.4),
          BasisFamily::rbf(RbfKind::LeftEdge, 0.1, 0.6),
          BasisFamily::rbf(RbfKind::RightEdge, 0.7, 1.1)};
}

TEST(BasisFamily, DerivativesMatchFiniteDifferences) {
  CounterRng rng(5);
  const double h = 1e-5;
  for (const auto& f : all_families()) {
    for (int t = 0; t < 100; ++t) {
      const double x = -3.0 + 6.0 * rng.uniform();
      const double fd = (f.value(x + h) - f.value(x - h)) / (2 * h);
      const double an = f.derivative(x);
      EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::abs(an))) << f.name() << " at " << x;
    }
  }
}

TEST(BasisFamily, NamesRoundTrip) {
  for (const auto& f : all_families()) {
    EXPECT_EQ(BasisFamily::kind_from_name(f.name()), f.kind());
  }
  EXPECT_THROW(BasisFamily::kind_from_name("legendre"), ParameterError);
}

TEST(BasisFamily, MonotoneEligibility) {
  EXPECT_TRUE(BasisFamily::linear().monotone_eligible());
  EXPECT_TRUE(BasisFamily::rbf(RbfKind::IntegratedRbf, 0, 1).monotone_eligible());
  EXPECT_TRUE(BasisFamily::rbf(RbfKind::LeftEdge, 0, 1).monotone_eligible());
  EXPECT_TRUE(BasisFamily::rbf(RbfKind::RightEdge, 0, 1).monotone_eligible());
  EXPECT_FALSE(BasisFamily::rbf(RbfKind::Rbf, 0, 1).monotone_eligible());
  EXPECT_FALSE(BasisFamily::hermite_poly(3).monotone_eligible());
}

TEST(Term, ProductAndDiagonalDerivative) {
  const TermSpec lin{{{1, BasisFamily::linear()}}, 1.0};
  const std::vector<double> x1{5.0, 3.0};
  EXPECT_DOUBLE_EQ(eval_term(lin, x1), 3.0);
  EXPECT_DOUBLE_EQ(eval_term_ddiag(lin, x1, 1), 1.0);

  const TermSpec prod{{{0, BasisFamily::hermite_poly(2)}, {1, BasisFamily::linear()}}, 1.0};
  const std::vector<double> x2{2.0, 4.0};
  EXPECT_DOUBLE_EQ(eval_term(prod, x2), 12.0);
  EXPECT_DOUBLE_EQ(eval_term_ddiag(prod, x2, 1), 3.0);
  EXPECT_DOUBLE_EQ(eval_term_ddiag(prod, x2, 0), 16.0);

  const TermSpec one{{}, 1.0};
  EXPECT_DOUBLE_EQ(eval_term(one, x2), 1.0);
  EXPECT_DOUBLE_EQ(eval_term_ddiag(one, x2, 1), 0.0);
}

TEST(Term, Contracts) {
  const TermSpec far{{{3, BasisFamily::linear()}}, 1.0};
  const std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(eval_term(far, x), ContractViolation);
  const TermSpec unordered{{{1, BasisFamily::linear()}, {0, BasisFamily::linear()}}, 1.0};
  EXPECT_THROW(unordered.validate(), ParameterError);
}

}  // namespace
}  // namespace tmap
