#pragma once

#include <numbers>
#include <span>
#include <vector>

namespace tmap::special {

/// Twice Archimedes' constant.
inline constexpr double kTau = 2.0 * std::numbers::pi;

/// Error function. Every basis term that needs erf goes through here.
double erf(double x);

/// ln(1 + e^x) without overflow for large x or cancellation for very negative x.
double softplus(double x);

/// Logistic sigmoid, the derivative of softplus.
double sigmoid(double x);

/// Log-density of the standard normal at x.
double std_normal_logpdf(double x);

/// Standard normal CDF.
double std_normal_cdf(double x);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` nodes on [-1, 1]. Results are cached, so
/// repeated requests for the same order are cheap and return the same object.
const QuadratureRule& gauss_legendre(int order);

}  // namespace tmap::special
