#include "tmap/basis.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "tmap/error.hpp"
#include "tmap/special.hpp"

namespace tmap {

namespace {

void check_degree(int degree, int max_degree) {
  if (degree < 0) throw ParameterError("basis degree must be nonnegative");
  if (degree > max_degree) {
    throw ParameterError("Hermite degree " + std::to_string(degree) +
                         " exceeds the configured maximum " + std::to_string(max_degree));
  }
}

// {He_n(x), He_{n-1}(x)}; He_{-1} is taken as 0.
std::pair<double, double> hermite_pair(int n, double x) {
  double prev = 0.0;
  double cur = 1.0;
  for (int j = 0; j < n; ++j) {
    const double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

// He_n and its derivative n He_{n-1}.
std::pair<double, double> hermite_value_deriv(int n, double x) {
  const auto [h, hm1] = hermite_pair(n, x);
  return {h, n * hm1};
}

struct SplineWeight {
  double w;
  double dw;
};

SplineWeight cubic_spline_weight(double x, double radius) {
  const double ax = std::abs(x);
  if (ax >= radius) return {0.0, 0.0};
  const double u = ax / radius;
  const double w = 2.0 * u * u * u - 3.0 * u * u + 1.0;
  const double dwdu = 6.0 * u * u - 6.0 * u;
  const double sign = (x >= 0.0) ? 1.0 : -1.0;
  return {w, dwdu * sign / radius};
}

void check_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("RBF scale must be positive and finite");
  }
}

// Value and x-derivative of the radial family.
std::pair<double, double> rbf_value_deriv(RbfKind kind, double x, double center,
                                          double scale) {
  const double sqrt_tau = std::sqrt(special::kTau);
  const double du_dx = 1.0 / (sqrt_tau * scale);
  const double u = (x - center) * du_dx;
  const double g = std::exp(-u * u);
  switch (kind) {
    case RbfKind::Rbf:
      return {g / sqrt_tau, -2.0 * u * g / sqrt_tau * du_dx};
    case RbfKind::IntegratedRbf:
      return {0.5 * (1.0 + special::erf(u)), g / std::sqrt(std::numbers::pi) * du_dx};
    case RbfKind::LeftEdge:
    case RbfKind::RightEdge: {
      const double s = (kind == RbfKind::LeftEdge) ? -1.0 : 1.0;
      const double e = special::erf(u);
      const double a = scale * sqrt_tau;
      const double b = 4.0 * scale / sqrt_tau;
      const double value = 0.5 * (a * u * (1.0 + s * e) + s * b * g);
      const double dvalue_du =
          0.5 * (a * (1.0 + s * e) + s * a * u * 2.0 / std::sqrt(std::numbers::pi) * g -
                 s * 2.0 * b * u * g);
      return {value, dvalue_du * du_dx};
    }
  }
  return {0.0, 0.0};
}

}  // namespace

double eval_hermite_poly(int degree, double x, int max_degree) {
  check_degree(degree, max_degree);
  return hermite_pair(degree, x).first;
}

double eval_hermite_function(int degree, double x, int max_degree) {
  check_degree(degree, max_degree);
  if (degree < 2) return degree == 0 ? 1.0 : x;
  return hermite_pair(degree, x).first * std::exp(-0.25 * x * x);
}

double eval_edge_controlled(int degree, double x, double radius, int max_degree) {
  check_degree(degree, max_degree);
  if (!(radius > 0.0)) throw ParameterError("edge-control radius must be positive");
  return hermite_pair(degree, x).first * cubic_spline_weight(x, radius).w;
}

double eval_rbf_family(RbfKind kind, double x, double center, double scale) {
  check_scale(scale);
  return rbf_value_deriv(kind, x, center, scale).first;
}

BasisFamily BasisFamily::constant() { return {Kind::Constant, 0, 0.0, 0.0, 1.0}; }
BasisFamily BasisFamily::linear() { return {Kind::Linear, 1, 0.0, 0.0, 1.0}; }

BasisFamily BasisFamily::hermite_poly(int degree, int max_degree) {
  check_degree(degree, max_degree);
  return {Kind::HermitePoly, degree, 0.0, 0.0, 1.0};
}

BasisFamily BasisFamily::hermite_function(int degree, int max_degree) {
  check_degree(degree, max_degree);
  return {Kind::HermiteFunction, degree, 0.0, 0.0, 1.0};
}

BasisFamily BasisFamily::edge_controlled(int degree, double radius, int max_degree) {
  check_degree(degree, max_degree);
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ParameterError("edge-control radius must be positive and finite");
  }
  return {Kind::EdgeControlledHermite, degree, radius, 0.0, 1.0};
}

BasisFamily BasisFamily::rbf(RbfKind kind, double center, double scale) {
  check_scale(scale);
  if (!std::isfinite(center)) throw ParameterError("RBF center must be finite");
  Kind k = Kind::Rbf;
  switch (kind) {
    case RbfKind::Rbf: k = Kind::Rbf; break;
    case RbfKind::IntegratedRbf: k = Kind::IntegratedRbf; break;
    case RbfKind::LeftEdge: k = Kind::LeftEdge; break;
    case RbfKind::RightEdge: k = Kind::RightEdge; break;
  }
  return {k, 0, 0.0, center, scale};
}

double BasisFamily::value(double x) const {
  switch (kind_) {
    case Kind::Constant:
      return 1.0;
    case Kind::Linear:
      return x;
    case Kind::HermitePoly:
      return hermite_pair(degree_, x).first;
    case Kind::HermiteFunction:
      if (degree_ < 2) return degree_ == 0 ? 1.0 : x;
      return hermite_pair(degree_, x).first * std::exp(-0.25 * x * x);
    case Kind::EdgeControlledHermite:
      if (degree_ < 2) return degree_ == 0 ? 1.0 : x;
      return hermite_pair(degree_, x).first * cubic_spline_weight(x, radius_).w;
    case Kind::Rbf:
      return rbf_value_deriv(RbfKind::Rbf, x, center_, scale_).first;
    case Kind::IntegratedRbf:
      return rbf_value_deriv(RbfKind::IntegratedRbf, x, center_, scale_).first;
    case Kind::LeftEdge:
      return rbf_value_deriv(RbfKind::LeftEdge, x, center_, scale_).first;
    case Kind::RightEdge:
      return rbf_value_deriv(RbfKind::RightEdge, x, center_, scale_).first;
  }
  return 0.0;
}

double BasisFamily::derivative(double x) const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::Linear:
      return 1.0;
    case Kind::HermitePoly:
      return hermite_value_deriv(degree_, x).second;
    case Kind::HermiteFunction: {
      if (degree_ < 2) return degree_ == 0 ? 0.0 : 1.0;
      const auto [h, dh] = hermite_value_deriv(degree_, x);
      return (dh - 0.5 * x * h) * std::exp(-0.25 * x * x);
    }
    case Kind::EdgeControlledHermite: {
      if (degree_ < 2) return degree_ == 0 ? 0.0 : 1.0;
      const auto [h, dh] = hermite_value_deriv(degree_, x);
      const auto sw = cubic_spline_weight(x, radius_);
      return dh * sw.w + h * sw.dw;
    }
    case Kind::Rbf:
      return rbf_value_deriv(RbfKind::Rbf, x, center_, scale_).second;
    case Kind::IntegratedRbf:
      return rbf_value_deriv(RbfKind::IntegratedRbf, x, center_, scale_).second;
    case Kind::LeftEdge:
      return rbf_value_deriv(RbfKind::LeftEdge, x, center_, scale_).second;
    case Kind::RightEdge:
      return rbf_value_deriv(RbfKind::RightEdge, x, center_, scale_).second;
  }
  return 0.0;
}

bool BasisFamily::monotone_eligible() const {
  switch (kind_) {
    case Kind::Linear:
    case Kind::IntegratedRbf:
    case Kind::LeftEdge:
    case Kind::RightEdge:
      return true;
    case Kind::HermitePoly:
    case Kind::HermiteFunction:
    case Kind::EdgeControlledHermite:
      return degree_ == 1;
    default:
      return false;
  }
}

std::string BasisFamily::name() const {
  switch (kind_) {
    case Kind::Constant: return "constant";
    case Kind::Linear: return "linear";
    case Kind::HermitePoly: return "hermite_poly";
    case Kind::HermiteFunction: return "hermite_function";
    case Kind::EdgeControlledHermite: return "edge_controlled_hermite";
    case Kind::Rbf: return "rbf";
    case Kind::IntegratedRbf: return "irbf";
    case Kind::LeftEdge: return "let";
    case Kind::RightEdge: return "ret";
  }
  return "unknown";
}

BasisFamily::Kind BasisFamily::kind_from_name(const std::string& name) {
  if (name == "constant") return Kind::Constant;
  if (name == "linear") return Kind::Linear;
  if (name == "hermite_poly") return Kind::HermitePoly;
  if (name == "hermite_function") return Kind::HermiteFunction;
  if (name == "edge_controlled_hermite") return Kind::EdgeControlledHermite;
  if (name == "rbf") return Kind::Rbf;
  if (name == "irbf") return Kind::IntegratedRbf;
  if (name == "let") return Kind::LeftEdge;
  if (name == "ret") return Kind::RightEdge;
  throw ParameterError("unknown basis family '" + name + "'");
}

bool TermSpec::involves(int variable) const {
  for (const auto& f : factors) {
    if (f.variable == variable) return true;
  }
  return false;
}

void TermSpec::validate() const {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].variable < 0) throw ParameterError("negative variable index in term");
    if (i > 0 && factors[i].variable <= factors[i - 1].variable) {
      throw ParameterError("term variables must be strictly increasing");
    }
  }
}

double eval_term(const TermSpec& term, std::span<const double> x) {
  double value = 1.0;
  for (const auto& f : term.factors) {
    if (static_cast<std::size_t>(f.variable) >= x.size()) {
      throw ContractViolation("term references variable " + std::to_string(f.variable) +
                              " but only " + std::to_string(x.size()) + " were supplied");
    }
    value *= f.family.value(x[f.variable]);
  }
  return value;
}

double eval_term_ddiag(const TermSpec& term, std::span<const double> x, int variable) {
  double value = 1.0;
  bool found = false;
  for (const auto& f : term.factors) {
    if (static_cast<std::size_t>(f.variable) >= x.size()) {
      throw ContractViolation("term references variable " + std::to_string(f.variable) +
                              " but only " + std::to_string(x.size()) + " were supplied");
    }
    if (f.variable == variable) {
      value *= f.family.derivative(x[f.variable]);
      found = true;
    } else {
      value *= f.family.value(x[f.variable]);
    }
  }
  return found ? value : 0.0;
}

}  // namespace tmap
