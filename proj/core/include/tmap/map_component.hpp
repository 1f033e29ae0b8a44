#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tmap/basis.hpp"

namespace tmap {

/// Strictly positive function used to make the integrand of a cross-term
/// component positive.
enum class Rectifier { Exponential, Softplus, ShiftedElu };

double rectify(Rectifier r, double x);
double rectify_derivative(Rectifier r, double x);
/// Solves rectify(r, y) = value for y; value must be positive.
double rectify_inverse(Rectifier r, double value);
std::string rectifier_name(Rectifier r);
Rectifier rectifier_from_name(const std::string& name);

enum class ComponentKind { Marginal, Separable, CrossTerm };

std::string component_kind_name(ComponentKind kind);
ComponentKind component_kind_from_name(const std::string& name);

inline constexpr int kDefaultQuadratureOrder = 32;

/// The k-th scalar function S_k = g + f of a lower-triangular map.
///
/// Variables are global, 0-based coordinates of the (standardized) input, so
/// component k reads x[j] for j in its active set and never beyond x[k].
///
/// * Marginal: g is at most a constant, f is a nonnegative combination of
///   monotone univariate terms in x_k.
/// * Separable: g depends on x_{<k}, f as for Marginal. Linear in the
///   coefficients.
/// * CrossTerm: f(x) = \int_0^{x_k} r(h(x_{<k}, t)) dt where the monotone term
///   list spans the integrand h, evaluated with fixed-order Gauss-Legendre.
///
/// Components are immutable; fitting produces new instances.
class MapComponent {
 public:
  MapComponent(int index, std::vector<int> active, ComponentKind kind,
               std::vector<TermSpec> nonmonotone, std::vector<TermSpec> monotone,
               Rectifier rectifier = Rectifier::Softplus,
               int quadrature_order = kDefaultQuadratureOrder);

  int index() const { return index_; }
  const std::vector<int>& active() const { return active_; }
  ComponentKind kind() const { return kind_; }
  Rectifier rectifier() const { return rectifier_; }
  int quadrature_order() const { return quadrature_order_; }
  const std::vector<TermSpec>& nonmonotone() const { return nonmonotone_; }
  const std::vector<TermSpec>& monotone() const { return monotone_; }

  /// Coefficients laid out as [nonmonotone..., monotone...].
  std::size_t num_coefficients() const { return nonmonotone_.size() + monotone_.size(); }
  Eigen::VectorXd coefficients() const;
  MapComponent with_coefficients(const Eigen::VectorXd& coefficients) const;
  MapComponent with_quadrature_order(int order) const;

  /// Nonmonotone part g at x.
  double eval_nonmonotone(std::span<const double> x) const;
  /// Integrand h(x_{<k}, t) of a cross-term component.
  double eval_integrand(std::span<const double> x, double t) const;

  /// S_k(x); x must hold at least index()+1 finite entries.
  double evaluate(std::span<const double> x) const;

  /// dS_k/dx_k, strictly positive. Throws MonotonicityError for a separable
  /// component whose coefficients produce a non-positive slope.
  double diag_derivative(std::span<const double> x) const;

  /// Solves S_k(x_prev, x_k) = z for x_k. x_prev supplies x_0..x_{k-1}.
  double invert(double z, std::span<const double> x_prev) const;

 private:
  void validate() const;
  double monotone_value(std::span<const double> x, double xk) const;

  int index_;
  std::vector<int> active_;
  ComponentKind kind_;
  std::vector<TermSpec> nonmonotone_;
  std::vector<TermSpec> monotone_;
  Rectifier rectifier_;
  int quadrature_order_;
};

/// Identity component S_k = x_k of the given kind (cross-term: constant
/// integrand with r(c0) = 1).
MapComponent identity_component(int index, ComponentKind kind,
                                Rectifier rectifier = Rectifier::Softplus,
                                int quadrature_order = kDefaultQuadratureOrder);

}  // namespace tmap
