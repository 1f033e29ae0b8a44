#pragma once

#include <span>
#include <string>
#include <vector>

namespace tmap {

/// Highest Hermite degree accepted unless the caller raises the limit.
inline constexpr int kDefaultMaxHermiteDegree = 20;

// Raw univariate evaluators. All are pure and thread-safe.

/// Probabilists' Hermite polynomial He_degree(x) by upward recurrence.
double eval_hermite_poly(int degree, double x, int max_degree = kDefaultMaxHermiteDegree);

/// He_degree(x) exp(-x^2/4). Degrees 0 and 1 are returned without the weight.
double eval_hermite_function(int degree, double x, int max_degree = kDefaultMaxHermiteDegree);

/// He_degree(x) times the cubic spline weight 2u^3 - 3u^2 + 1, u = min(1, |x|/r).
double eval_edge_controlled(int degree, double x, double radius,
                            int max_degree = kDefaultMaxHermiteDegree);

enum class RbfKind { Rbf, IntegratedRbf, LeftEdge, RightEdge };

/// Radial family in the local coordinate (x - center) / (sqrt(tau) scale).
double eval_rbf_family(RbfKind kind, double x, double center, double scale);

/// One univariate basis function together with its parameters.
class BasisFamily {
 public:
  enum class Kind {
    Constant,
    Linear,
    HermitePoly,
    HermiteFunction,
    EdgeControlledHermite,
    Rbf,
    IntegratedRbf,
    LeftEdge,
    RightEdge,
  };

  static BasisFamily constant();
  static BasisFamily linear();
  static BasisFamily hermite_poly(int degree, int max_degree = kDefaultMaxHermiteDegree);
  static BasisFamily hermite_function(int degree, int max_degree = kDefaultMaxHermiteDegree);
  static BasisFamily edge_controlled(int degree, double radius,
                                     int max_degree = kDefaultMaxHermiteDegree);
  static BasisFamily rbf(RbfKind kind, double center, double scale);

  Kind kind() const { return kind_; }
  int degree() const { return degree_; }
  double radius() const { return radius_; }
  double center() const { return center_; }
  double scale() const { return scale_; }

  double value(double x) const;
  double derivative(double x) const;

  /// Nondecreasing with nonnegative derivative everywhere, so it may carry a
  /// nonnegative coefficient in a separable monotone part.
  bool monotone_eligible() const;

  std::string name() const;
  static Kind kind_from_name(const std::string& name);

  friend bool operator==(const BasisFamily&, const BasisFamily&) = default;

 private:
  BasisFamily(Kind kind, int degree, double radius, double center, double scale)
      : kind_(kind), degree_(degree), radius_(radius), center_(center), scale_(scale) {}

  Kind kind_ = Kind::Constant;
  int degree_ = 0;
  double radius_ = 0.0;
  double center_ = 0.0;
  double scale_ = 1.0;
};

struct Factor {
  int variable = 0;  // global (0-based) input coordinate
  BasisFamily family = BasisFamily::constant();

  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Product of univariate factors over strictly increasing variables, scaled by
/// a coefficient when it appears inside a map component. An empty factor list
/// is the constant term.
struct TermSpec {
  std::vector<Factor> factors;
  double coefficient = 0.0;

  bool involves(int variable) const;
  /// Throws ParameterError if variables are not strictly increasing.
  void validate() const;

  friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

/// Product of factor values at x (x indexed by global variable).
double eval_term(const TermSpec& term, std::span<const double> x);

/// Partial derivative of the factor product with respect to x[variable].
double eval_term_ddiag(const TermSpec& term, std::span<const double> x, int variable);

}  // namespace tmap
