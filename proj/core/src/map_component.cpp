#include "tmap/map_component.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tmap/error.hpp"
#include "tmap/special.hpp"

namespace tmap {

double rectify(Rectifier r, double x) {
  switch (r) {
    case Rectifier::Exponential: return std::exp(x);
    case Rectifier::Softplus: return special::softplus(x);
    case Rectifier::ShiftedElu: return x >= 0.0 ? x + 1.0 : std::exp(x);
  }
  return 0.0;
}

double rectify_derivative(Rectifier r, double x) {
  switch (r) {
    case Rectifier::Exponential: return std::exp(x);
    case Rectifier::Softplus: return special::sigmoid(x);
    case Rectifier::ShiftedElu: return x >= 0.0 ? 1.0 : std::exp(x);
  }
  return 0.0;
}

double rectify_inverse(Rectifier r, double value) {
  if (!(value > 0.0)) throw ParameterError("rectifier output must be positive");
  switch (r) {
    case Rectifier::Exponential: return std::log(value);
    case Rectifier::Softplus: return value + std::log(-std::expm1(-value));
    case Rectifier::ShiftedElu: return value >= 1.0 ? value - 1.0 : std::log(value);
  }
  return 0.0;
}

std::string rectifier_name(Rectifier r) {
  switch (r) {
    case Rectifier::Exponential: return "exponential";
    case Rectifier::Softplus: return "softplus";
    case Rectifier::ShiftedElu: return "shifted_elu";
  }
  return "unknown";
}

Rectifier rectifier_from_name(const std::string& name) {
  if (name == "exponential" || name == "exp") return Rectifier::Exponential;
  if (name == "softplus") return Rectifier::Softplus;
  if (name == "shifted_elu" || name == "elu") return Rectifier::ShiftedElu;
  throw ParameterError("unknown rectifier '" + name + "'");
}

std::string component_kind_name(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::Marginal: return "marginal";
    case ComponentKind::Separable: return "separable";
    case ComponentKind::CrossTerm: return "crossterm";
  }
  return "unknown";
}

ComponentKind component_kind_from_name(const std::string& name) {
  if (name == "marginal") return ComponentKind::Marginal;
  if (name == "separable") return ComponentKind::Separable;
  if (name == "crossterm" || name == "cross-term" || name == "cross_term") {
    return ComponentKind::CrossTerm;
  }
  throw ParameterError("unknown component kind '" + name + "'");
}

MapComponent::MapComponent(int index, std::vector<int> active, ComponentKind kind,
                           std::vector<TermSpec> nonmonotone, std::vector<TermSpec> monotone,
                           Rectifier rectifier, int quadrature_order)
    : index_(index),
      active_(std::move(active)),
      kind_(kind),
      nonmonotone_(std::move(nonmonotone)),
      monotone_(std::move(monotone)),
      rectifier_(rectifier),
      quadrature_order_(quadrature_order) {
  validate();
}

void MapComponent::validate() const {
  const std::string where = "component " + std::to_string(index_) + ": ";
  if (index_ < 0) throw ParameterError(where + "negative index");
  if (active_.empty() || active_.back() != index_) {
    throw ParameterError(where + "active set must end with the component index");
  }
  for (std::size_t i = 0; i < active_.size(); ++i) {
    if (active_[i] < 0 || (i > 0 && active_[i] <= active_[i - 1])) {
      throw ParameterError(where + "active set must be strictly increasing and nonnegative");
    }
  }
  if (quadrature_order_ < 1) throw ParameterError(where + "quadrature order must be >= 1");
  if (monotone_.empty()) throw ParameterError(where + "monotone part must not be empty");

  auto is_active = [&](int v) {
    return std::binary_search(active_.begin(), active_.end(), v);
  };
  auto check_vars = [&](const TermSpec& t) {
    t.validate();
    for (const auto& f : t.factors) {
      if (!is_active(f.variable)) {
        throw ParameterError(where + "term uses inactive variable " +
                             std::to_string(f.variable));
      }
    }
  };

  for (const auto& t : nonmonotone_) {
    check_vars(t);
    if (t.involves(index_)) {
      throw ParameterError(where + "nonmonotone terms must not depend on the last variable");
    }
    if (kind_ == ComponentKind::Marginal && !t.factors.empty()) {
      throw ParameterError(where + "marginal components allow only a constant nonmonotone term");
    }
    if (!std::isfinite(t.coefficient)) throw ParameterError(where + "non-finite coefficient");
  }

  bool any_positive = false;
  for (const auto& t : monotone_) {
    check_vars(t);
    if (!std::isfinite(t.coefficient)) throw ParameterError(where + "non-finite coefficient");
    if (kind_ == ComponentKind::CrossTerm) continue;
    if (t.factors.size() != 1 || t.factors[0].variable != index_) {
      throw ParameterError(where + "separable monotone terms must depend only on the last variable");
    }
    if (!t.factors[0].family.monotone_eligible()) {
      throw ParameterError(where + "basis '" + t.factors[0].family.name() +
                           "' is not monotone and cannot appear in a separable monotone part");
    }
    if (t.coefficient < 0.0) {
      throw ParameterError(where + "monotone coefficients must be nonnegative");
    }
    any_positive = any_positive || t.coefficient > 0.0;
  }
  if (kind_ != ComponentKind::CrossTerm && !any_positive) {
    throw ParameterError(where + "at least one monotone coefficient must be positive");
  }
}

Eigen::VectorXd MapComponent::coefficients() const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(num_coefficients()));
  Eigen::Index i = 0;
  for (const auto& t : nonmonotone_) c[i++] = t.coefficient;
  for (const auto& t : monotone_) c[i++] = t.coefficient;
  return c;
}

MapComponent MapComponent::with_coefficients(const Eigen::VectorXd& coefficients) const {
  if (static_cast<std::size_t>(coefficients.size()) != num_coefficients()) {
    throw ContractViolation("coefficient vector has wrong length");
  }
  auto g = nonmonotone_;
  auto f = monotone_;
  Eigen::Index i = 0;
  for (auto& t : g) t.coefficient = coefficients[i++];
  for (auto& t : f) t.coefficient = coefficients[i++];
  return MapComponent(index_, active_, kind_, std::move(g), std::move(f), rectifier_,
                      quadrature_order_);
}

MapComponent MapComponent::with_quadrature_order(int order) const {
  return MapComponent(index_, active_, kind_, nonmonotone_, monotone_, rectifier_, order);
}

double MapComponent::eval_nonmonotone(std::span<const double> x) const {
  double g = 0.0;
  for (const auto& t : nonmonotone_) g += t.coefficient * eval_term(t, x);
  return g;
}

namespace {

// Product of the factors of `term` that do not involve `skip`.
double partial_product(const TermSpec& term, std::span<const double> x, int skip,
                       const BasisFamily** skipped) {
  double v = 1.0;
  *skipped = nullptr;
  for (const auto& f : term.factors) {
    if (f.variable == skip) {
      *skipped = &f.family;
    } else {
      v *= f.family.value(x[f.variable]);
    }
  }
  return v;
}

void require_finite(std::span<const double> x, int upto) {
  if (static_cast<int>(x.size()) <= upto) {
    throw ContractViolation("input has " + std::to_string(x.size()) +
                            " entries but component needs index " + std::to_string(upto));
  }
  for (int j = 0; j <= upto; ++j) {
    if (!std::isfinite(x[j])) throw ContractViolation("non-finite input to map component");
  }
}

}  // namespace

double MapComponent::eval_integrand(std::span<const double> x, double t) const {
  double h = 0.0;
  for (const auto& term : monotone_) {
    const BasisFamily* fk = nullptr;
    double v = partial_product(term, x, index_, &fk);
    if (fk != nullptr) v *= fk->value(t);
    h += term.coefficient * v;
  }
  return h;
}

double MapComponent::monotone_value(std::span<const double> x, double xk) const {
  if (kind_ != ComponentKind::CrossTerm) {
    double f = 0.0;
    for (const auto& t : monotone_) f += t.coefficient * t.factors[0].family.value(xk);
    return f;
  }
  if (xk == 0.0) return 0.0;
  // Split every term into the part constant along t and its t-factor.
  thread_local std::vector<double> prefix;
  thread_local std::vector<const BasisFamily*> tfactor;
  prefix.resize(monotone_.size());
  tfactor.resize(monotone_.size());
  for (std::size_t j = 0; j < monotone_.size(); ++j) {
    prefix[j] = monotone_[j].coefficient * partial_product(monotone_[j], x, index_, &tfactor[j]);
  }
  const auto& rule = special::gauss_legendre(quadrature_order_);
  const double half = 0.5 * xk;
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double t = half * (1.0 + rule.nodes[q]);
    double h = 0.0;
    for (std::size_t j = 0; j < monotone_.size(); ++j) {
      h += tfactor[j] ? prefix[j] * tfactor[j]->value(t) : prefix[j];
    }
    sum += rule.weights[q] * rectify(rectifier_, h);
  }
  return half * sum;
}

double MapComponent::evaluate(std::span<const double> x) const {
  require_finite(x, index_);
  return eval_nonmonotone(x) + monotone_value(x, x[index_]);
}

double MapComponent::diag_derivative(std::span<const double> x) const {
  require_finite(x, index_);
  if (kind_ == ComponentKind::CrossTerm) {
    return rectify(rectifier_, eval_integrand(x, x[index_]));
  }
  double d = 0.0;
  for (const auto& t : monotone_) d += t.coefficient * t.factors[0].family.derivative(x[index_]);
  if (!(d > 0.0)) {
    throw MonotonicityError("component " + std::to_string(index_) +
                            " has non-positive diagonal derivative " + std::to_string(d));
  }
  return d;
}

double MapComponent::invert(double z, std::span<const double> x_prev) const {
  if (!std::isfinite(z)) throw ContractViolation("non-finite reference value in inversion");
  if (static_cast<int>(x_prev.size()) < index_) {
    throw ContractViolation("inversion of component " + std::to_string(index_) +
                            " needs " + std::to_string(index_) + " preceding values");
  }
  std::vector<double> x(x_prev.begin(), x_prev.begin() + index_);
  x.push_back(0.0);
  for (int j = 0; j < index_; ++j) {
    if (!std::isfinite(x[j])) throw ContractViolation("non-finite conditioning value");
  }
  const double g = eval_nonmonotone(x);
  auto residual = [&](double xk) { return g + monotone_value(x, xk) - z; };

  constexpr double kRangeLimit = 1e8;
  constexpr double kResidualTol = 1e-12;
  constexpr double kBracketTol = 1e-12;
  constexpr int kMaxIter = 200;

  double lo = 0.0;
  double hi = 0.0;
  double flo = residual(0.0);
  double fhi = flo;
  if (flo == 0.0) return 0.0;
  if (flo < 0.0) {
    double step = 1.0;
    while (true) {
      hi = step;
      fhi = residual(hi);
      if (fhi >= 0.0) break;
      lo = hi;
      flo = fhi;
      step *= 2.0;
      if (step > kRangeLimit) {
        throw InversionRangeError("component " + std::to_string(index_) +
                                      ": root bracket exceeds 1e8",
                                  index_);
      }
    }
  } else {
    hi = 0.0;
    fhi = flo;
    double step = 1.0;
    while (true) {
      lo = -step;
      flo = residual(lo);
      if (flo <= 0.0) break;
      hi = lo;
      fhi = flo;
      step *= 2.0;
      if (step > kRangeLimit) {
        throw InversionRangeError("component " + std::to_string(index_) +
                                      ": root bracket exceeds 1e8",
                                  index_);
      }
    }
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;

  // Brent's method: inverse quadratic / secant steps guarded by bisection.
  double a = lo, fa = flo;
  double b = hi, fb = fhi;
  double c = a, fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
                        0.5 * kBracketTol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || std::abs(fb) <= kResidualTol) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = residual(b);
  }
  throw ConvergenceError("component " + std::to_string(index_) +
                             ": inversion did not converge in 200 iterations",
                         index_);
}

MapComponent identity_component(int index, ComponentKind kind, Rectifier rectifier,
                                int quadrature_order) {
  std::vector<TermSpec> g{TermSpec{{}, 0.0}};
  std::vector<TermSpec> f;
  if (kind == ComponentKind::CrossTerm) {
    f.push_back(TermSpec{{}, rectify_inverse(rectifier, 1.0)});
  } else {
    f.push_back(TermSpec{{Factor{index, BasisFamily::linear()}}, 1.0});
  }
  return MapComponent(index, {index}, kind, std::move(g), std::move(f), rectifier,
                      quadrature_order);
}

}  // namespace tmap
