#include "tmap/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "design.hpp"
#include "tmap/box_qn.hpp"
#include "tmap/error.hpp"
#include "tmap/parallel.hpp"
#include "tmap/special.hpp"

namespace tmap {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

int resolve_threads(int threads) { return threads > 0 ? threads : default_thread_count(); }

MapComponent apply_quadrature(const MapComponent& c, const FitOptions& options) {
  if (options.quadrature_order > 0 && c.kind() == ComponentKind::CrossTerm &&
      c.quadrature_order() != options.quadrature_order) {
    return c.with_quadrature_order(options.quadrature_order);
  }
  return c;
}

VectorXd lambda_vector(const Regularization& reg, Eigen::Index n) {
  VectorXd l = VectorXd::Zero(n);
  if (reg.kind == RegularizationKind::None) return l;
  for (Eigen::Index i = 0; i < n; ++i) l[i] = reg.weight(static_cast<std::size_t>(i));
  return l;
}

void check_regularization(const Regularization& reg, std::size_t n) {
  reg.validate();
  if (!reg.per_coefficient.empty() && reg.per_coefficient.size() != n) {
    throw ParameterError("per-coefficient regularization has " +
                         std::to_string(reg.per_coefficient.size()) + " entries; component has " +
                         std::to_string(n) + " coefficients");
  }
}

// Lower bounds: 0 on separable monotone coefficients, free otherwise.
VectorXd lower_bounds(const MapComponent& c) {
  const auto m = static_cast<Eigen::Index>(c.nonmonotone().size());
  const auto n = static_cast<Eigen::Index>(c.monotone().size());
  VectorXd lo = VectorXd::Constant(m + n, -kInf);
  if (c.kind() != ComponentKind::CrossTerm) lo.tail(n).setZero();
  return lo;
}

double smooth_penalty(const Regularization& reg, const VectorXd& c, VectorXd* grad) {
  if (reg.kind != RegularizationKind::L2) return 0.0;
  if (grad) reg.add_gradient(c, *grad);
  return reg.penalty(c);
}

// Smooth part of the sample objective on a precomputed design.
double design_objective(const detail::ComponentDesign& design, const Regularization& reg,
                        const VectorXd& c, VectorXd* grad) {
  const auto v = detail::evaluate_design(design, c);
  if (!v.feasible) return kInf;
  const double f = 0.5 * v.value.squaredNorm() - v.diag.array().log().sum();
  if (grad) *grad = detail::design_gradient(design, v, v.value);
  return f + smooth_penalty(reg, c, grad);
}

bool feasible(const detail::ComponentDesign& design, const VectorXd& c) {
  return detail::evaluate_design(design, c).feasible;
}

VectorXd starting_point(const MapComponent& c, const detail::ComponentDesign& design,
                        bool warm_start) {
  if (warm_start) {
    const VectorXd w = c.coefficients();
    if (w.allFinite() && feasible(design, w)) return w;
  }
  return initial_coefficients(c);
}

ComponentReport make_report(int k, const std::string& method, const BoxQnResult& r) {
  ComponentReport rep;
  rep.component = k;
  rep.method = method;
  rep.objective_trace = r.trace;
  rep.objective = r.value;
  rep.gradient_norm = r.gradient_norm;
  rep.iterations = r.iterations;
  rep.converged = r.converged;
  rep.message = r.message;
  return rep;
}

BoxQnOptions qn_options(const FitOptions& o) {
  if (!(o.gradient_tolerance > 0.0)) throw ParameterError("gradient tolerance must be positive");
  if (o.max_iterations <= 0) throw ParameterError("max iterations must be positive");
  BoxQnOptions q;
  q.gradient_tolerance = o.gradient_tolerance;
  q.max_iterations = o.max_iterations;
  return q;
}

// Runs the box or proximal solver in rescaled variables u = c * scale, which
// evens out the curvature across coefficients. Bounds at 0 and infinity are
// unchanged by the rescaling.
BoxQnResult minimize_scaled(const SmoothObjective& objective, const VectorXd& start,
                            const VectorXd& lo, const VectorXd& hi, const VectorXd& scale,
                            const VectorXd* l1_weights, const BoxQnOptions& options) {
  const VectorXd inv = scale.cwiseInverse();
  const SmoothObjective scaled = [&](const VectorXd& u, VectorXd& g) {
    const double f = objective(u.cwiseProduct(inv), g);
    g = g.cwiseProduct(inv);
    return f;
  };
  const VectorXd u0 = start.cwiseProduct(scale);
  const VectorXd ulo = lo.cwiseProduct(scale);
  const VectorXd uhi = hi.cwiseProduct(scale);
  BoxQnResult r = l1_weights
                      ? minimize_l1_proximal(scaled, u0, ulo, uhi, l1_weights->cwiseProduct(inv), options)
                      : minimize_box(scaled, u0, ulo, uhi, options);
  r.x = r.x.cwiseProduct(inv);
  return r;
}

}  // namespace

std::string regularization_name(RegularizationKind kind) {
  switch (kind) {
    case RegularizationKind::None: return "none";
    case RegularizationKind::L1: return "l1";
    case RegularizationKind::L2: return "l2";
  }
  return "none";
}

RegularizationKind regularization_from_name(const std::string& name) {
  if (name == "none") return RegularizationKind::None;
  if (name == "l1") return RegularizationKind::L1;
  if (name == "l2") return RegularizationKind::L2;
  throw ParameterError("unknown regularization '" + name + "'");
}

double Regularization::weight(std::size_t i) const {
  if (kind == RegularizationKind::None) return 0.0;
  return per_coefficient.empty() ? lambda : per_coefficient.at(i);
}

double Regularization::penalty(const VectorXd& c) const {
  double p = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double w = weight(static_cast<std::size_t>(i));
    if (kind == RegularizationKind::L2) p += w * c[i] * c[i];
    if (kind == RegularizationKind::L1) p += w * std::abs(c[i]);
  }
  return p;
}

void Regularization::add_gradient(const VectorXd& c, VectorXd& grad) const {
  if (kind != RegularizationKind::L2) return;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    grad[i] += 2.0 * weight(static_cast<std::size_t>(i)) * c[i];
  }
}

void Regularization::validate() const {
  if (kind == RegularizationKind::None) return;
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("regularization weight must be finite and >= 0");
  }
  for (double l : per_coefficient) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw ParameterError("regularization weights must be finite and >= 0");
    }
  }
}

bool FitReport::success() const {
  return std::all_of(components.begin(), components.end(),
                     [](const ComponentReport& c) { return c.converged; });
}

std::string FitReport::to_json() const {
  using nlohmann::json;
  json doc;
  doc["success"] = success();
  doc["total_objective"] = total_objective;
  doc["wall_time_seconds"] = wall_time_seconds;
  doc["final_coefficients"] =
      std::vector<double>(final_coefficients.data(),
                          final_coefficients.data() + final_coefficients.size());
  json comps = json::array();
  for (const auto& c : components) {
    comps.push_back({{"component", c.component},
                     {"method", c.method},
                     {"objective", c.objective},
                     {"objective_trace", c.objective_trace},
                     {"gradient_norm", c.gradient_norm},
                     {"iterations", c.iterations},
                     {"converged", c.converged},
                     {"message", c.message}});
  }
  doc["components"] = comps;
  json steps = json::array();
  for (const auto& s : adaptation) {
    steps.push_back({{"component", s.component},
                     {"multi_index", s.multi_index},
                     {"score", s.score},
                     {"train_objective", s.train_objective},
                     {"validation_nll", s.validation_nll}});
  }
  doc["adaptation"] = steps;
  return doc.dump(2);
}

double nll_objective(const MapComponent& component, const SampleMatrix& samples,
                     const Regularization& regularization) {
  check_regularization(regularization, component.num_coefficients());
  const auto design = detail::build_design(component, samples);
  const VectorXd c = component.coefficients();
  const auto v = detail::evaluate_design(design, c);
  if (!v.feasible) {
    throw MonotonicityError("component " + std::to_string(component.index()) +
                            " has a non-positive diagonal derivative on the samples");
  }
  return 0.5 * v.value.squaredNorm() - v.diag.array().log().sum() + regularization.penalty(c);
}

VectorXd nll_gradient(const MapComponent& component, const SampleMatrix& samples,
                      const Regularization& regularization) {
  check_regularization(regularization, component.num_coefficients());
  const auto design = detail::build_design(component, samples);
  const VectorXd c = component.coefficients();
  const auto v = detail::evaluate_design(design, c);
  if (!v.feasible) {
    throw MonotonicityError("component " + std::to_string(component.index()) +
                            " has a non-positive diagonal derivative on the samples");
  }
  VectorXd g = detail::design_gradient(design, v, v.value);
  if (regularization.kind == RegularizationKind::L2) regularization.add_gradient(c, g);
  if (regularization.kind == RegularizationKind::L1) {
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const double s = c[i] > 0.0 ? 1.0 : (c[i] < 0.0 ? -1.0 : 0.0);
      g[i] += s * regularization.weight(static_cast<std::size_t>(i));
    }
  }
  return g;
}

SeparableSystem build_separable_system(const MapComponent& component, const SampleMatrix& samples,
                                       const Regularization& regularization) {
  if (component.kind() == ComponentKind::CrossTerm) {
    throw CapabilityError("the closed-form path needs a component that is linear in its coefficients");
  }
  if (regularization.kind == RegularizationKind::L1) {
    throw CapabilityError("the closed-form path supports only L2 or no regularization");
  }
  check_regularization(regularization, component.num_coefficients());
  const auto design = detail::build_design(component, samples);
  SeparableSystem s;
  s.p_non = design.nonmonotone;
  s.p_mon = design.monotone;
  s.b = design.monotone_d;
  const auto m = design.num_nonmonotone;
  const auto n = design.num_monotone;
  const VectorXd lambda = lambda_vector(regularization, m + n);
  s.lambda_non = lambda.head(m);
  s.lambda_mon = lambda.tail(n);

  if (m == 0) {
    s.d = MatrixXd::Zero(0, n);
    s.a = s.p_mon;
  } else {
    if ((s.lambda_non.array() == 0.0).all()) {
      Eigen::ColPivHouseholderQR<MatrixXd> qr(s.p_non);
      if (qr.rank() < m) {
        throw IllConditionedError(
            "nonmonotone design matrix of component " + std::to_string(component.index()) +
            " is rank deficient (rank " + std::to_string(qr.rank()) + " < " + std::to_string(m) +
            "); use a positive regularization weight");
      }
    }
    MatrixXd normal = s.p_non.transpose() * s.p_non;
    normal.diagonal() += 2.0 * s.lambda_non;
    const MatrixXd rhs = s.p_non.transpose() * s.p_mon;
    Eigen::LDLT<MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) {
      throw IllConditionedError("normal equations of component " +
                                std::to_string(component.index()) + " could not be factorized");
    }
    s.d = ldlt.solve(rhs);
    s.a = s.p_mon - s.p_non * s.d;
  }
  s.quadratic = s.a.transpose() * s.a;
  if (m > 0) s.quadratic += 2.0 * s.d.transpose() * s.lambda_non.asDiagonal() * s.d;
  s.quadratic.diagonal() += 2.0 * s.lambda_mon;
  if (!s.quadratic.allFinite() || !s.b.allFinite()) {
    throw IllConditionedError("separable system of component " +
                              std::to_string(component.index()) + " has non-finite entries");
  }
  return s;
}

double reduced_objective(const SeparableSystem& system, const VectorXd& c_mon, VectorXd* grad) {
  const VectorXd bc = system.b * c_mon;
  if (!((bc.array() > 0.0).all())) return kInf;
  const VectorXd qc = system.quadratic * c_mon;
  if (grad) *grad = qc - system.b.transpose() * bc.cwiseInverse();
  return 0.5 * c_mon.dot(qc) - bc.array().log().sum();
}

VectorXd initial_coefficients(const MapComponent& component) {
  const auto m = static_cast<Eigen::Index>(component.nonmonotone().size());
  const auto& f = component.monotone();
  const auto n = static_cast<Eigen::Index>(f.size());
  VectorXd c = VectorXd::Zero(m + n);
  if (component.kind() == ComponentKind::CrossTerm) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& factors = f[static_cast<std::size_t>(j)].factors;
      const bool constant = std::all_of(factors.begin(), factors.end(), [](const Factor& x) {
        return x.family.kind() == BasisFamily::Kind::Constant;
      });
      if (constant) {
        c[m + j] = rectify_inverse(component.rectifier(), 1.0);
        break;
      }
    }
    return c;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (f[static_cast<std::size_t>(j)].factors[0].family.kind() == BasisFamily::Kind::Linear) {
      c[m + j] = 1.0;
      return c;
    }
  }
  c.tail(n).setOnes();
  return c;
}

ComponentFit fit_component_closed_form(const MapComponent& component_in,
                                       const SampleMatrix& samples, const FitOptions& options) {
  const MapComponent component = apply_quadrature(component_in, options);
  const auto system = build_separable_system(component, samples, options.regularization);
  const auto m = system.p_non.cols();
  const auto n = system.p_mon.cols();

  VectorXd start = initial_coefficients(component).tail(n);
  if (options.warm_start) {
    const VectorXd w = component.coefficients().tail(n);
    if (w.allFinite() && (w.array() >= 0.0).all() && std::isfinite(reduced_objective(system, w))) {
      start = w;
    }
  }
  const SmoothObjective obj = [&](const VectorXd& c, VectorXd& g) {
    return reduced_objective(system, c, &g);
  };
  VectorXd scale = system.quadratic.diagonal();
  const VectorXd bc = system.b * start;
  if ((bc.array() > 0.0).all()) {
    scale += (bc.cwiseInverse().asDiagonal() * system.b).colwise().squaredNorm().transpose();
  }
  scale = scale.cwiseSqrt();
  scale = scale.cwiseMax(1e-8 * std::max(1.0, scale.maxCoeff()));
  const auto r = minimize_scaled(obj, start, VectorXd::Zero(n), VectorXd::Constant(n, kInf), scale,
                                 nullptr, qn_options(options));
  if (!std::isfinite(r.value)) {
    throw MonotonicityError("component " + std::to_string(component.index()) +
                            ": no monotone coefficients give a positive slope at every sample");
  }
  VectorXd c(m + n);
  c.head(m) = -system.d * r.x;
  c.tail(n) = r.x;
  ComponentFit out{component.with_coefficients(c), make_report(component.index(), "closed_form", r)};
  // The reduced objective drops only constants, so it equals the full one.
  out.report.objective = r.value;
  return out;
}

ComponentFit fit_component_generic(const MapComponent& component_in, const SampleMatrix& samples,
                                   const FitOptions& options) {
  const MapComponent component = apply_quadrature(component_in, options);
  const auto& reg = options.regularization;
  check_regularization(reg, component.num_coefficients());
  const auto design = detail::build_design(component, samples, resolve_threads(options.threads));
  const VectorXd start = starting_point(component, design, options.warm_start);
  const VectorXd lo = lower_bounds(component);
  const VectorXd hi = VectorXd::Constant(lo.size(), kInf);

  const VectorXd scale = detail::design_scales(design, detail::evaluate_design(design, start));
  BoxQnResult r;
  std::string method;
  if (reg.kind == RegularizationKind::L1) {
    const SmoothObjective obj = [&](const VectorXd& c, VectorXd& g) {
      return design_objective(design, Regularization::none(), c, &g);
    };
    const VectorXd weights = lambda_vector(reg, lo.size());
    r = minimize_scaled(obj, start, lo, hi, scale, &weights, qn_options(options));
    method = "proximal_gradient";
  } else {
    const SmoothObjective obj = [&](const VectorXd& c, VectorXd& g) {
      return design_objective(design, reg, c, &g);
    };
    r = minimize_scaled(obj, start, lo, hi, scale, nullptr, qn_options(options));
    method = "quasi_newton";
  }
  if (!std::isfinite(r.value)) {
    throw MonotonicityError("component " + std::to_string(component.index()) +
                            ": starting coefficients are infeasible");
  }
  return {component.with_coefficients(r.x), make_report(component.index(), method, r)};
}

ComponentFit fit_component(const MapComponent& component, const SampleMatrix& samples,
                           const FitOptions& options) {
  const bool linear = component.kind() != ComponentKind::CrossTerm;
  if (options.use_closed_form && linear &&
      options.regularization.kind != RegularizationKind::L1) {
    return fit_component_closed_form(component, samples, options);
  }
  return fit_component_generic(component, samples, options);
}

MapFit fit_map_standardized(const std::vector<MapComponent>& templ, const SampleMatrix& standardized,
                            const Standardizer& standardizer, const FitOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const int K = static_cast<int>(templ.size());
  if (K == 0) throw ParameterError("map template has no components");
  if (standardized.cols() != K) {
    throw ContractViolation("samples have " + std::to_string(standardized.cols()) +
                            " columns; template has " + std::to_string(K) + " components");
  }
  const int threads = resolve_threads(options.threads);
  // Components are independent: spread them over threads, or give all
  // threads to a single component's design when there is only one.
  FitOptions inner = options;
  inner.threads = K >= threads ? 1 : threads;
  const int outer = K >= threads ? threads : 1;

  std::vector<std::optional<ComponentFit>> fits(static_cast<std::size_t>(K));
  std::vector<std::pair<int, std::string>> failures;
  std::mutex failure_mutex;
  parallel_for(static_cast<std::size_t>(K), outer, [&](std::size_t k) {
    try {
      fits[k] = fit_component(templ[k], standardized, inner);
    } catch (const std::exception& e) {
      std::lock_guard lock(failure_mutex);
      failures.emplace_back(static_cast<int>(k), e.what());
    }
  });
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::ostringstream msg;
    msg << "fit failed for " << failures.size() << " component(s):";
    for (const auto& [k, what] : failures) msg << " [" << k << "] " << what << ';';
    throw FitError(msg.str(), std::move(failures));
  }

  std::vector<MapComponent> comps;
  FitReport report;
  std::vector<double> coeffs;
  for (auto& f : fits) {
    comps.push_back(f->component);
    report.total_objective += f->report.objective;
    const VectorXd c = f->component.coefficients();
    coeffs.insert(coeffs.end(), c.data(), c.data() + c.size());
    report.components.push_back(std::move(f->report));
  }
  report.final_coefficients = Eigen::Map<VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {TriangularMap(std::move(comps), standardizer, MapDirection::TargetToReference),
          std::move(report)};
}

MapFit fit_map_from_samples(const std::vector<MapComponent>& templ, const SampleMatrix& samples,
                            const FitOptions& options) {
  const Standardizer standardizer = Standardizer::fit(samples);
  return fit_map_standardized(templ, standardizer.standardize(samples), standardizer, options);
}

MapFit fit_map_from_density(const std::vector<MapComponent>& templ_in, const LogDensity& target,
                            Eigen::Index n_ref, std::uint64_t seed, const FitOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!target.value) throw ParameterError("target log-density is empty");
  if (n_ref < 1) throw ParameterError("n_ref must be positive");
  const int K = static_cast<int>(templ_in.size());
  if (K == 0) throw ParameterError("map template has no components");
  std::vector<MapComponent> templ;
  for (const auto& c : templ_in) templ.push_back(apply_quadrature(c, options));

  const int threads = resolve_threads(options.threads);
  const SampleMatrix z = standard_normal_samples(n_ref, K, seed);
  std::vector<detail::ComponentDesign> designs;
  std::vector<Eigen::Index> offset{0};
  for (const auto& c : templ) {
    check_regularization(options.regularization, c.num_coefficients());
    designs.push_back(detail::build_design(c, z, threads));
    offset.push_back(offset.back() + static_cast<Eigen::Index>(c.num_coefficients()));
  }
  const Eigen::Index P = offset.back();

  VectorXd lo(P), start(P);
  for (int k = 0; k < K; ++k) {
    const auto nk = offset[k + 1] - offset[k];
    lo.segment(offset[k], nk) = lower_bounds(templ[k]);
    start.segment(offset[k], nk) = starting_point(templ[k], designs[k], options.warm_start);
  }
  const VectorXd hi = VectorXd::Constant(P, kInf);
  const int eval_threads = target.thread_safe ? threads : 1;

  auto target_grad = [&](std::span<const double> x, std::span<double> g) {
    if (target.gradient) {
      target.gradient(x, g);
      return;
    }
    std::vector<double> xp(x.begin(), x.end());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      xp[j] = x[j] + h;
      const double fp = target.value(xp);
      xp[j] = x[j] - h;
      const double fm = target.value(xp);
      xp[j] = x[j];
      g[j] = (fp - fm) / (2.0 * h);
    }
  };

  auto smooth = [&](const VectorXd& c, VectorXd* grad) -> double {
    std::vector<detail::DesignValues> vals(static_cast<std::size_t>(K));
    SampleMatrix x(n_ref, K);
    double logdet = 0.0;
    for (int k = 0; k < K; ++k) {
      vals[k] = detail::evaluate_design(designs[k], c.segment(offset[k], offset[k + 1] - offset[k]));
      if (!vals[k].feasible) return kInf;
      x.col(k) = vals[k].value;
      logdet += vals[k].diag.array().log().sum();
    }
    VectorXd logp(n_ref);
    SampleMatrix dlogp(n_ref, K);
    parallel_for(static_cast<std::size_t>(n_ref), eval_threads, [&](std::size_t ii) {
      const auto i = static_cast<Eigen::Index>(ii);
      const auto xi = row_span(x, i);
      logp[i] = target.value(xi);
      bool ok = std::isfinite(logp[i]);
      if (ok && grad) {
        target_grad(xi, {dlogp.data() + i * K, static_cast<std::size_t>(K)});
        for (int k = 0; k < K; ++k) ok = ok && std::isfinite(dlogp(i, k));
      }
      if (!ok) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "target log-density is not finite at (";
        for (int k = 0; k < K; ++k) msg << (k ? ", " : "") << xi[k];
        msg << ')';
        throw TargetEvaluationError(msg.str());
      }
    });
    if (grad) {
      grad->resize(P);
      for (int k = 0; k < K; ++k) {
        const VectorXd w = -dlogp.col(k);
        grad->segment(offset[k], offset[k + 1] - offset[k]) =
            detail::design_gradient(designs[k], vals[k], w);
      }
    }
    return -logp.sum() - logdet;
  };

  const auto& reg = options.regularization;
  BoxQnResult r;
  std::string method;
  if (reg.kind == RegularizationKind::L1) {
    VectorXd weights(P);
    for (int k = 0; k < K; ++k) {
      weights.segment(offset[k], offset[k + 1] - offset[k]) =
          lambda_vector(reg, offset[k + 1] - offset[k]);
    }
    r = minimize_l1_proximal([&](const VectorXd& c, VectorXd& g) { return smooth(c, &g); }, start,
                             lo, hi, weights, qn_options(options));
    method = "density_proximal_gradient";
  } else {
    r = minimize_box(
        [&](const VectorXd& c, VectorXd& g) {
          double f = smooth(c, &g);
          if (!std::isfinite(f)) return f;
          for (int k = 0; k < K; ++k) {
            const auto nk = offset[k + 1] - offset[k];
            const VectorXd ck = c.segment(offset[k], nk);
            VectorXd gk = g.segment(offset[k], nk);
            f += smooth_penalty(reg, ck, &gk);
            g.segment(offset[k], nk) = gk;
          }
          return f;
        },
        start, lo, hi, qn_options(options));
    method = "density_quasi_newton";
  }
  if (!std::isfinite(r.value)) {
    throw MonotonicityError("starting coefficients of the density fit are infeasible");
  }

  std::vector<MapComponent> comps;
  FitReport report;
  for (int k = 0; k < K; ++k) {
    comps.push_back(templ[k].with_coefficients(r.x.segment(offset[k], offset[k + 1] - offset[k])));
    // The objective is joint; every component shares its trace.
    report.components.push_back(make_report(k, method, r));
  }
  report.total_objective = r.value;
  report.final_coefficients = r.x;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {TriangularMap(std::move(comps), Standardizer::identity(K), MapDirection::ReferenceToTarget),
          std::move(report)};
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ParameterError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("quantile level must lie in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<RbfPlacement> place_rbf_centers(std::span<const double> column, int count,
                                            std::vector<std::string>* warnings) {
  if (count < 1) throw ParameterError("RBF count must be positive");
  if (column.size() < static_cast<std::size_t>(count) + 1) {
    throw ParameterError("placing " + std::to_string(count) + " RBFs needs at least " +
                         std::to_string(count + 1) + " samples");
  }
  std::vector<double> sorted(column.begin(), column.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw ContractViolation("non-finite sample value");
  }
  std::sort(sorted.begin(), sorted.end());
  const double spread = sorted.back() - sorted.front();
  std::vector<double> centers;
  for (int i = 1; i <= count; ++i) {
    const double q = empirical_quantile(sorted, static_cast<double>(i) / (count + 1));
    if (!centers.empty() && std::abs(q - centers.back()) <= 1e-12 * std::max(1.0, spread)) continue;
    centers.push_back(q);
  }
  if (static_cast<int>(centers.size()) < count && warnings) {
    warnings->push_back("tied quantiles: " + std::to_string(count) + " RBF centers collapsed to " +
                        std::to_string(centers.size()));
  }
  std::vector<RbfPlacement> out;
  const std::size_t n = centers.size();
  for (std::size_t i = 0; i < n; ++i) {
    double scale = 0.0;
    if (n == 1) {
      // No neighbours: fall back to the sample standard deviation.
      double mean = 0.0;
      for (double v : sorted) mean += v;
      mean /= static_cast<double>(sorted.size());
      double ss = 0.0;
      for (double v : sorted) ss += (v - mean) * (v - mean);
      scale = std::sqrt(ss / static_cast<double>(sorted.size() - 1));
    } else if (i == 0) {
      scale = centers[1] - centers[0];
    } else if (i + 1 == n) {
      scale = centers[i] - centers[i - 1];
    } else {
      scale = 0.5 * (centers[i + 1] - centers[i - 1]);
    }
    if (!(scale > 0.0)) scale = 1.0;
    out.push_back({centers[i], scale});
  }
  return out;
}

}  // namespace tmap
