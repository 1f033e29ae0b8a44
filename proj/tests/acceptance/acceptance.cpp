// Acceptance suite. Prints one PASS/FAIL line per criterion; exit status is
// nonzero if any criterion fails. Pass criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "tmap/adapt.hpp"
#include "tmap/optimize.hpp"
#include "tmap/random.hpp"
#include "tmap/targets.hpp"
#include "tmap/templates.hpp"
#include "tmap/triangular_map.hpp"

namespace {

using namespace tmap;

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double heldout_nll(const TriangularMap& map, const SampleMatrix& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) s -= map.pullback_logpdf(row_span(x, i));
  return s / static_cast<double>(x.rows());
}

std::vector<double> column(const SampleMatrix& x, Eigen::Index j) {
  return {x.col(j).data(), x.col(j).data() + x.rows()};
}

Outcome round_trip() {
  double worst = 0.0;
  for (auto kind : {ComponentKind::Marginal, ComponentKind::Separable, ComponentKind::CrossTerm}) {
    const auto map = testing::random_map(kind, 3, 101 + static_cast<int>(kind), 3);
    const auto& st = map.standardizer();
    SampleMatrix x = standard_normal_samples(1000, 3, 7);
    for (int j = 0; j < 3; ++j) x.col(j) = (x.col(j) * st.stddev()[j]).array() + st.mean()[j];
    const SampleMatrix back = map.inverse(map.forward(x));
    worst = std::max(worst, (back - x).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, fmt("max |S^-1(S(x)) - x| = %.2e over 3 kinds x 1000 points", worst)};
}

// Simpson rule over [lo, hi] with n points; n odd.
double simpson_1d(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / (n - 1);
  const auto w = testing::simpson_weights(n, h);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += w[static_cast<std::size_t>(i)] * f(lo + i * h);
  return s;
}

Outcome pullback_normalization() {
  constexpr int n = 2001;
  // 1-D: marginal of x2 under wavy, a bimodal density.
  const SampleMatrix x1d = sample(TargetSpec::wavy(), 5000, 21).rightCols(1);
  const SampleMatrix u1d = Standardizer::fit(x1d).standardize(x1d);
  const auto map1 = fit_map_from_samples(make_template(1, testing::kind_options(ComponentKind::Separable, 3), &u1d),
                                         x1d)
                        .map;
  const double lo1 = -5.0, hi1 = 5.0;
  const double i1 = simpson_1d([&](double v) { return std::exp(map1.pullback_logpdf(std::vector<double>{v})); },
                               lo1, hi1, n);

  // 2-D: banana with a separable degree-3 map.
  const SampleMatrix x2d = sample(TargetSpec::banana(), 5000, 22);
  const SampleMatrix u2d = Standardizer::fit(x2d).standardize(x2d);
  const auto map2 =
      fit_map_from_samples(make_template(2, testing::kind_options(ComponentKind::Separable, 3), &u2d), x2d).map;
  const double a0 = -8.0, a1 = 8.0, b0 = -10.0, b1 = 40.0;
  const double hb = (b1 - b0) / (n - 1);
  const auto wb = testing::simpson_weights(n, hb);
  const double i2 = simpson_1d(
      [&](double v) {
        double s = 0.0;
        std::vector<double> p{v, 0.0};
        for (int j = 0; j < n; ++j) {
          p[1] = b0 + j * hb;
          s += wb[static_cast<std::size_t>(j)] * std::exp(map2.pullback_logpdf(p));
        }
        return s;
      },
      a0, a1, n);
  const bool ok = std::abs(i1 - 1.0) <= 1e-6 && std::abs(i2 - 1.0) <= 1e-6;
  return {ok, fmt("1-D integral - 1 = %.2e, 2-D integral - 1 = %.2e", i1 - 1.0, i2 - 1.0)};
}

Outcome gaussian_conditioning() {
  const SampleMatrix x = sample(TargetSpec::corr_gauss(0.8), 100000, 31);
  const auto map = fit_map_from_samples(make_template(2, {}), x).map;
  const SampleMatrix z = standard_normal_samples(10000, 1, 32);
  const std::vector<double> head{1.0};
  std::vector<double> draws(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) draws[i] = map.conditional_inverse(row_span(z, i), head)[0];
  double mean = 0.0, var = 0.0;
  for (double d : draws) mean += d;
  mean /= double(draws.size());
  for (double d : draws) var += (d - mean) * (d - mean);
  var /= double(draws.size() - 1);
  const bool ok = std::abs(mean - 0.8) <= 0.02 && std::abs(var - 0.36) <= 0.02;
  return {ok, fmt("conditional mean %.4f (0.8), variance %.4f (0.36)", mean, var)};
}

Outcome closed_form_equivalence() {
  const std::vector<TargetSpec> targets{TargetSpec::banana(), TargetSpec::wavy(), TargetSpec::mixture_corners(),
                                        TargetSpec::ar1(3, 0.6), TargetSpec::corr_gauss(0.5)};
  CounterRng rng(41);
  double obj_gap = 0.0, coef_gap = 0.0, stationarity = 0.0;
  for (int p = 0; p < 20; ++p) {
    const auto& spec = targets[static_cast<std::size_t>(p) % targets.size()];
    const int dim = spec.dim();
    const SampleMatrix raw = sample(spec, 500, 400 + p);
    const SampleMatrix x = Standardizer::fit(raw).standardize(raw);
    TemplateOptions o;
    o.kind = ComponentKind::Separable;
    o.degree = 1 + static_cast<int>(rng.uniform() * (dim == 2 ? 3 : 2));
    o.rbf_count = static_cast<int>(rng.uniform() * 4);
    o.edge_terms = o.rbf_count > 0 && rng.uniform() < 0.5;
    const auto templ = make_template(dim, o, &x);
    const auto& comp = templ.back();
    const auto m = static_cast<Eigen::Index>(comp.nonmonotone().size());
    if (m > 6 || comp.monotone().size() > 6) return {false, fmt("problem %d exceeds m, n <= 6", p)};
    FitOptions f;
    f.gradient_tolerance = 1e-12;
    f.max_iterations = 5000;
    const auto closed = fit_component_closed_form(comp, x, f);
    const auto generic = fit_component_generic(comp, x, f);
    obj_gap = std::max(obj_gap, std::abs(nll_objective(closed.component, x, f.regularization) -
                                         nll_objective(generic.component, x, f.regularization)));
    coef_gap = std::max(
        coef_gap, (closed.component.coefficients() - generic.component.coefficients()).cwiseAbs().maxCoeff());
    stationarity = std::max(
        stationarity, nll_gradient(closed.component, x, f.regularization).head(m).cwiseAbs().maxCoeff());
  }
  const bool ok = obj_gap <= 1e-8 && coef_gap <= 1e-4 && stationarity <= 1e-8;
  return {ok, fmt("objective gap %.2e, coefficient gap %.2e, nonmonotone gradient %.2e", obj_gap, coef_gap,
                  stationarity)};
}

Outcome gradient_suite() {
  const SampleMatrix raw = sample(TargetSpec::banana(), 300, 51);
  const SampleMatrix x = Standardizer::fit(raw).standardize(raw);
  const Regularization reg = Regularization::l2(1e-3);
  double worst = 0.0;
  for (auto kind : {ComponentKind::Marginal, ComponentKind::Separable, ComponentKind::CrossTerm}) {
    const auto templ = make_template(2, testing::kind_options(kind, 3), &x);
    CounterRng rng(52);
    for (int t = 0; t < 50; ++t) {
      const auto comp = testing::randomize(templ[1], rng);
      const Eigen::VectorXd c0 = comp.coefficients();
      const Eigen::VectorXd g = nll_gradient(comp, x, reg);
      for (Eigen::Index j = 0; j < c0.size(); ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(c0[j]));
        Eigen::VectorXd cp = c0, cm = c0;
        cp[j] += h;
        cm[j] -= h;
        const double fd =
            (nll_objective(comp.with_coefficients(cp), x, reg) - nll_objective(comp.with_coefficients(cm), x, reg)) /
            (2 * h);
        worst = std::max(worst, std::abs(g[j] - fd) / std::max({std::abs(g[j]), std::abs(fd), 1.0}));
      }
    }
  }
  return {worst <= 1e-5, fmt("max relative error %.2e over 3 kinds x 50 points", worst)};
}

Outcome parameterization_ordering() {
  double nll[2][3];
  const TargetSpec specs[2] = {TargetSpec::wavy(), TargetSpec::wavy_rotated()};
  for (int s = 0; s < 2; ++s) {
    const SampleMatrix x = sample(specs[s], 20000, 61);
    const SampleMatrix test = sample(specs[s], 20000, 62);
    const Standardizer st = Standardizer::fit(x);
    const SampleMatrix u = st.standardize(x);
    int i = 0;
    for (auto kind : {ComponentKind::Marginal, ComponentKind::Separable, ComponentKind::CrossTerm}) {
      TemplateOptions o;
      o.kind = kind;
      o.degree = kind == ComponentKind::Marginal ? 1 : 6;
      o.rbf_count = 6;
      o.edge_terms = true;
      o.family = TermFamily::HermiteFunction;
      nll[s][i++] = heldout_nll(fit_map_standardized(make_template(2, o, &u), u, st).map, test);
    }
  }
  const auto& w = nll[0];
  const auto& r = nll[1];
  const bool wavy_ok = w[2] <= w[1] && w[1] <= w[0] && w[1] - w[2] <= 0.05;
  const bool rot_ok = r[1] - r[2] >= 0.1 && r[0] > r[1] && r[0] > r[2];
  return {wavy_ok && rot_ok, fmt("wavy marginal/separable/cross %.4f/%.4f/%.4f; rotated %.4f/%.4f/%.4f", w[0], w[1],
                                 w[2], r[0], r[1], r[2])};
}

Outcome composite_benefit() {
  constexpr Eigen::Index n = 5000;
  const double critical = 1.628 * std::sqrt(2.0 / n);
  const std::vector<double> head{0.0};

  // Two modes stacked along x2, so x2 | x1 is bimodal and a linear map cannot
  // represent it.
  const auto mix = TargetSpec::mixture({0.5, 0.5}, {Eigen::Vector2d(0, -2), Eigen::Vector2d(0, 2)}, 0.5);
  const auto law = analytic_conditional(mix, head);
  const auto map = fit_map_from_samples(make_template(2, {}), sample(mix, n, 71)).map;
  const auto plain = column(map.sample_conditional(head, n, 72), 0);
  const SampleMatrix joint = sample(mix, n, 73);
  std::vector<double> comp(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) comp[i] = map.composite_conditional(row_span(joint, i), head)[0];
  const auto cdf = [&](double v) { return law.cdf(v); };
  const double ks_plain = testing::ks_one_sample(plain, cdf);
  const double ks_comp = testing::ks_one_sample(comp, cdf);

  // Exact map: both routes sample the same law.
  const auto exact = testing::gaussian_map();
  const std::vector<double> one{1.0};
  const auto gp = column(exact.sample_conditional(one, n, 74), 0);
  const SampleMatrix gj = sample(TargetSpec::corr_gauss(0.8), n, 75);
  std::vector<double> gc(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) gc[i] = exact.composite_conditional(row_span(gj, i), one)[0];
  const double ks_exact = testing::ks_two_sample(gp, gc);

  const bool ok = ks_comp < ks_plain && ks_plain - ks_comp >= 0.05 && ks_exact < critical;
  return {ok, fmt("mixture KS plain %.4f, composite %.4f; exact map two-sample KS %.4f (critical %.4f)", ks_plain,
                  ks_comp, ks_exact, critical)};
}

Outcome adaptation() {
  const SampleMatrix x = sample(TargetSpec::corr_gauss(0.8), 10000, 81);
  TemplateOptions o;
  o.kind = ComponentKind::CrossTerm;
  const auto r = adapt_map(2, o, x);
  std::vector<int> first;
  for (const auto& step : r.fit.report.adaptation) {
    if (step.component == 1) {
      first = step.multi_index;
      break;
    }
  }
  double worst_rise = 0.0;
  std::size_t steps = 0;
  for (const auto& trace : r.train_trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) worst_rise = std::max(worst_rise, trace[i] - trace[i - 1]);
    steps += trace.empty() ? 0 : trace.size() - 1;
  }
  const bool ok = first == std::vector<int>{1, 0} && worst_rise <= 1e-6;
  std::string idx = first.empty() ? "none" : "(";
  for (std::size_t i = 0; i < first.size(); ++i) idx += std::to_string(first[i]) + (i + 1 < first.size() ? "," : ")");
  return {ok, fmt("first S2 term %s, %zu refits, largest train objective rise %.2e", idx.c_str(), steps, worst_rise)};
}

Outcome density_fit() {
  const auto spec = TargetSpec::corr_gauss(0.8);
  const auto base = make_log_density(spec);
  LogDensity shifted = base;
  shifted.value = [base](std::span<const double> v) { return base.value(v) + 17.3; };
  FitOptions f;
  f.gradient_tolerance = 1e-10;
  const auto a = fit_map_from_density(make_template(2, {}), base, 10000, 91, f);
  const auto b = fit_map_from_density(make_template(2, {}), shifted, 10000, 91, f);

  // R1(z) = z1, R2(z) = 0.8 z1 + 0.6 z2. Zero coefficients are held to 0.05
  // in absolute terms.
  double worst = 0.0;
  const auto check = [&](double got, double want) {
    worst = std::max(worst, want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want));
  };
  for (int k = 0; k < 2; ++k) {
    const auto& c = a.map.component(k);
    for (const auto& t : c.nonmonotone()) check(t.coefficient, t.factors.empty() ? 0.0 : 0.8);
    check(c.monotone()[0].coefficient, k == 0 ? 1.0 : 0.6);
  }
  const double shift_gap = (a.report.final_coefficients - b.report.final_coefficients).cwiseAbs().maxCoeff();
  const bool ok = worst <= 0.05 && shift_gap <= 1e-6;
  return {ok, fmt("worst relative coefficient error %.4f, shift changes coefficients by %.2e", worst, shift_gap)};
}

Outcome markov_sparsity() {
  const auto spec = TargetSpec::ar1(4, 0.8);
  const SampleMatrix x = sample(spec, 10000, 101);
  const SampleMatrix test = sample(spec, 10000, 102);
  TemplateOptions dense;
  dense.degree = 2;
  TemplateOptions markov = dense;
  markov.sparsity = Sparsity::Markov;
  markov.markov_order = 1;
  const auto d = fit_map_from_samples(make_template(4, dense), x).map;
  const auto m = fit_map_from_samples(make_template(4, markov), x).map;
  const double nd = heldout_nll(d, test), nm = heldout_nll(m, test);

  bool invariant = true;
  for (Eigen::Index i = 0; i < 100; ++i) {
    std::vector<double> p(row_span(test, i).begin(), row_span(test, i).end());
    const double z3 = m.forward(p)[2];
    for (double dx : {-3.0, 0.5, 7.0}) {
      auto q = p;
      q[0] += dx;
      invariant = invariant && m.forward(q)[2] == z3;
    }
  }
  const bool ok = std::abs(nm - nd) <= 0.02 && m.num_coefficients() < d.num_coefficients() && invariant;
  return {ok, fmt("held-out NLL dense %.4f, markov %.4f; coefficients %zu vs %zu; z3 invariant to x1: %s", nd, nm,
                  d.num_coefficients(), m.num_coefficients(), invariant ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "round-trip inversion", 5, round_trip},
      {2, "pullback normalization", 10, pullback_normalization},
      {3, "gaussian conditioning", 30, gaussian_conditioning},
      {4, "closed-form equivalence", 60, closed_form_equivalence},
      {5, "gradient suite", 30, gradient_suite},
      {6, "parameterization ordering", 300, parameterization_ordering},
      {7, "composite-map benefit", 120, composite_benefit},
      {8, "adaptation", 120, adaptation},
      {9, "maps from densities", 120, density_fit},
      {10, "markov sparsity", 120, markov_sparsity},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = out.ok && secs < c.limit_seconds;
    failures += pass ? 0 : 1;
    std::printf("%s %2d %-26s %s [%.1f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                secs, c.limit_seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
