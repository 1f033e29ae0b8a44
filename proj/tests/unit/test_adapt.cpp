#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tmap/adapt.hpp"
#include "tmap/error.hpp"
#include "tmap/targets.hpp"
#include "tmap/templates.hpp"

namespace tmap {
namespace {

bool has(const std::vector<MultiIndex>& v, const MultiIndex& a) {
  return std::find(v.begin(), v.end(), a) != v.end();
}

TEST(Templates, ActiveSets) {
  TemplateOptions o;
  EXPECT_EQ(active_variables(o, 2, 4), (std::vector<int>{0, 1, 2}));
  o.sparsity = Sparsity::Markov;
  o.markov_order = 1;
  EXPECT_EQ(active_variables(o, 3, 4), (std::vector<int>{2, 3}));
  EXPECT_EQ(active_variables(o, 0, 4), (std::vector<int>{0}));
  o.sparsity = Sparsity::Explicit;
  o.active_sets = {{0}, {1}, {0, 2}};
  EXPECT_EQ(active_variables(o, 2, 3), (std::vector<int>{0, 2}));
  o.active_sets = {{0}, {0}, {0, 2}};
  EXPECT_THROW(active_variables(o, 1, 3), ParameterError);
}

TEST(Templates, KindFilters) {
  EXPECT_TRUE(multi_index_allowed(ComponentKind::Separable, {1, 0}));
  EXPECT_TRUE(multi_index_allowed(ComponentKind::Separable, {0, 1}));
  EXPECT_FALSE(multi_index_allowed(ComponentKind::Separable, {1, 1}));
  EXPECT_FALSE(multi_index_allowed(ComponentKind::Separable, {0, 2}));
  EXPECT_FALSE(multi_index_allowed(ComponentKind::Marginal, {1, 0}));
  EXPECT_TRUE(multi_index_allowed(ComponentKind::Marginal, {0, 0}));
  EXPECT_TRUE(multi_index_allowed(ComponentKind::CrossTerm, {2, 3}));
}

TEST(Templates, AffineTemplateIsIdentity) {
  const auto t = make_template(3, {});
  ASSERT_EQ(t.size(), 3u);
  const std::vector<double> x{0.3, -1.2, 2.2};
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(t[k].evaluate(x), x[k], 1e-12);
  EXPECT_EQ(t[2].num_coefficients(), 4u);
}

TEST(Templates, CrossTermStartsAtIdentity) {
  const auto t = make_template(2, testing::kind_options(ComponentKind::CrossTerm, 3));
  const std::vector<double> x{0.3, -1.2};
  EXPECT_NEAR(t[1].evaluate(x), -1.2, 1e-12);
  EXPECT_NEAR(t[1].diag_derivative(x), 1.0, 1e-12);
}

TEST(Templates, RbfNeedsSamples) {
  TemplateOptions o;
  o.rbf_count = 2;
  EXPECT_THROW(make_template(2, o), ParameterError);
}

TEST(Templates, SingleRbfCenterKeepsOneEdge) {
  const SampleMatrix x = standard_normal_samples(200, 1, 3);
  TemplateOptions o;
  o.rbf_count = 1;
  o.edge_terms = true;
  // Linear, one iRBF and the LET; a RET at the same center would duplicate the linear term.
  EXPECT_EQ(make_template(1, o, &x)[0].monotone().size(), 3u);
  o.rbf_count = 2;
  EXPECT_EQ(make_template(1, o, &x)[0].monotone().size(), 5u);
}

TEST(Templates, CarryCoefficients) {
  const auto small = make_template(2, {});
  auto big_opts = TemplateOptions{};
  big_opts.degree = 3;
  const auto big = make_template(2, big_opts);
  Eigen::VectorXd c = small[1].coefficients();
  c.setConstant(0.7);
  const auto carried = carry_coefficients(small[1].with_coefficients(c), big[1]);
  for (const auto& t : carried.nonmonotone()) {
    const bool shared = std::any_of(small[1].nonmonotone().begin(), small[1].nonmonotone().end(),
                                    [&](const TermSpec& s) { return s.factors == t.factors; });
    EXPECT_EQ(t.coefficient, shared ? 0.7 : 0.0);
  }
}

TEST(MultiIndexSet, IdentityMargin) {
  const auto s = MultiIndexSet::identity(2);
  EXPECT_TRUE(s.downward_closed());
  const auto cross = propose_candidates(s, ComponentKind::CrossTerm);
  EXPECT_TRUE(has(cross, {0, 2}));
  EXPECT_TRUE(has(cross, {1, 0}));
  // (1,1) also needs (1,0) in the set.
  EXPECT_FALSE(has(cross, {1, 1}));
  EXPECT_EQ(cross.size(), 2u);
  const auto sep = propose_candidates(s, ComponentKind::Separable);
  EXPECT_EQ(sep, (std::vector<MultiIndex>{{1, 0}}));
}

TEST(MultiIndexSet, ClosureAfterAcceptance) {
  auto s = MultiIndexSet::identity(2);
  s.insert({1, 0});
  s.insert({0, 2});
  s.insert({2, 0});
  s.insert({1, 1});
  EXPECT_TRUE(s.downward_closed());
  const auto m = propose_candidates(s, ComponentKind::CrossTerm);
  EXPECT_TRUE(has(m, {2, 1}));
  EXPECT_TRUE(has(m, {1, 2}));
  EXPECT_FALSE(has(m, {2, 2}));
  EXPECT_THROW(s.insert({2, 2}), ParameterError);
  for (const auto& c : m) {
    auto grown = s;
    grown.insert(c);
    EXPECT_TRUE(grown.downward_closed());
  }
}

TEST(MultiIndexSet, SeparableNeverMixes) {
  auto s = MultiIndexSet::identity(3);
  for (int step = 0; step < 5; ++step) {
    const auto c = propose_candidates(s, ComponentKind::Separable);
    for (const auto& a : c) EXPECT_TRUE(a.back() == 0 || std::count(a.begin(), a.end(), 0) == 2);
    if (c.empty()) break;
    s.insert(c.front());
  }
}

TEST(MultiIndexSet, DegreeCap) {
  MultiIndexSet s(1, {{0}, {1}, {2}, {3}});
  EXPECT_TRUE(propose_candidates(s, ComponentKind::CrossTerm, 3).empty());
  EXPECT_EQ(propose_candidates(s, ComponentKind::CrossTerm, 4).size(), 1u);
}

TEST(Scoring, CorrelatedGaussianPrefersLinearHead) {
  const SampleMatrix raw = sample(TargetSpec::corr_gauss(0.8), 5000, 1);
  const SampleMatrix x = Standardizer::fit(raw).standardize(raw);
  TemplateOptions o;
  o.kind = ComponentKind::CrossTerm;
  const auto set = MultiIndexSet::identity(2);
  const auto comp = fit_component(component_from_multi_indices(1, {0, 1}, set.members(), o), x).component;
  const auto cands = propose_candidates(set, o.kind);
  const auto scores = score_candidates(comp, set, cands, o, x);
  EXPECT_EQ(scores[select_candidate(scores)].candidate, (MultiIndex{1, 0}));
}

TEST(Scoring, IndependentDataStaysUnderNoiseFloor) {
  const Eigen::Index n = 100000;
  const SampleMatrix raw = standard_normal_samples(n, 2, 3);
  const SampleMatrix x = Standardizer::fit(raw).standardize(raw);
  TemplateOptions o;
  o.kind = ComponentKind::Separable;
  const auto set = MultiIndexSet::identity(2);
  const auto comp = fit_component(component_from_multi_indices(1, {0, 1}, set.members(), o), x).component;
  const auto scores = score_candidates(comp, set, propose_candidates(set, o.kind), o, x);
  for (const auto& s : scores) EXPECT_LT(s.score, 5.0 * std::sqrt(double(n)));
}

TEST(Scoring, ExistingTermScoresNearZero) {
  const SampleMatrix raw = sample(TargetSpec::banana(), 3000, 2);
  const SampleMatrix x = Standardizer::fit(raw).standardize(raw);
  TemplateOptions o;
  o.kind = ComponentKind::Separable;
  MultiIndexSet set(2, {{0, 0}, {0, 1}, {1, 0}});
  FitOptions f;
  f.gradient_tolerance = 1e-12;
  const auto comp = fit_component(component_from_multi_indices(1, {0, 1}, set.members(), o), x, f).component;
  const auto g = nll_gradient(comp, x, f.regularization);
  EXPECT_LE(g.cwiseAbs().maxCoeff(), 1e-6 * x.rows());
}

TEST(Selection, TieBreaks) {
  std::vector<CandidateScore> s{{{1, 1}, 2.0}, {{0, 2}, 2.0}, {{2, 0}, 2.0}, {{1, 0}, 1.0}};
  EXPECT_EQ(s[select_candidate(s)].candidate, (MultiIndex{0, 2}));
  s.push_back({{0, 3}, 2.5});
  EXPECT_EQ(s[select_candidate(s)].candidate, (MultiIndex{0, 3}));
  s = {{{2, 0}, 1.0}, {{1, 0}, 1.0}};
  EXPECT_EQ(s[select_candidate(s)].candidate, (MultiIndex{1, 0}));
}

TEST(AdaptMap, CorrelatedGaussianFirstStep) {
  const SampleMatrix raw = sample(TargetSpec::corr_gauss(0.8), 5000, 4);
  TemplateOptions o;
  o.kind = ComponentKind::CrossTerm;
  AdaptOptions a;
  a.max_terms = 3;
  const auto r = adapt_map(2, o, raw, a);
  const AdaptStep* first = nullptr;
  for (const auto& step : r.fit.report.adaptation) {
    if (step.component == 1) {
      first = &step;
      break;
    }
  }
  ASSERT_NE(first, nullptr);
  EXPECT_EQ(first->multi_index, (std::vector<int>{1, 0}));
  for (const auto& trace : r.train_trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-6);
  }
  for (const auto& s : r.sets) EXPECT_TRUE(s.downward_closed());
  for (const auto& v : r.validation_trace) {
    EXPECT_LE(*std::min_element(v.begin(), v.end()), v.front());
  }
}

TEST(AdaptMap, ZeroTermsKeepsTemplate) {
  const SampleMatrix raw = sample(TargetSpec::banana(), 500, 5);
  AdaptOptions a;
  a.max_terms = 0;
  const auto r = adapt_map(2, {}, raw, a);
  EXPECT_TRUE(r.fit.report.adaptation.empty());
  for (const auto& s : r.sets) EXPECT_EQ(s.members(), MultiIndexSet::identity(s.width()).members());
}

TEST(AdaptMap, Deterministic) {
  const SampleMatrix raw = sample(TargetSpec::banana(), 800, 6);
  TemplateOptions o;
  o.kind = ComponentKind::CrossTerm;
  AdaptOptions a;
  a.max_terms = 3;
  const auto r1 = adapt_map(2, o, raw, a);
  const auto r2 = adapt_map(2, o, raw, a);
  ASSERT_EQ(r1.fit.report.adaptation.size(), r2.fit.report.adaptation.size());
  for (std::size_t i = 0; i < r1.fit.report.adaptation.size(); ++i) {
    EXPECT_EQ(r1.fit.report.adaptation[i].multi_index, r2.fit.report.adaptation[i].multi_index);
    EXPECT_EQ(r1.fit.report.adaptation[i].score, r2.fit.report.adaptation[i].score);
  }
}

TEST(AdaptMap, Validation) {
  AdaptOptions a;
  a.validation_fraction = 1.0;
  EXPECT_THROW(a.validate(), ParameterError);
  a = {};
  a.patience = 0;
  EXPECT_THROW(a.validate(), ParameterError);
  const SampleMatrix tiny = standard_normal_samples(9, 2, 1);
  EXPECT_THROW(adapt_map(2, {}, tiny), DegenerateDataError);
}

}  // namespace
}  // namespace tmap
