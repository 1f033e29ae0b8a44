#include "tmap/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>

#include "tmap/error.hpp"
#include "tmap/parallel.hpp"
#include "tmap/random.hpp"

namespace tmap {

namespace {

int total_degree(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

bool same_factors(const TermSpec& a, const TermSpec& b) { return a.factors == b.factors; }

// Position of the coefficient of the term in `grown` that `base` lacks.
Eigen::Index new_term_position(const MapComponent& base, const MapComponent& grown) {
  auto missing = [](const std::vector<TermSpec>& from, const TermSpec& t) {
    return std::none_of(from.begin(), from.end(),
                        [&](const TermSpec& s) { return same_factors(s, t); });
  };
  const auto& g = grown.nonmonotone();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (missing(base.nonmonotone(), g[i])) return static_cast<Eigen::Index>(i);
  }
  const auto& f = grown.monotone();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (missing(base.monotone(), f[i])) return static_cast<Eigen::Index>(g.size() + i);
  }
  throw ContractViolation("candidate term duplicates an existing term");
}

SampleMatrix take_rows(const SampleMatrix& x, const std::vector<Eigen::Index>& rows) {
  SampleMatrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

// Global-coordinate multi-index (length k+1) for the acceptance log.
std::vector<int> to_global(const MultiIndex& alpha, const std::vector<int>& active) {
  std::vector<int> out(static_cast<std::size_t>(active.back()) + 1, 0);
  for (std::size_t j = 0; j < active.size(); ++j) out[static_cast<std::size_t>(active[j])] = alpha[j];
  return out;
}

}  // namespace

MultiIndexSet::MultiIndexSet(int width, std::vector<MultiIndex> members) : width_(width) {
  if (width < 1) throw ParameterError("multi-index width must be positive");
  for (auto& m : members) {
    if (static_cast<int>(m.size()) != width) throw ParameterError("multi-index has the wrong width");
    if (!contains(m)) members_.push_back(std::move(m));
    std::sort(members_.begin(), members_.end());
  }
  if (!downward_closed()) throw ParameterError("multi-index set is not downward closed");
}

MultiIndexSet MultiIndexSet::identity(int width) {
  MultiIndex zero(static_cast<std::size_t>(width), 0);
  MultiIndex ek = zero;
  ek.back() = 1;
  return MultiIndexSet(width, {zero, ek});
}

bool MultiIndexSet::contains(const MultiIndex& alpha) const {
  return std::binary_search(members_.begin(), members_.end(), alpha);
}

bool MultiIndexSet::downward_closed() const {
  for (const auto& m : members_) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (m[j] == 0) continue;
      MultiIndex b = m;
      --b[j];
      if (!contains(b)) return false;
    }
  }
  return true;
}

void MultiIndexSet::insert(const MultiIndex& alpha) {
  if (static_cast<int>(alpha.size()) != width_) throw ParameterError("multi-index has the wrong width");
  if (contains(alpha)) return;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (alpha[j] == 0) continue;
    MultiIndex b = alpha;
    --b[j];
    if (!contains(b)) throw ParameterError("inserting the multi-index would break downward closure");
  }
  members_.insert(std::upper_bound(members_.begin(), members_.end(), alpha), alpha);
}

std::vector<MultiIndex> MultiIndexSet::reduced_margin() const {
  std::vector<MultiIndex> out;
  for (const auto& m : members_) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      MultiIndex c = m;
      ++c[j];
      if (contains(c)) continue;
      bool admissible = true;
      for (std::size_t i = 0; i < c.size() && admissible; ++i) {
        if (c[i] == 0) continue;
        MultiIndex b = c;
        --b[i];
        admissible = contains(b);
      }
      if (admissible) out.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void AdaptOptions::validate() const {
  if (max_terms < 0) throw ParameterError("max_terms must be >= 0");
  if (max_total_degree < 1) throw ParameterError("max_total_degree must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ParameterError("validation fraction must lie in (0, 1)");
  }
  if (patience < 1) throw ParameterError("patience must be >= 1");
}

std::vector<MultiIndex> propose_candidates(const MultiIndexSet& set, ComponentKind kind,
                                           int max_total_degree) {
  std::vector<MultiIndex> out;
  for (auto& c : set.reduced_margin()) {
    if (total_degree(c) <= max_total_degree && multi_index_allowed(kind, c)) out.push_back(std::move(c));
  }
  return out;
}

std::vector<CandidateScore> score_candidates(const MapComponent& component,
                                             const MultiIndexSet& set,
                                             const std::vector<MultiIndex>& candidates,
                                             const TemplateOptions& templ,
                                             const SampleMatrix& standardized, int threads) {
  std::vector<CandidateScore> out(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    auto members = set.members();
    members.push_back(candidates[i]);
    std::sort(members.begin(), members.end());
    const MapComponent grown = carry_coefficients(
        component, component_from_multi_indices(component.index(), component.active(), members,
                                                templ, &standardized));
    const Eigen::VectorXd g = nll_gradient(grown, standardized);
    out[i] = {candidates[i], std::abs(g[new_term_position(component, grown)])};
  });
  return out;
}

std::size_t select_candidate(const std::vector<CandidateScore>& scores) {
  if (scores.empty()) throw ParameterError("no candidates to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const auto& a = scores[i];
    const auto& b = scores[best];
    if (a.score > b.score) {
      best = i;
    } else if (a.score == b.score) {
      const int da = total_degree(a.candidate), db = total_degree(b.candidate);
      if (da < db || (da == db && a.candidate < b.candidate)) best = i;
    }
  }
  return best;
}

AdaptResult adapt_map(int dim, const TemplateOptions& templ, const SampleMatrix& samples,
                      const AdaptOptions& adapt, const FitOptions& fit) {
  const auto t0 = std::chrono::steady_clock::now();
  adapt.validate();
  if (samples.cols() != dim) throw ContractViolation("sample width does not match the dimension");
  if (samples.rows() < 10) throw DegenerateDataError("adaptation needs at least 10 samples");

  // Seeded Fisher-Yates split.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(samples.rows()));
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(adapt.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng() % (i + 1)]);
  }
  const auto n_val = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(adapt.validation_fraction * samples.rows())));
  std::vector<Eigen::Index> val_rows(order.begin(), order.begin() + n_val);
  std::vector<Eigen::Index> train_rows(order.begin() + n_val, order.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  const SampleMatrix train_raw = take_rows(samples, train_rows);
  const Standardizer standardizer = Standardizer::fit(train_raw);
  const SampleMatrix train = standardizer.standardize(train_raw);
  const SampleMatrix val = standardizer.standardize(take_rows(samples, val_rows));

  const int threads = fit.threads > 0 ? fit.threads : default_thread_count();
  FitOptions inner = fit;
  inner.threads = dim >= threads ? 1 : threads;
  const int outer = dim >= threads ? threads : 1;

  struct PerComponent {
    std::optional<ComponentFit> best;
    MultiIndexSet set{1};
    std::vector<AdaptStep> steps;
    std::vector<double> train_trace, val_trace;
  };
  std::vector<PerComponent> results(static_cast<std::size_t>(dim));
  std::vector<std::pair<int, std::string>> failures;
  std::mutex failure_mutex;

  parallel_for(static_cast<std::size_t>(dim), outer, [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    auto& res = results[kk];
    try {
      const auto active = active_variables(templ, k, dim);
      const int width = static_cast<int>(active.size());
      MultiIndexSet set = MultiIndexSet::identity(width);
      MapComponent start = component_from_multi_indices(k, active, set.members(), templ, &train);
      ComponentFit current = fit_component(start, train, inner);
      double val_nll = nll_objective(current.component, val) / static_cast<double>(val.rows());
      res.train_trace.push_back(current.report.objective);
      res.val_trace.push_back(val_nll);
      res.best = current;
      res.set = set;
      double best_val = val_nll;
      int stale = 0;
      FitOptions refit = inner;
      refit.warm_start = true;
      for (int accepted = 0; accepted < adapt.max_terms; ++accepted) {
        const auto candidates = propose_candidates(set, templ.kind, adapt.max_total_degree);
        if (candidates.empty()) break;
        const auto scores =
            score_candidates(current.component, set, candidates, templ, train, inner.threads);
        const auto& chosen = scores[select_candidate(scores)];
        set.insert(chosen.candidate);
        const MapComponent grown = carry_coefficients(
            current.component,
            component_from_multi_indices(k, active, set.members(), templ, &train));
        current = fit_component(grown, train, refit);
        val_nll = nll_objective(current.component, val) / static_cast<double>(val.rows());
        res.train_trace.push_back(current.report.objective);
        res.val_trace.push_back(val_nll);
        res.steps.push_back({k, to_global(chosen.candidate, active), chosen.score,
                             current.report.objective, val_nll});
        if (val_nll < best_val) {
          best_val = val_nll;
          res.best = current;
          res.set = set;
          stale = 0;
        } else if (++stale >= adapt.patience) {
          break;
        }
      }
    } catch (const std::exception& e) {
      std::lock_guard lock(failure_mutex);
      failures.emplace_back(k, e.what());
    }
  });
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::ostringstream msg;
    msg << "adaptation failed for " << failures.size() << " component(s):";
    for (const auto& [k, what] : failures) msg << " [" << k << "] " << what << ';';
    throw FitError(msg.str(), std::move(failures));
  }

  AdaptResult out{MapFit{TriangularMap::identity(dim), {}}, {}, {}, {}};
  std::vector<MapComponent> comps;
  std::vector<double> coeffs;
  for (auto& r : results) {
    comps.push_back(r.best->component);
    const Eigen::VectorXd c = r.best->component.coefficients();
    coeffs.insert(coeffs.end(), c.data(), c.data() + c.size());
    out.fit.report.total_objective += r.best->report.objective;
    out.fit.report.components.push_back(r.best->report);
    out.fit.report.adaptation.insert(out.fit.report.adaptation.end(), r.steps.begin(), r.steps.end());
    out.sets.push_back(r.set);
    out.train_trace.push_back(std::move(r.train_trace));
    out.validation_trace.push_back(std::move(r.val_trace));
  }
  out.fit.report.final_coefficients =
      Eigen::Map<Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  out.fit.map = TriangularMap(std::move(comps), standardizer, MapDirection::TargetToReference);
  out.fit.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace tmap
