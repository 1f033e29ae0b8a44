#include "tmap/templates.hpp"

#include <algorithm>
#include <numeric>

#include "tmap/error.hpp"
#include "tmap/optimize.hpp"

namespace tmap {

namespace {

BasisFamily family_of_degree(const TemplateOptions& o, int degree) {
  if (degree == 0) return BasisFamily::constant();
  switch (o.family) {
    case TermFamily::HermitePoly: return BasisFamily::hermite_poly(degree);
    case TermFamily::HermiteFunction: return BasisFamily::hermite_function(degree);
    case TermFamily::EdgeControlled: return BasisFamily::edge_controlled(degree, o.edge_radius);
  }
  return BasisFamily::constant();
}

bool is_identity_direction(const MultiIndex& alpha) {
  const auto w = alpha.size();
  for (std::size_t j = 0; j + 1 < w; ++j) {
    if (alpha[j] != 0) return false;
  }
  return alpha.back() == 1;
}

void enumerate(int width, int degree, MultiIndex& cur, int pos, int left,
               std::vector<MultiIndex>& out) {
  if (pos == width) {
    out.push_back(cur);
    return;
  }
  for (int d = 0; d <= left; ++d) {
    cur[pos] = d;
    enumerate(width, degree, cur, pos + 1, left - d, out);
  }
  cur[pos] = 0;
}

bool same_factors(const TermSpec& a, const TermSpec& b) { return a.factors == b.factors; }

}  // namespace

std::string term_family_name(TermFamily f) {
  switch (f) {
    case TermFamily::HermitePoly: return "hermite_poly";
    case TermFamily::HermiteFunction: return "hermite_function";
    case TermFamily::EdgeControlled: return "edge_controlled_hermite";
  }
  return "hermite_function";
}

TermFamily term_family_from_name(const std::string& name) {
  if (name == "hermite_poly") return TermFamily::HermitePoly;
  if (name == "hermite_function") return TermFamily::HermiteFunction;
  if (name == "edge_controlled_hermite" || name == "edge_controlled") {
    return TermFamily::EdgeControlled;
  }
  throw ParameterError("unknown term family '" + name + "'");
}

std::vector<int> active_variables(const TemplateOptions& o, int k, int dim) {
  if (k < 0 || k >= dim) throw ParameterError("component index out of range");
  std::vector<int> active;
  switch (o.sparsity) {
    case Sparsity::Dense:
      active.resize(static_cast<std::size_t>(k) + 1);
      std::iota(active.begin(), active.end(), 0);
      break;
    case Sparsity::Markov: {
      if (o.markov_order < 0) throw ParameterError("Markov order must be >= 0");
      for (int j = std::max(0, k - o.markov_order); j <= k; ++j) active.push_back(j);
      break;
    }
    case Sparsity::Explicit: {
      if (static_cast<int>(o.active_sets.size()) != dim) {
        throw ParameterError("explicit sparsity needs one active set per component");
      }
      active = o.active_sets[static_cast<std::size_t>(k)];
      if (active.empty() || active.back() != k ||
          !std::is_sorted(active.begin(), active.end()) ||
          std::adjacent_find(active.begin(), active.end()) != active.end() || active.front() < 0) {
        throw ParameterError("active set of component " + std::to_string(k) +
                             " must be strictly increasing and end with " + std::to_string(k));
      }
      break;
    }
  }
  return active;
}

bool multi_index_allowed(ComponentKind kind, const MultiIndex& alpha) {
  if (alpha.empty()) return false;
  if (std::any_of(alpha.begin(), alpha.end(), [](int d) { return d < 0; })) return false;
  const int ak = alpha.back();
  const bool has_prev =
      std::any_of(alpha.begin(), alpha.end() - 1, [](int d) { return d != 0; });
  switch (kind) {
    case ComponentKind::Marginal:
      return !has_prev && ak <= 1;
    case ComponentKind::Separable:
      return ak == 0 || (ak == 1 && !has_prev);
    case ComponentKind::CrossTerm:
      return true;
  }
  return false;
}

std::vector<MultiIndex> total_degree_set(ComponentKind kind, int width, int degree) {
  if (width < 1) throw ParameterError("multi-index width must be positive");
  if (degree < 1) throw ParameterError("template degree must be >= 1");
  std::vector<MultiIndex> all;
  MultiIndex cur(static_cast<std::size_t>(width), 0);
  enumerate(width, degree, cur, 0, degree, all);
  std::vector<MultiIndex> out;
  for (auto& a : all) {
    if (multi_index_allowed(kind, a)) out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end());
  return out;
}

MapComponent component_from_multi_indices(int index, const std::vector<int>& active,
                                          const std::vector<MultiIndex>& set,
                                          const TemplateOptions& o,
                                          const SampleMatrix* standardized) {
  if (active.empty() || active.back() != index) {
    throw ParameterError("active set must end with the component index");
  }
  const std::size_t w = active.size();
  std::vector<TermSpec> g, f;
  bool has_identity = false;
  for (const auto& alpha : set) {
    if (alpha.size() != w) throw ParameterError("multi-index width does not match the active set");
    if (!multi_index_allowed(o.kind, alpha)) {
      throw ParameterError("multi-index not allowed for a " + component_kind_name(o.kind) +
                           " component");
    }
    TermSpec term;
    for (std::size_t j = 0; j + 1 < w; ++j) {
      if (alpha[j] > 0) term.factors.push_back({active[j], family_of_degree(o, alpha[j])});
    }
    const int ak = alpha.back();
    if (ak == 0) {
      g.push_back(std::move(term));
      continue;
    }
    if (o.kind == ComponentKind::CrossTerm) {
      if (ak >= 2) term.factors.push_back({index, BasisFamily::hermite_function(ak)});
    } else {
      term.factors.push_back({index, BasisFamily::linear()});
    }
    has_identity = has_identity || is_identity_direction(alpha);
    f.push_back(std::move(term));
  }
  if (!has_identity) {
    throw ParameterError("multi-index set of component " + std::to_string(index) +
                         " must contain the unit index of x_k");
  }
  if (g.empty()) g.push_back(TermSpec{});

  if (o.kind != ComponentKind::CrossTerm && o.rbf_count > 0) {
    if (!standardized) throw ParameterError("RBF terms need samples to place their centers");
    std::vector<double> col(static_cast<std::size_t>(standardized->rows()));
    for (Eigen::Index i = 0; i < standardized->rows(); ++i) col[i] = (*standardized)(i, index);
    const auto placed = place_rbf_centers(col, o.rbf_count);
    for (const auto& p : placed) {
      f.push_back({{Factor{index, BasisFamily::rbf(RbfKind::IntegratedRbf, p.center, p.scale)}}, 0.0});
    }
    if (o.edge_terms) {
      f.push_back({{Factor{index, BasisFamily::rbf(RbfKind::LeftEdge, placed.front().center,
                                                   placed.front().scale)}},
                   0.0});
      // With a single center LET + RET is the linear term shifted, so the
      // pair would make the coefficients non-identifiable.
      if (placed.size() > 1) {
        f.push_back({{Factor{index, BasisFamily::rbf(RbfKind::RightEdge, placed.back().center,
                                                     placed.back().scale)}},
                     0.0});
      }
    }
  }

  // Structure first with placeholder positive slope, then the identity start.
  for (auto& t : f) t.coefficient = 1.0;
  MapComponent shell(index, active, o.kind, g, f, o.rectifier, o.quadrature_order);
  return shell.with_coefficients(initial_coefficients(shell));
}

std::vector<MapComponent> make_template(int dim, const TemplateOptions& o,
                                        const SampleMatrix* standardized,
                                        std::vector<std::string>* warnings) {
  if (dim < 1) throw ParameterError("map dimension must be positive");
  if (o.degree < 1) throw ParameterError("template degree must be >= 1");
  if (o.rbf_count < 0) throw ParameterError("RBF count must be >= 0");
  if (standardized && standardized->cols() != dim) {
    throw ContractViolation("sample width does not match the template dimension");
  }
  std::vector<MapComponent> out;
  for (int k = 0; k < dim; ++k) {
    const auto active = active_variables(o, k, dim);
    auto set = total_degree_set(o.kind, static_cast<int>(active.size()), o.degree);
    out.push_back(component_from_multi_indices(k, active, set, o, standardized));
    if (warnings && o.rbf_count > 0 && o.kind != ComponentKind::CrossTerm) {
      const auto& mon = out.back().monotone();
      const auto placed_terms = static_cast<int>(std::count_if(mon.begin(), mon.end(), [](const TermSpec& t) {
        return t.factors.size() == 1 && t.factors[0].family.kind() == BasisFamily::Kind::IntegratedRbf;
      }));
      if (placed_terms < o.rbf_count) {
        warnings->push_back("component " + std::to_string(k) + ": tied quantiles collapsed " +
                            std::to_string(o.rbf_count) + " RBF centers to " +
                            std::to_string(placed_terms));
      }
    }
  }
  return out;
}

MapComponent carry_coefficients(const MapComponent& from, const MapComponent& to) {
  Eigen::VectorXd c = to.coefficients();
  const auto& fg = from.nonmonotone();
  const auto& ff = from.monotone();
  const auto& tg = to.nonmonotone();
  const auto& tf = to.monotone();
  for (std::size_t i = 0; i < tg.size(); ++i) {
    for (const auto& t : fg) {
      if (same_factors(t, tg[i])) c[static_cast<Eigen::Index>(i)] = t.coefficient;
    }
  }
  const auto m = static_cast<Eigen::Index>(tg.size());
  for (std::size_t i = 0; i < tf.size(); ++i) {
    bool found = false;
    for (const auto& t : ff) {
      if (same_factors(t, tf[i])) {
        c[m + static_cast<Eigen::Index>(i)] = t.coefficient;
        found = true;
      }
    }
    // New terms enter with coefficient zero so the map is unchanged.
    if (!found) c[m + static_cast<Eigen::Index>(i)] = 0.0;
  }
  for (std::size_t i = 0; i < tg.size(); ++i) {
    const bool found = std::any_of(fg.begin(), fg.end(),
                                   [&](const TermSpec& t) { return same_factors(t, tg[i]); });
    if (!found) c[static_cast<Eigen::Index>(i)] = 0.0;
  }
  return to.with_coefficients(c);
}

}  // namespace tmap
