#pragma once

#include <map>
#include <string>
#include <vector>

#include "tmap/map_component.hpp"
#include "tmap/standardizer.hpp"

namespace tmap {

enum class Sparsity { Dense, Markov, Explicit };

/// Univariate family used for degree >= 1 factors of template terms.
enum class TermFamily { HermitePoly, HermiteFunction, EdgeControlled };

std::string term_family_name(TermFamily f);
TermFamily term_family_from_name(const std::string& name);

struct TemplateOptions {
  ComponentKind kind = ComponentKind::Separable;
  /// Maximum total degree of the multi-indices spanning each component.
  /// Degree 1 gives the affine map.
  int degree = 1;
  TermFamily family = TermFamily::HermiteFunction;
  double edge_radius = 4.0;
  /// Integrated RBFs appended to the monotone part of marginal and separable
  /// components, centered at empirical quantiles of x_k.
  int rbf_count = 0;
  /// Adds a LET at the first and a RET at the last RBF center.
  bool edge_terms = false;
  Rectifier rectifier = Rectifier::Softplus;
  int quadrature_order = kDefaultQuadratureOrder;
  Sparsity sparsity = Sparsity::Dense;
  /// Markov: component k depends on x_{k-order}..x_k.
  int markov_order = 1;
  /// Explicit: active set of every component, each ending with its index.
  std::vector<std::vector<int>> active_sets;
};

/// Active variables of component k under the options' sparsity pattern.
std::vector<int> active_variables(const TemplateOptions& options, int k, int dim);

/// A multi-index holds one degree per active variable, the last entry
/// belonging to x_k. Entry alpha_k = 0 gives a nonmonotone term. For
/// separable and marginal components alpha = e_k is the linear monotone
/// term. For cross-term components alpha_k >= 1 gives an integrand term whose
/// t-factor is constant for alpha_k = 1 and a Hermite function of degree
/// alpha_k otherwise, so the integrand levels off in the tails.
using MultiIndex = std::vector<int>;

/// Whether a multi-index can appear in a component of the given kind.
bool multi_index_allowed(ComponentKind kind, const MultiIndex& alpha);

/// Builds a component from a multi-index set. Coefficients come from
/// `coefficients` where present and from the identity-like start otherwise.
MapComponent component_from_multi_indices(int index, const std::vector<int>& active,
                                          const std::vector<MultiIndex>& set,
                                          const TemplateOptions& options,
                                          const SampleMatrix* standardized = nullptr);

/// All multi-indices of total degree <= degree over `width` variables that
/// the kind allows, in lexicographic order.
std::vector<MultiIndex> total_degree_set(ComponentKind kind, int width, int degree);

/// Template for a dim-dimensional map. `standardized` samples are needed
/// only when RBF terms are requested.
std::vector<MapComponent> make_template(int dim, const TemplateOptions& options,
                                        const SampleMatrix* standardized = nullptr,
                                        std::vector<std::string>* warnings = nullptr);

/// Copies coefficients of terms that `to` shares with `from` (same part and
/// factors); other terms keep their current coefficients.
MapComponent carry_coefficients(const MapComponent& from, const MapComponent& to);

}  // namespace tmap
