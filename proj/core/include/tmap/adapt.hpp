#pragma once

#include <cstdint>
#include <vector>

#include "tmap/optimize.hpp"
#include "tmap/templates.hpp"

namespace tmap {

/// Downward-closed set of multi-indices for one component, kept sorted.
class MultiIndexSet {
 public:
  explicit MultiIndexSet(int width) : width_(width) {}
  MultiIndexSet(int width, std::vector<MultiIndex> members);

  /// {0, e_k}: the identity start S_k = x_k.
  static MultiIndexSet identity(int width);

  int width() const { return width_; }
  const std::vector<MultiIndex>& members() const { return members_; }
  bool contains(const MultiIndex& alpha) const;
  bool downward_closed() const;
  /// Inserts alpha; throws ParameterError if that would break downward closure.
  void insert(const MultiIndex& alpha);

  /// Indices outside the set whose backward neighbours all lie inside.
  std::vector<MultiIndex> reduced_margin() const;

 private:
  int width_;
  std::vector<MultiIndex> members_;
};

struct AdaptOptions {
  /// Accepted candidates per component.
  int max_terms = 10;
  int max_total_degree = 8;
  double validation_fraction = 0.2;
  /// Stop after this many consecutive acceptances without a better
  /// validation NLL.
  int patience = 2;
  /// Shuffles the train/validation split.
  std::uint64_t seed = 0;

  void validate() const;
};

/// Reduced margin of the set, filtered by component kind and total degree.
std::vector<MultiIndex> propose_candidates(const MultiIndexSet& set, ComponentKind kind,
                                           int max_total_degree = 8);

struct CandidateScore {
  MultiIndex candidate;
  double score = 0.0;  // |dJ/dc| at c = 0
};

/// Objective gradient magnitude with respect to each candidate's coefficient,
/// evaluated at zero with the current coefficients held fixed.
std::vector<CandidateScore> score_candidates(const MapComponent& component,
                                             const MultiIndexSet& set,
                                             const std::vector<MultiIndex>& candidates,
                                             const TemplateOptions& templ,
                                             const SampleMatrix& standardized, int threads = 1);

/// Index of the best-scoring candidate: largest score, then lower total
/// degree, then lexicographically smallest.
std::size_t select_candidate(const std::vector<CandidateScore>& scores);

struct AdaptResult {
  MapFit fit;
  std::vector<MultiIndexSet> sets;
  /// Train objective after every refit, per component, starting with the
  /// identity-start fit.
  std::vector<std::vector<double>> train_trace;
  /// Validation NLL (per sample) after every refit, per component.
  std::vector<std::vector<double>> validation_trace;
};

/// Greedy adaptation from the identity start on a seeded train/validation
/// split. Each component grows by its steepest candidate until max_terms or
/// patience runs out; the best-validation version of every component is kept.
AdaptResult adapt_map(int dim, const TemplateOptions& templ, const SampleMatrix& samples,
                      const AdaptOptions& adapt = {}, const FitOptions& fit = {});

}  // namespace tmap
