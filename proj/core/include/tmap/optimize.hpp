#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tmap/map_component.hpp"
#include "tmap/standardizer.hpp"
#include "tmap/triangular_map.hpp"

namespace tmap {

enum class RegularizationKind { None, L1, L2 };

std::string regularization_name(RegularizationKind kind);
RegularizationKind regularization_from_name(const std::string& name);

/// Penalty added to a component objective: sum_i lambda_i |c_i| (L1) or
/// sum_i lambda_i c_i^2 (L2). `per_coefficient`, when non-empty, overrides the
/// uniform `lambda` entry by entry.
struct Regularization {
  RegularizationKind kind = RegularizationKind::L2;
  double lambda = 1e-8;
  std::vector<double> per_coefficient;

  static Regularization none() { return {RegularizationKind::None, 0.0, {}}; }
  static Regularization l2(double lambda) { return {RegularizationKind::L2, lambda, {}}; }
  static Regularization l1(double lambda) { return {RegularizationKind::L1, lambda, {}}; }

  double weight(std::size_t i) const;
  double penalty(const Eigen::VectorXd& c) const;
  /// Adds the gradient of the penalty (L2 only; L1 is handled proximally).
  void add_gradient(const Eigen::VectorXd& c, Eigen::VectorXd& grad) const;
  void validate() const;
};

struct FitOptions {
  Regularization regularization;
  double gradient_tolerance = 1e-8;
  int max_iterations = 500;
  /// 0 keeps each component's own quadrature order.
  int quadrature_order = 0;
  /// Worker threads; 0 uses default_thread_count().
  int threads = 0;
  /// Route linear separable components with L2/no penalty to the closed-form path.
  bool use_closed_form = true;
  /// Start from the template's coefficients instead of the identity-like start.
  bool warm_start = false;
};

struct ComponentReport {
  int component = 0;
  std::string method;
  std::vector<double> objective_trace;
  double objective = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// One accepted candidate during greedy adaptation.
struct AdaptStep {
  int component = 0;
  std::vector<int> multi_index;
  double score = 0.0;
  double train_objective = 0.0;
  double validation_nll = 0.0;
};

struct FitReport {
  std::vector<ComponentReport> components;
  std::vector<AdaptStep> adaptation;
  double total_objective = 0.0;
  double wall_time_seconds = 0.0;

  Eigen::VectorXd final_coefficients;

  /// Every component converged.
  bool success() const;
  /// JSON document with the objective traces, gradient norms, coefficients,
  /// acceptance log and timing.
  std::string to_json() const;
};

struct ComponentFit {
  MapComponent component;
  ComponentReport report;
};

struct MapFit {
  TriangularMap map;
  FitReport report;
};

/// sum_i (S_k(X^i)^2 / 2 - log dS_k/dx_k(X^i)) plus the penalty. Samples are
/// standardized, one per row. Throws MonotonicityError for a non-positive
/// diagonal derivative.
double nll_objective(const MapComponent& component, const SampleMatrix& samples,
                     const Regularization& regularization = Regularization::none());

/// Exact gradient of nll_objective with respect to coefficients() (L1 adds
/// its subgradient sign(c) lambda).
Eigen::VectorXd nll_gradient(const MapComponent& component, const SampleMatrix& samples,
                             const Regularization& regularization = Regularization::none());

/// Precomputed quantities of the linear separable problem.
struct SeparableSystem {
  Eigen::MatrixXd p_non;  // N x m
  Eigen::MatrixXd p_mon;  // N x n
  Eigen::MatrixXd b;      // N x n, row i is b^i
  Eigen::MatrixXd d;      // m x n, c_non = -d c_mon
  Eigen::MatrixXd a;      // N x n, (I - P^non M) P^mon
  Eigen::VectorXd lambda_non;
  Eigen::VectorXd lambda_mon;
  Eigen::MatrixXd quadratic;  // n x n, A^T A + 2 D^T Lambda_non D + 2 Lambda_mon
};

SeparableSystem build_separable_system(const MapComponent& component, const SampleMatrix& samples,
                                       const Regularization& regularization);

/// Objective of the reduced problem in the monotone coefficients alone.
double reduced_objective(const SeparableSystem& system, const Eigen::VectorXd& c_mon,
                         Eigen::VectorXd* grad = nullptr);

/// Closed-form path for linear separable components: solves the reduced
/// problem over c_mon >= 0 and back-substitutes the nonmonotone coefficients
/// from the normal equations. Requires L2 or no regularization.
ComponentFit fit_component_closed_form(const MapComponent& component, const SampleMatrix& samples,
                                       const FitOptions& options = {});

/// Box-constrained quasi-Newton (or proximal gradient under L1) on the full
/// objective, for any component kind.
ComponentFit fit_component_generic(const MapComponent& component, const SampleMatrix& samples,
                                   const FitOptions& options = {});

/// Picks the closed-form path where it applies and the generic one otherwise.
ComponentFit fit_component(const MapComponent& component, const SampleMatrix& samples,
                           const FitOptions& options = {});

/// Identity-like starting coefficients for a component.
Eigen::VectorXd initial_coefficients(const MapComponent& component);

/// Standardizes the samples, fits every template component independently
/// (concurrently when threads allow) and assembles the map. Template
/// components live in standardized coordinates.
MapFit fit_map_from_samples(const std::vector<MapComponent>& templ, const SampleMatrix& samples,
                            const FitOptions& options = {});

/// Fits on samples that are already standardized with `standardizer`.
MapFit fit_map_standardized(const std::vector<MapComponent>& templ, const SampleMatrix& standardized,
                            const Standardizer& standardizer, const FitOptions& options = {});

/// Unnormalized log target density with an optional analytic gradient.
struct LogDensity {
  std::function<double(std::span<const double>)> value;
  /// Writes d log pi / dx into the second argument. Central differences are
  /// used when absent.
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  /// False forces serial evaluation.
  bool thread_safe = true;
};

inline constexpr Eigen::Index kDefaultReferenceSamples = 10000;

/// Fits R (reference -> target) by minimizing
///   sum_i -log pi(R(Z^i)) - sum_k log dR_k/dz_k(Z^i)
/// jointly over all components on a fixed, seeded reference ensemble.
MapFit fit_map_from_density(const std::vector<MapComponent>& templ, const LogDensity& target,
                            Eigen::Index n_ref = kDefaultReferenceSamples,
                            std::uint64_t seed = 0, const FitOptions& options = {});

/// Type-7 empirical quantile (linear interpolation between order statistics)
/// of an ascending-sorted sample.
double empirical_quantile(std::span<const double> sorted, double p);

struct RbfPlacement {
  double center = 0.0;
  double scale = 1.0;
};

/// Centers at the i/(count+1) empirical quantiles; each scale is the mean
/// distance to the neighbouring centers. Duplicate centers collapse and a
/// warning is appended.
std::vector<RbfPlacement> place_rbf_centers(std::span<const double> column, int count,
                                            std::vector<std::string>* warnings = nullptr);

}  // namespace tmap
