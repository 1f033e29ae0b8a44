#pragma once

// Precomputed basis evaluations for a component over a fixed sample set.
// Samples are fixed during fitting, so every basis term (and, for cross-term
// components, every integrand term at every quadrature node) is evaluated
// once and objectives reduce to matrix-vector products.

#include <Eigen/Core>

#include "tmap/map_component.hpp"
#include "tmap/standardizer.hpp"

namespace tmap::detail {

struct ComponentDesign {
  ComponentKind kind = ComponentKind::Separable;
  Rectifier rectifier = Rectifier::Softplus;
  Eigen::Index samples = 0;
  Eigen::Index num_nonmonotone = 0;
  Eigen::Index num_monotone = 0;
  int nodes = 0;

  Eigen::MatrixXd nonmonotone;  // N x m
  // Separable / marginal.
  Eigen::MatrixXd monotone;     // N x n, P^mon
  Eigen::MatrixXd monotone_d;   // N x n, derivative rows b^i
  // Cross-term.
  Eigen::MatrixXd integrand;    // (N*Q) x n, integrand basis at quadrature nodes
  Eigen::MatrixXd integrand_end;  // N x n, integrand basis at t = x_k
  Eigen::VectorXd node_weight;  // N*Q, (x_k / 2) w_q
};

struct DesignValues {
  Eigen::VectorXd value;     // S_k at each sample
  Eigen::VectorXd diag;      // dS_k/dx_k at each sample
  Eigen::VectorXd node_h;    // cross-term: integrand at nodes
  Eigen::VectorXd end_h;     // cross-term: integrand at x_k
  bool feasible = true;      // every diag entry > 0
};

ComponentDesign build_design(const MapComponent& component, const SampleMatrix& samples,
                             int threads = 1);

DesignValues evaluate_design(const ComponentDesign& design, const Eigen::VectorXd& coefficients);

/// sum_i w_i dS_k(X^i)/dc - sum_i d log(dS_k/dx_k)(X^i)/dc.
Eigen::VectorXd design_gradient(const ComponentDesign& design, const DesignValues& values,
                                const Eigen::VectorXd& weights);

/// Square roots of the Gauss-Newton Hessian diagonal,
/// sum_i (dS_k/dc_j)^2 + (d log dS_k/dx_k / dc_j)^2, used to rescale coefficients.
Eigen::VectorXd design_scales(const ComponentDesign& design, const DesignValues& values);

}  // namespace tmap::detail
