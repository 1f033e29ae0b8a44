#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tmap {

/// Smooth objective: returns f(x) and writes the gradient. Returning a
/// non-finite value marks x as infeasible; the line search backs off.
using SmoothObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BoxQnOptions {
  /// Stop when the projected gradient inf-norm is below
  /// gradient_tolerance * max(1, |f|).
  double gradient_tolerance = 1e-8;
  /// Stop when an accepted step lowers f by less than this relative amount.
  double function_tolerance = 1e-15;
  int max_iterations = 500;
  int memory = 10;
};

struct BoxQnResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;  // projected gradient inf-norm at x
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> trace;  // objective after every accepted iterate
};

/// Limited-memory quasi-Newton with simple bounds: the L-BFGS direction on
/// the free variables, a projected backtracking line search, and variables
/// at a bound with an outward gradient held fixed. Bounds may be infinite.
/// x0 is projected onto the box first and must give a finite objective.
BoxQnResult minimize_box(const SmoothObjective& objective, Eigen::VectorXd x0,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         const BoxQnOptions& options = {});

/// Accelerated proximal gradient for f(x) + sum_i w_i |x_i| subject to the same
/// kind of bounds. The proximal step clamps the soft-threshold to the box.
BoxQnResult minimize_l1_proximal(const SmoothObjective& objective, Eigen::VectorXd x0,
                                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                 const Eigen::VectorXd& l1_weights,
                                 const BoxQnOptions& options = {});

}  // namespace tmap
