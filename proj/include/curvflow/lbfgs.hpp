#pragma once

// Limited-memory BFGS for smooth objectives that are only available to a few
// ulps. Trial points are accepted by the Armijo rule or, when the function
// change is below the noise level, by the gradient-only approximate Wolfe
// test, so the iteration keeps converging in the gradient after function
// differences stop carrying information.

#include <functional>
#include <string>

#include <Eigen/Core>

namespace curvflow {

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 500;
  /// Stop when the max-norm of the gradient falls below this.
  double grad_tol = 1e-10;
  /// Absolute noise level of f; 0 selects 1e-13 (1 + |f|).
  double f_noise = 0.0;
  double armijo = 1e-4;
  double wolfe = 0.9;
  int max_backtracks = 40;
  /// Upper bound on the max-norm of the first trial step.
  double max_step = 1.0;
  /// Inverse Hessian guess used while the memory is empty.
  double initial_scale = 1.0;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_norm = 0.0;  ///< max-norm
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string status;
};

/// Objective callback: returns f(x) and writes its gradient. A non-finite
/// return value marks x as infeasible and makes the line search back off.
using LbfgsObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, Eigen::VectorXd x0, const LbfgsOptions& options = {});

}  // namespace curvflow
