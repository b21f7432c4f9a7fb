#pragma once

#include <functional>

#include <Eigen/Core>

namespace selfnorm {

struct LbfgsOptions {
  int max_iterations = 2000;
  double gradient_tolerance = 1e-8;  // on the l2 norm of the gradient
  double shrink = 0.5;               // backtracking step factor
  double sufficient_decrease = 1e-4; // Armijo constant
  int history_size = 10;
  int max_backtracks = 60;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Objective returning f(x) and writing its gradient.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Limited-memory BFGS minimization with Armijo backtracking. Deterministic:
/// identical inputs produce bit-identical iterates.
LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options);

}  // namespace selfnorm
