#include "selfnorm/optimizer.hpp"

#include <cmath>
#include <deque>
#include <vector>

#include "selfnorm/errors.hpp"

namespace selfnorm {

namespace {

struct Correction {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Two-loop recursion: returns -H g for the implicit inverse Hessian H.
Eigen::VectorXd search_direction(const std::deque<Correction>& history, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  if (!history.empty()) {
    const auto& last = history.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return -q;
}

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options) {
  if (options.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(options.gradient_tolerance > 0.0)) throw ConfigError("gradient tolerance must be positive");
  if (!(options.shrink > 0.0 && options.shrink < 1.0)) throw ConfigError("shrink must lie in (0, 1)");

  LbfgsResult result;
  result.x = std::move(x0);
  Eigen::VectorXd grad(result.x.size());
  double f = objective(result.x, grad);
  if (!std::isfinite(f)) throw NumericError("objective is not finite at the starting point");

  std::deque<Correction> history;
  Eigen::VectorXd trial_grad(result.x.size());
  bool restarted = false;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const double gnorm = grad.norm();
    if (gnorm <= options.gradient_tolerance) break;

    Eigen::VectorXd dir = search_direction(history, grad);
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      history.clear();
      dir = -grad;
      slope = -grad.squaredNorm();
    }
    double step = history.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;

    Eigen::VectorXd trial;
    double trial_f = f;
    bool accepted = false;
    for (int b = 0; b < options.max_backtracks; ++b) {
      trial = result.x + step * dir;
      trial_f = objective(trial, trial_grad);
      if (std::isfinite(trial_f) && trial_f <= f + options.sufficient_decrease * step * slope) {
        accepted = true;
        break;
      }
      step *= options.shrink;
    }
    if (!accepted) {
      // One steepest-descent restart before giving up.
      if (restarted || history.empty()) break;
      history.clear();
      restarted = true;
      continue;
    }
    restarted = false;

    Correction c{trial - result.x, trial_grad - grad, 0.0};
    const double sy = c.s.dot(c.y);
    if (sy > 1e-12 * c.s.norm() * c.y.norm() && sy > 0.0) {
      c.rho = 1.0 / sy;
      history.push_back(std::move(c));
      if (static_cast<int>(history.size()) > options.history_size) history.pop_front();
    }
    result.x = std::move(trial);
    f = trial_f;
    grad = trial_grad;
  }

  result.value = f;
  result.gradient_norm = grad.norm();
  result.iterations = it;
  result.converged = result.gradient_norm <= options.gradient_tolerance;
  return result;
}

}  // namespace selfnorm
