#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace oracle {

// Weighted variance of f - X beta, minimized over beta on the lattice
// {lo, lo + step, ..., hi}^3. Each lattice point is evaluated exactly through
// the expanded quadratic Var(f) - 2 beta.c + beta' S beta, with the moments
// accumulated directly from the points.
inline double grid_min_variance3(const Eigen::VectorXd& f, const Eigen::MatrixXd& x, const Eigen::VectorXd& w,
                                 double lo = -3.0, double hi = 3.0, double step = 0.01) {
  double mf = 0.0;
  Eigen::Vector3d mx = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    mf += w(i) * f(i);
    for (int j = 0; j < 3; ++j) mx(j) += w(i) * x(i, j);
  }
  double vf = 0.0;
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double df = f(i) - mf;
    vf += w(i) * df * df;
    for (int j = 0; j < 3; ++j) {
      const double dj = x(i, j) - mx(j);
      c(j) += w(i) * dj * df;
      for (int k = 0; k < 3; ++k) s(j, k) += w(i) * dj * (x(i, k) - mx(k));
    }
  }
  const int count = static_cast<int>(std::lround((hi - lo) / step)) + 1;
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < count; ++a) {
    const double b0 = lo + step * a;
    for (int b = 0; b < count; ++b) {
      const double b1 = lo + step * b;
      const double base = vf - 2.0 * (b0 * c(0) + b1 * c(1)) + b0 * b0 * s(0, 0) + 2.0 * b0 * b1 * s(0, 1) +
                          b1 * b1 * s(1, 1);
      const double lin = -2.0 * c(2) + 2.0 * (b0 * s(0, 2) + b1 * s(1, 2));
      for (int e = 0; e < count; ++e) {
        const double b2 = lo + step * e;
        best = std::min(best, base + b2 * (lin + b2 * s(2, 2)));
      }
    }
  }
  return best;
}

// Weighted variance of f - X beta at a given beta, summed point by point.
inline double residual_variance(const Eigen::VectorXd& f, const Eigen::MatrixXd& x, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& beta) {
  const Eigen::VectorXd r = f - x * beta;
  const double mean = w.dot(r);
  return w.dot((r.array() - mean).square().matrix());
}

// log sum_k exp(eta_k . x) over the class blocks, one term at a time.
template <typename Params>
double log_partition_cc(const Params& eta, const Eigen::VectorXd& x) {
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < eta.num_blocks(); ++k) top = std::max(top, eta.block(k).dot(x));
  double sum = 0.0;
  for (Eigen::Index k = 0; k < eta.num_blocks(); ++k) sum += std::exp(eta.block(k).dot(x) - top);
  return top + std::log(sum);
}

}  // namespace oracle
