#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace selfnorm {

// Max-shifted log(sum(exp(v))). Finite for any finite input, including
// scores of magnitude 1e6 and beyond.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.derived().array() - top).exp().sum());
}

// Unshifted reference form; overflows for large scores. Kept for stability
// comparisons in tests.
template <typename Derived>
typename Derived::Scalar log_sum_exp_naive(const Eigen::DenseBase<Derived>& v) {
  return std::log(v.derived().array().exp().sum());
}

// Row-wise log-sum-exp of a score matrix (one row per input).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> row_log_sum_exp(
    const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) out(i) = log_sum_exp(scores.row(i));
  return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& v) {
  const auto lse = log_sum_exp(v);
  return (v.derived().array() - lse).exp().matrix();
}

}  // namespace selfnorm
