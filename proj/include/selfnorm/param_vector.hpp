#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "selfnorm/errors.hpp"

namespace selfnorm {

/// Natural parameters stored as `num_blocks` contiguous blocks of
/// `block_dim` entries. For class-conjunction features block k holds the
/// per-class weights eta_k, so entry (k, j) sits at k * block_dim + j and
/// `blocks()` views the storage as a block_dim x num_blocks matrix whose
/// columns are the class weight vectors.
template <typename Scalar>
class BasicParamVector {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BasicParamVector() = default;

  BasicParamVector(Eigen::Index num_blocks, Eigen::Index block_dim)
      : values_(Vector::Zero(num_blocks * block_dim)),
        num_blocks_(num_blocks),
        block_dim_(block_dim) {}

  BasicParamVector(Eigen::Index num_blocks, Eigen::Index block_dim, Vector values)
      : values_(std::move(values)), num_blocks_(num_blocks), block_dim_(block_dim) {
    if (values_.size() != num_blocks * block_dim)
      throw ConfigError("parameter vector has " + std::to_string(values_.size()) +
                        " entries, layout expects " +
                        std::to_string(num_blocks * block_dim));
  }

  /// Build from a block_dim x num_blocks matrix (column k = block k).
  static BasicParamVector from_blocks(const Matrix& blocks) {
    Vector v = Eigen::Map<const Vector>(blocks.data(), blocks.size());
    return BasicParamVector(blocks.cols(), blocks.rows(), std::move(v));
  }

  Eigen::Index num_blocks() const { return num_blocks_; }
  Eigen::Index block_dim() const { return block_dim_; }
  Eigen::Index size() const { return values_.size(); }

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  Eigen::Map<const Matrix> blocks() const {
    return Eigen::Map<const Matrix>(values_.data(), block_dim_, num_blocks_);
  }
  Eigen::Map<Matrix> blocks() { return Eigen::Map<Matrix>(values_.data(), block_dim_, num_blocks_); }

  auto block(Eigen::Index k) const { return values_.segment(k * block_dim_, block_dim_); }
  auto block(Eigen::Index k) { return values_.segment(k * block_dim_, block_dim_); }

  Scalar operator()(Eigen::Index k, Eigen::Index j) const { return values_(k * block_dim_ + j); }
  Scalar& operator()(Eigen::Index k, Eigen::Index j) { return values_(k * block_dim_ + j); }

  Scalar norm() const { return values_.norm(); }
  bool all_finite() const { return values_.allFinite(); }
  bool same_layout(const BasicParamVector& o) const {
    return num_blocks_ == o.num_blocks_ && block_dim_ == o.block_dim_;
  }

  BasicParamVector& operator*=(Scalar a) {
    values_ *= a;
    return *this;
  }
  friend BasicParamVector operator*(Scalar a, BasicParamVector p) { return p *= a; }
  friend BasicParamVector operator*(BasicParamVector p, Scalar a) { return p *= a; }

  friend BasicParamVector operator+(BasicParamVector a, const BasicParamVector& b) {
    a.require_layout(b);
    a.values_ += b.values_;
    return a;
  }
  friend BasicParamVector operator-(BasicParamVector a, const BasicParamVector& b) {
    a.require_layout(b);
    a.values_ -= b.values_;
    return a;
  }

 private:
  void require_layout(const BasicParamVector& o) const {
    if (!same_layout(o)) throw ConfigError("parameter vectors have different layouts");
  }

  Vector values_;
  Eigen::Index num_blocks_ = 0;
  Eigen::Index block_dim_ = 0;
};

using ParamVector = BasicParamVector<double>;

}  // namespace selfnorm
