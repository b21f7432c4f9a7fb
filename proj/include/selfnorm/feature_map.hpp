#pragma once

#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "selfnorm/dataset.hpp"
#include "selfnorm/param_vector.hpp"

namespace selfnorm {

/// T(k, x)_{k'j} = [k == k'] x_j: one weight block per class.
struct ClassConjunction {
  Eigen::Index dim;
  Eigen::Index classes;
};

/// Explicit feature table for a small finite input set. `features[i]` is the
/// K x D matrix whose row y is T(inputs[i], y).
struct Tabulated {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::MatrixXd> features;
};

/// A fixed transform t(x) repeated once per class: eta^T T(x, y) = eta_y^T t(x).
struct SharedRepeated {
  Eigen::Index input_dim;
  Eigen::Index feature_dim;
  Eigen::Index classes;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> transform;
};

/// The sufficient-statistic map T(x, y) together with its declared norm
/// bound R >= sup ||T(x, y)||_2.
class FeatureMap {
 public:
  using Variant = std::variant<ClassConjunction, Tabulated, SharedRepeated>;

  static FeatureMap class_conjunction(Eigen::Index dim, Eigen::Index classes, double radius);
  static FeatureMap tabulated(std::vector<Eigen::VectorXd> inputs,
                              std::vector<Eigen::MatrixXd> features, double radius);
  static FeatureMap shared_repeated(Eigen::Index input_dim, Eigen::Index feature_dim,
                                    Eigen::Index classes,
                                    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> transform,
                                    double radius);

  const Variant& kind() const { return kind_; }
  bool is_class_conjunction() const { return std::holds_alternative<ClassConjunction>(kind_); }

  Eigen::Index num_labels() const;
  Eigen::Index input_dim() const;
  Eigen::Index param_dim() const { return num_blocks() * block_dim(); }
  Eigen::Index num_blocks() const;
  Eigen::Index block_dim() const;
  double radius() const { return radius_; }

  ParamVector zero_params() const { return ParamVector(num_blocks(), block_dim()); }

  /// K x D matrix with row y equal to T(x, y).
  Eigen::MatrixXd features(const Eigen::VectorXd& x) const;

  /// eta^T T(x, y) for every label y.
  Eigen::VectorXd scores(const Eigen::VectorXd& x, const ParamVector& eta) const;

  /// n x K score matrix over the rows of `inputs`.
  Eigen::MatrixXd batch_scores(const InputMatrix& inputs, const ParamVector& eta) const;

  /// sum_i T(x_i, .)^T g_i for an n x K weight matrix G: the chain rule
  /// through the scores.
  ParamVector batch_pullback(const InputMatrix& inputs, const Eigen::MatrixXd& weights) const;

  /// max_y ||T(x, y)||_2.
  double max_feature_norm(const Eigen::VectorXd& x) const;

  /// Throws ConfigError when some ||T(x, y)|| exceeds the declared R.
  void check_radius(const Eigen::VectorXd& x) const;

  void check_params(const ParamVector& eta) const;
  void check_input(const Eigen::VectorXd& x) const;

 private:
  FeatureMap(Variant kind, double radius);

  Variant kind_;
  double radius_;
};

}  // namespace selfnorm
