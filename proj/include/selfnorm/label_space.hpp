#pragma once

#include <Eigen/Core>

namespace selfnorm {

/// A finite label set {0, ..., K-1} with per-label base weights h(y) mu({y}).
/// The default is the counting measure with h = 1, so mu(Y) = K.
class LabelSpace {
 public:
  explicit LabelSpace(Eigen::Index num_labels);
  explicit LabelSpace(Eigen::VectorXd base_weights);

  Eigen::Index size() const { return base_weights_.size(); }
  const Eigen::VectorXd& base_weights() const { return base_weights_; }
  const Eigen::VectorXd& log_base_weights() const { return log_base_weights_; }
  double log_total_measure() const { return log_total_measure_; }
  bool is_counting() const { return counting_; }

 private:
  Eigen::VectorXd base_weights_;
  Eigen::VectorXd log_base_weights_;
  double log_total_measure_ = 0.0;
  bool counting_ = true;
};

}  // namespace selfnorm
