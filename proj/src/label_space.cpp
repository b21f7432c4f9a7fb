#include "selfnorm/label_space.hpp"

#include <cmath>

#include "selfnorm/errors.hpp"

namespace selfnorm {

LabelSpace::LabelSpace(Eigen::Index num_labels) {
  if (num_labels < 1) throw ConfigError("label space needs at least one label");
  base_weights_ = Eigen::VectorXd::Ones(num_labels);
  log_base_weights_ = Eigen::VectorXd::Zero(num_labels);
  log_total_measure_ = std::log(static_cast<double>(num_labels));
  counting_ = true;
}

LabelSpace::LabelSpace(Eigen::VectorXd base_weights) : base_weights_(std::move(base_weights)) {
  if (base_weights_.size() < 1) throw ConfigError("label space needs at least one label");
  if (!base_weights_.allFinite() || (base_weights_.array() <= 0.0).any())
    throw ConfigError("base weights must be finite and strictly positive");
  log_base_weights_ = base_weights_.array().log().matrix();
  log_total_measure_ = std::log(base_weights_.sum());
  counting_ = (base_weights_.array() == 1.0).all();
}

}  // namespace selfnorm
