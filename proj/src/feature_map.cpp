#include "selfnorm/feature_map.hpp"

#include <cmath>
#include <string>

#include "selfnorm/errors.hpp"

namespace selfnorm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Eigen::VectorXd dense_row(const InputMatrix& inputs, Eigen::Index i) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(inputs.cols());
  for (InputMatrix::InnerIterator it(inputs, i); it; ++it) x(it.col()) = it.value();
  return x;
}

const Eigen::MatrixXd& lookup(const Tabulated& t, const Eigen::VectorXd& x) {
  for (std::size_t i = 0; i < t.inputs.size(); ++i)
    if (t.inputs[i].size() == x.size() && t.inputs[i] == x) return t.features[i];
  throw ConfigError("input is not in the tabulated feature map");
}

}  // namespace

FeatureMap::FeatureMap(Variant kind, double radius) : kind_(std::move(kind)), radius_(radius) {
  if (!(radius_ > 0.0) || !std::isfinite(radius_))
    throw ConfigError("feature radius R must be positive and finite");
}

FeatureMap FeatureMap::class_conjunction(Eigen::Index dim, Eigen::Index classes, double radius) {
  if (dim < 1 || classes < 1) throw ConfigError("class conjunction needs d >= 1 and K >= 1");
  return FeatureMap(ClassConjunction{dim, classes}, radius);
}

FeatureMap FeatureMap::tabulated(std::vector<Eigen::VectorXd> inputs,
                                 std::vector<Eigen::MatrixXd> features, double radius) {
  if (inputs.empty() || inputs.size() != features.size())
    throw ConfigError("tabulated feature map needs one feature table per input");
  const auto rows = features.front().rows();
  const auto cols = features.front().cols();
  const auto in_dim = inputs.front().size();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (features[i].rows() != rows || features[i].cols() != cols || inputs[i].size() != in_dim)
      throw ConfigError("tabulated feature map has inconsistent shapes");
  }
  return FeatureMap(Tabulated{std::move(inputs), std::move(features)}, radius);
}

FeatureMap FeatureMap::shared_repeated(
    Eigen::Index input_dim, Eigen::Index feature_dim, Eigen::Index classes,
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> transform, double radius) {
  if (input_dim < 1 || feature_dim < 1 || classes < 1 || !transform)
    throw ConfigError("shared-repeated feature map is incomplete");
  return FeatureMap(SharedRepeated{input_dim, feature_dim, classes, std::move(transform)}, radius);
}

Eigen::Index FeatureMap::num_labels() const {
  return std::visit(overloaded{[](const ClassConjunction& c) { return c.classes; },
                               [](const Tabulated& t) { return t.features.front().rows(); },
                               [](const SharedRepeated& s) { return s.classes; }},
                    kind_);
}

Eigen::Index FeatureMap::input_dim() const {
  return std::visit(overloaded{[](const ClassConjunction& c) { return c.dim; },
                               [](const Tabulated& t) { return t.inputs.front().size(); },
                               [](const SharedRepeated& s) { return s.input_dim; }},
                    kind_);
}

Eigen::Index FeatureMap::num_blocks() const {
  return std::visit(overloaded{[](const ClassConjunction& c) { return c.classes; },
                               [](const Tabulated&) { return Eigen::Index{1}; },
                               [](const SharedRepeated& s) { return s.classes; }},
                    kind_);
}

Eigen::Index FeatureMap::block_dim() const {
  return std::visit(overloaded{[](const ClassConjunction& c) { return c.dim; },
                               [](const Tabulated& t) { return t.features.front().cols(); },
                               [](const SharedRepeated& s) { return s.feature_dim; }},
                    kind_);
}

void FeatureMap::check_params(const ParamVector& eta) const {
  if (eta.num_blocks() != num_blocks() || eta.block_dim() != block_dim())
    throw ConfigError("parameter layout (" + std::to_string(eta.num_blocks()) + " x " +
                      std::to_string(eta.block_dim()) + ") does not match feature map (" +
                      std::to_string(num_blocks()) + " x " + std::to_string(block_dim()) + ")");
}

void FeatureMap::check_input(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim())
    throw ConfigError("input has dimension " + std::to_string(x.size()) + ", feature map expects " +
                      std::to_string(input_dim()));
}

Eigen::MatrixXd FeatureMap::features(const Eigen::VectorXd& x) const {
  check_input(x);
  return std::visit(
      overloaded{[&](const ClassConjunction& c) -> Eigen::MatrixXd {
                   Eigen::MatrixXd f = Eigen::MatrixXd::Zero(c.classes, c.classes * c.dim);
                   for (Eigen::Index k = 0; k < c.classes; ++k)
                     f.row(k).segment(k * c.dim, c.dim) = x.transpose();
                   return f;
                 },
                 [&](const Tabulated& t) -> Eigen::MatrixXd { return lookup(t, x); },
                 [&](const SharedRepeated& s) -> Eigen::MatrixXd {
                   const Eigen::VectorXd tx = s.transform(x);
                   if (tx.size() != s.feature_dim) throw ConfigError("transform output has wrong size");
                   Eigen::MatrixXd f = Eigen::MatrixXd::Zero(s.classes, s.classes * s.feature_dim);
                   for (Eigen::Index k = 0; k < s.classes; ++k)
                     f.row(k).segment(k * s.feature_dim, s.feature_dim) = tx.transpose();
                   return f;
                 }},
      kind_);
}

Eigen::VectorXd FeatureMap::scores(const Eigen::VectorXd& x, const ParamVector& eta) const {
  check_input(x);
  check_params(eta);
  return std::visit(
      overloaded{[&](const ClassConjunction&) -> Eigen::VectorXd {
                   return eta.blocks().transpose() * x;
                 },
                 [&](const Tabulated& t) -> Eigen::VectorXd { return lookup(t, x) * eta.values(); },
                 [&](const SharedRepeated& s) -> Eigen::VectorXd {
                   return eta.blocks().transpose() * s.transform(x);
                 }},
      kind_);
}

Eigen::MatrixXd FeatureMap::batch_scores(const InputMatrix& inputs, const ParamVector& eta) const {
  check_params(eta);
  if (inputs.cols() != input_dim())
    throw ConfigError("inputs have dimension " + std::to_string(inputs.cols()) +
                      ", feature map expects " + std::to_string(input_dim()));
  if (is_class_conjunction()) return inputs * eta.blocks();
  Eigen::MatrixXd out(inputs.rows(), num_labels());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    out.row(i) = scores(dense_row(inputs, i), eta).transpose();
  return out;
}

ParamVector FeatureMap::batch_pullback(const InputMatrix& inputs,
                                       const Eigen::MatrixXd& weights) const {
  if (weights.rows() != inputs.rows() || weights.cols() != num_labels())
    throw ConfigError("pullback weights must be n x K");
  if (is_class_conjunction()) {
    const Eigen::MatrixXd g = inputs.transpose() * weights;  // d x K
    return ParamVector::from_blocks(g);
  }
  ParamVector out = zero_params();
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    out.values() += features(dense_row(inputs, i)).transpose() * weights.row(i).transpose();
  return out;
}

double FeatureMap::max_feature_norm(const Eigen::VectorXd& x) const {
  if (is_class_conjunction()) {
    check_input(x);
    return x.norm();
  }
  return features(x).rowwise().norm().maxCoeff();
}

void FeatureMap::check_radius(const Eigen::VectorXd& x) const {
  const double r = max_feature_norm(x);
  if (r > radius_ * (1.0 + 1e-12))
    throw ConfigError("feature norm " + std::to_string(r) + " exceeds declared R = " +
                      std::to_string(radius_));
}

}  // namespace selfnorm
