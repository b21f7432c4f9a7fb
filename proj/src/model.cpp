#include "selfnorm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "selfnorm/errors.hpp"
#include "selfnorm/log_sum_exp.hpp"

namespace selfnorm {

namespace {

void require_labels(const FeatureMap& fm, const LabelSpace& ls) {
  if (fm.num_labels() != ls.size())
    throw ConfigError("feature map has " + std::to_string(fm.num_labels()) +
                      " labels but label space has " + std::to_string(ls.size()));
}

void require_finite_scores(const Eigen::VectorXd& s, Eigen::Index input) {
  for (Eigen::Index y = 0; y < s.size(); ++y) {
    if (!std::isfinite(s(y))) {
      std::string msg = "non-finite score for label " + std::to_string(y);
      if (input >= 0) msg += " at input " + std::to_string(input);
      throw NumericError(msg);
    }
  }
}

Eigen::VectorXd weighted_scores(const Eigen::VectorXd& x, const ParamVector& eta,
                                const FeatureMap& fm, const LabelSpace& ls) {
  require_labels(fm, ls);
#ifndef NDEBUG
  fm.check_radius(x);
#endif
  Eigen::VectorXd s = fm.scores(x, eta);
  require_finite_scores(s, -1);
  if (!ls.is_counting()) s += ls.log_base_weights();
  return s;
}

}  // namespace

double log_partition(const Eigen::VectorXd& x, const ParamVector& eta, const FeatureMap& fm,
                     const LabelSpace& ls) {
  return log_sum_exp(weighted_scores(x, eta, fm, ls));
}

Eigen::VectorXd log_probs(const Eigen::VectorXd& x, const ParamVector& eta, const FeatureMap& fm,
                          const LabelSpace& ls) {
  const Eigen::VectorXd s = weighted_scores(x, eta, fm, ls);
  return (s.array() - log_sum_exp(s)).matrix();
}

double log_prob(const Eigen::VectorXd& x, Eigen::Index y, const ParamVector& eta,
                const FeatureMap& fm, const LabelSpace& ls) {
  if (y < 0 || y >= ls.size())
    throw ArgumentError("label " + std::to_string(y) + " outside [0, " + std::to_string(ls.size()) + ")");
  return log_probs(x, eta, fm, ls)(y);
}

BatchEvaluation evaluate(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                         const LabelSpace& ls) {
  if (ds.num_labels() != ls.size())
    throw ConfigError("dataset has " + std::to_string(ds.num_labels()) +
                      " labels but label space has " + std::to_string(ls.size()));
  return evaluate(ds.inputs(), eta, fm, ls);
}

BatchEvaluation evaluate(const InputMatrix& inputs, const ParamVector& eta, const FeatureMap& fm,
                         const LabelSpace& ls) {
  require_labels(fm, ls);
  BatchEvaluation ev;
  ev.scores = fm.batch_scores(inputs, eta);
  if (!ls.is_counting()) ev.scores.rowwise() += ls.log_base_weights().transpose();
  if (!ev.scores.allFinite()) {
    for (Eigen::Index i = 0; i < ev.scores.rows(); ++i)
      if (!ev.scores.row(i).allFinite()) require_finite_scores(ev.scores.row(i).transpose(), i);
  }
  // Column-wise passes over the column-major score matrix vectorize; a
  // per-row loop strides across memory.
  const Eigen::VectorXd top = ev.scores.rowwise().maxCoeff();
  ev.probs = (ev.scores.colwise() - top).array().exp().matrix();
  const Eigen::VectorXd total = ev.probs.rowwise().sum();
  ev.log_partition = top.array() + total.array().log();
  ev.probs.array().colwise() /= total.array();
  return ev;
}

double log_likelihood(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                      const LabelSpace& ls) {
  const BatchEvaluation ev = evaluate(ds, eta, fm, ls);
  double total = 0.0;
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    total += ev.scores(i, ds.labels()(i)) - ev.log_partition(i);
  return total;
}

ParamVector grad_log_likelihood(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                                const LabelSpace& ls) {
  const BatchEvaluation ev = evaluate(ds, eta, fm, ls);
  Eigen::MatrixXd weights = -ev.probs;
  for (Eigen::Index i = 0; i < ds.size(); ++i) weights(i, ds.labels()(i)) += 1.0;
  return fm.batch_pullback(ds.inputs(), weights);
}

NormalizerStats normalizer_stats(const Eigen::VectorXd& log_partitions, double center) {
  if (!std::isfinite(center)) throw ArgumentError("normalizer center must be finite");
  const double mean = log_partitions.mean();
  NormalizerStats s;
  s.mean_A = mean;
  s.V = (log_partitions.array() - center).square().mean();
  s.var = (log_partitions.array() - mean).square().mean();
  return s;
}

NormalizerStats normalizer_stats(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                                 const LabelSpace& ls, double center) {
  return normalizer_stats(evaluate(ds, eta, fm, ls).log_partition, center);
}

double kl_to_uniform(const Eigen::MatrixXd& probs, const LabelSpace& ls) {
  const double log_mu = ls.log_total_measure();
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index y = 0; y < probs.cols(); ++y) {
      const double p = probs(i, y);
      if (p > 0.0) row += p * (std::log(p) + log_mu);
    }
    total += row;
  }
  return std::max(0.0, total / static_cast<double>(probs.rows()));
}

double kl_to_uniform(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                     const LabelSpace& ls) {
  return kl_to_uniform(evaluate(ds, eta, fm, ls).probs, ls);
}

MarginReport margin_of_scores(const Eigen::MatrixXd& scores, double tie_tolerance) {
  if (scores.cols() < 2) throw ArgumentError("margin needs at least two labels");
  MarginReport report;
  report.margin = std::numeric_limits<double>::infinity();
  report.argmax.resize(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.cols(); ++k)
      if (scores(i, k) > scores(i, best)) best = k;
    double second = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < scores.cols(); ++k)
      if (k != best) second = std::max(second, scores(i, k));
    const double gap = scores(i, best) - second;
    report.argmax[static_cast<std::size_t>(i)] = best;
    if (gap <= tie_tolerance * (1.0 + std::abs(scores(i, best)))) {
      report.tied_inputs.push_back(i);
      report.margin = 0.0;
    } else {
      report.margin = std::min(report.margin, gap);
    }
  }
  return report;
}

MarginReport margin(const Eigen::MatrixXd& inputs, const ParamVector& eta, const FeatureMap& fm,
                    double tie_tolerance) {
  Eigen::MatrixXd scores(inputs.rows(), fm.num_labels());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    scores.row(i) = fm.scores(inputs.row(i).transpose(), eta).transpose();
  return margin_of_scores(scores, tie_tolerance);
}

}  // namespace selfnorm
