#include "selfnorm/variance_analysis.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "selfnorm/errors.hpp"
#include "selfnorm/log_sum_exp.hpp"
#include "selfnorm/model.hpp"
#include "selfnorm/rng.hpp"

namespace selfnorm {

void InputDistribution::validate() const {
  if (points.rows() < 1) throw ArgumentError("input distribution is empty");
  if (weights.size() != points.rows()) throw ArgumentError("one weight per input point is required");
  if ((weights.array() < 0.0).any()) throw ArgumentError("weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw ArgumentError("weights must sum to one");
}

HypercubeDist::HypercubeDist(int dim) : dim_(dim) {
  if (dim < 1) throw ArgumentError("hypercube dimension must be at least 1");
  if (dim > kMaxEnumerationDim)
    throw CapabilityError("hypercube dimension " + std::to_string(dim) +
                          " exceeds the enumeration cap of " + std::to_string(kMaxEnumerationDim) +
                          "; use sampled_hypercube instead");
}

Eigen::VectorXd HypercubeDist::point(std::int64_t index) const {
  Eigen::VectorXd x(dim_);
  for (int j = 0; j < dim_; ++j) x(j) = static_cast<double>((index >> (dim_ - 1 - j)) & 1);
  return x;
}

InputDistribution HypercubeDist::distribution() const {
  InputDistribution dist;
  dist.points.resize(size(), dim_);
  for (std::int64_t i = 0; i < size(); ++i) dist.points.row(i) = point(i).transpose();
  // 2^-d is exact in binary floating point, so the weights sum to exactly 1.
  dist.weights = Eigen::VectorXd::Constant(size(), std::ldexp(1.0, -dim_));
  return dist;
}

InputDistribution sampled_hypercube(int dim, Eigen::Index samples, std::uint64_t seed) {
  if (dim < 1 || samples < 1) throw ArgumentError("sampled hypercube needs d >= 1 and samples >= 1");
  const CounterRng rng(seed);
  InputDistribution dist;
  dist.points.resize(samples, dim);
  for (Eigen::Index i = 0; i < samples; ++i)
    for (int j = 0; j < dim; ++j)
      dist.points(i, j) = static_cast<double>(
          rng.bits(kStreamHypercube, static_cast<std::uint64_t>(i) * dim + j) >> 63);
  dist.weights = Eigen::VectorXd::Constant(samples, 1.0 / static_cast<double>(samples));
  return dist;
}

ParamVector equivalence_shift(const ParamVector& eta, const Eigen::VectorXd& beta) {
  if (beta.size() != eta.block_dim())
    throw ConfigError("shift has dimension " + std::to_string(beta.size()) + ", blocks have " +
                      std::to_string(eta.block_dim()));
  ParamVector out = eta;
  out.blocks().colwise() += beta;
  return out;
}

ProjectionResult project_out_linear(const Eigen::VectorXd& values, const InputDistribution& dist,
                                    bool keep_fitted) {
  dist.validate();
  if (values.size() != dist.size()) throw ConfigError("one value per input point is required");
  const Eigen::VectorXd& w = dist.weights;
  const double mean_value = w.dot(values);
  const Eigen::RowVectorXd mean_x = w.transpose() * dist.points;
  const Eigen::MatrixXd centered_x = dist.points.rowwise() - mean_x;
  const Eigen::VectorXd centered_v = values.array() - mean_value;

  const Eigen::MatrixXd gram = centered_x.transpose() * w.asDiagonal() * centered_x;
  const Eigen::VectorXd rhs = centered_x.transpose() * w.asDiagonal() * centered_v;

  ProjectionResult result;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const double scale = std::max(gram.diagonal().maxCoeff(), 1e-300);
  const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                        ldlt.vectorD().minCoeff() <= 1e-12 * scale;
  if (!singular) {
    result.beta = ldlt.solve(rhs);
  } else {
    // Minimum-norm least squares on the weighted design.
    const Eigen::VectorXd sw = w.array().sqrt();
    const Eigen::MatrixXd design = sw.asDiagonal() * centered_x;
    result.beta = design.completeOrthogonalDecomposition().solve(
        (sw.array() * centered_v.array()).matrix());
    result.rank_deficient = true;
  }
  const Eigen::VectorXd fitted = centered_x * result.beta;
  const Eigen::ArrayXd residual = centered_v - fitted;
  result.residual_variance = std::max(0.0, (w.array() * residual.square()).sum());
  if (keep_fitted) result.fitted_values = fitted;
  return result;
}

Eigen::VectorXd log_partitions(const ParamVector& eta, const InputDistribution& dist) {
  if (eta.block_dim() != dist.dim())
    throw ConfigError("parameter blocks have dimension " + std::to_string(eta.block_dim()) +
                      ", inputs have " + std::to_string(dist.dim()));
  const Eigen::MatrixXd scores = dist.points * eta.blocks();
  return row_log_sum_exp(scores);
}

double e_infinity(const Eigen::VectorXd& x, const ParamVector& eta) {
  if (x.size() != eta.block_dim()) throw ConfigError("input and parameter blocks differ in dimension");
  return (eta.blocks().transpose() * x).maxCoeff();
}

Eigen::VectorXd e_infinity_values(const ParamVector& eta, const InputDistribution& dist) {
  if (eta.block_dim() != dist.dim()) throw ConfigError("input and parameter blocks differ in dimension");
  return (dist.points * eta.blocks()).rowwise().maxCoeff();
}

ProjectionResult optimal_variance(const ParamVector& eta, const InputDistribution& dist,
                                  bool keep_fitted) {
  return project_out_linear(log_partitions(eta, dist), dist, keep_fitted);
}

ProjectionResult optimal_variance(const ParamVector& eta, const HypercubeDist& cube,
                                  bool keep_fitted) {
  return optimal_variance(eta, cube.distribution(), keep_fitted);
}

ProjectionResult optimal_einf_variance(const ParamVector& eta, const InputDistribution& dist) {
  return project_out_linear(e_infinity_values(eta, dist), dist);
}

ProjectionResult optimal_einf_variance(const ParamVector& eta, const HypercubeDist& cube) {
  return optimal_einf_variance(eta, cube.distribution());
}

ParamVector hard_construction(int dim, int classes) {
  if (dim < 2) throw ArgumentError("hard construction needs d >= 2");
  if (classes < 2) throw ArgumentError("hard construction needs K >= 2");
  const double d = dim;
  const double a = std::sqrt(1.0 - 1.0 / d);
  ParamVector eta(classes, dim);
  eta(0, 0) = -a;
  for (int j = 1; j < dim; ++j) eta(0, j) = a / (d - 1.0);
  for (int j = 0; j < dim; ++j) eta(1, j) = a / (d * (d - 1.0));
  if (eta.values().squaredNorm() > 2.0) throw NumericError("hard construction exceeds ||eta||^2 <= 2");
  return eta;
}

double hard_margin(int dim) {
  if (dim < 2) throw ArgumentError("hard margin needs d >= 2");
  const double d = dim;
  return std::sqrt(1.0 - 1.0 / d) / (2.0 * (d - 1.0));
}

double variance_lower_bound_thm(double alpha, int dim, int classes, ThmForm form) {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  const double d = dim;
  const double norm = alpha * hard_construction(dim, classes).norm();
  const double denom = (form == ThmForm::Statement ? 32.0 : 64.0) * d * (d - 1.0);
  return norm * norm / denom - 4.0 * classes * std::exp(-hard_margin(dim) * norm) * norm;
}

CorollaryBound corollary_bound(double v_e_star, double alpha, int classes, double delta_margin) {
  if (!(delta_margin > 0.0)) throw ArgumentError("margin must be positive");
  if (classes < 1) throw ArgumentError("need at least one class");
  const double value = v_e_star * alpha * alpha -
                       2.0 * classes * std::exp(-delta_margin * alpha) * (1.0 + v_e_star) * alpha;
  return {value, alpha > std::log(2.0 * classes) / delta_margin};
}

DeviationReport a_einf_deviation(const ParamVector& eta, double alpha,
                                 const InputDistribution& dist) {
  dist.validate();
  if (eta.block_dim() != dist.dim()) throw ConfigError("input and parameter blocks differ in dimension");
  const Eigen::Index classes = eta.num_blocks();
  DeviationReport report;
  const Eigen::MatrixXd base_scores = dist.points * eta.blocks();

  std::vector<Eigen::Index> kept;
  if (classes >= 2) {
    const MarginReport m = margin_of_scores(base_scores);
    report.excluded = m.tied_inputs;
    std::size_t next = 0;
    for (Eigen::Index i = 0; i < dist.size(); ++i) {
      if (next < m.tied_inputs.size() && m.tied_inputs[next] == i) {
        ++next;
        continue;
      }
      kept.push_back(i);
    }
    // Margin over the retained inputs only.
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i : kept) {
      Eigen::VectorXd row = base_scores.row(i).transpose();
      const Eigen::Index best = m.argmax[static_cast<std::size_t>(i)];
      const double top = row(best);
      row(best) = -std::numeric_limits<double>::infinity();
      gap = std::min(gap, top - row.maxCoeff());
    }
    report.margin = kept.empty() ? 0.0 : gap;
  } else {
    for (Eigen::Index i = 0; i < dist.size(); ++i) kept.push_back(i);
    report.margin = std::numeric_limits<double>::infinity();
  }
  if (kept.empty()) return report;

  double total_w = 0.0;
  for (Eigen::Index i : kept) total_w += dist.weights(i);
  Eigen::VectorXd a_vals(static_cast<Eigen::Index>(kept.size()));
  Eigen::VectorXd e_vals(static_cast<Eigen::Index>(kept.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const Eigen::VectorXd s = alpha * base_scores.row(kept[r]).transpose();
    const auto idx = static_cast<Eigen::Index>(r);
    a_vals(idx) = log_sum_exp(s);
    e_vals(idx) = s.maxCoeff();
    w(idx) = dist.weights(kept[r]) / total_w;
  }
  const double a_bar = w.dot(a_vals);
  const double e_bar = w.dot(e_vals);
  report.uncentered = (a_vals - e_vals).cwiseAbs().maxCoeff();
  report.centered = ((a_vals.array() - a_bar) - (e_vals.array() - e_bar)).abs().maxCoeff();
  const double k = static_cast<double>(classes);
  const double decay = std::isfinite(report.margin) ? std::exp(-report.margin * alpha) : 0.0;
  report.bound_uncentered = k * decay;
  report.bound_centered = 2.0 * k * decay;
  return report;
}

}  // namespace selfnorm
