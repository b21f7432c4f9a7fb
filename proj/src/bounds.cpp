#include "selfnorm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "selfnorm/errors.hpp"
#include "selfnorm/log_sum_exp.hpp"
#include "selfnorm/model.hpp"
#include "selfnorm/rng.hpp"

namespace selfnorm {

double lgap_upper_bound(double delta, double R, double eta_hat_norm, double expected_kl) {
  if (delta < 0.0 || expected_kl < 0.0) throw ArgumentError("delta and expected KL must be >= 0");
  if (!(R > 0.0) || !(eta_hat_norm > 0.0)) throw ArgumentError("R and ||eta_hat|| must be positive");
  const double factor = std::clamp(1.0 - delta / (R * eta_hat_norm), 0.0, 1.0);
  return factor * expected_kl;
}

double strong_lgap_bound(double eta_norm, double delta, double R, double b, double c) {
  if (!(b > 0.0) || !(c > 0.0)) throw ArgumentError("b and c must be positive");
  if (!(R > 0.0) || eta_norm < 0.0 || delta < 0.0)
    throw ArgumentError("need R > 0, ||eta|| >= 0 and delta >= 0");
  const double excess = eta_norm - delta / R;
  if (excess <= 0.0) return 0.0;
  return b * excess * excess * std::exp(-c * delta / R);
}

double shrinkage_deviation(const ParamVector& eta, const FeatureMap& fm, const LabelSpace& ls,
                           const Eigen::MatrixXd& inputs) {
  if (inputs.rows() < 1) throw ArgumentError("input set is empty");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const double a = log_partition(inputs.row(i).transpose(), eta, fm, ls);
    worst = std::max(worst, std::abs(a - ls.log_total_measure()));
  }
  return worst;
}

double closeness(const Dataset& ds, const Eigen::MatrixXd& candidates, const FeatureMap& fm) {
  if (candidates.rows() < 1) throw ArgumentError("candidate set is empty");
  std::vector<Eigen::MatrixXd> candidate_features;
  candidate_features.reserve(static_cast<std::size_t>(candidates.rows()));
  for (Eigen::Index s = 0; s < candidates.rows(); ++s)
    candidate_features.push_back(fm.features(candidates.row(s).transpose()));

  double total = 0.0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const Eigen::MatrixXd f = fm.features(ds.input(i));
    double nearest = std::numeric_limits<double>::infinity();
    for (const Eigen::MatrixXd& g : candidate_features)
      nearest = std::min(nearest, (f - g).rowwise().norm().maxCoeff());
    total += nearest;
  }
  return total / static_cast<double>(ds.size());
}

NormalizabilityBound closeness_normalizability_bound(double D, double B) {
  if (D < 0.0 || B < 0.0) throw ArgumentError("D and B must be >= 0");
  return {B * D,
          "B bounds the parameter norm ||eta||, not the input norm; level set taken at A = 0"};
}

double covariance_eigen_bound(int q, int k, double c, double eta_norm, CovarianceBoundKind kind) {
  if (q < 1 || k < 2 || !(c > 0.0)) throw ArgumentError("need q >= 1, k >= 2 and c > 0");
  if (eta_norm < 0.0) throw ArgumentError("||eta|| must be >= 0");
  const double decay = (k - 1) * std::exp(-c * eta_norm);
  return kind == CovarianceBoundKind::Eigenvalue ? q * decay : 2.0 * decay;
}

Eigen::Index covariance_row_support(const Eigen::VectorXd& x, const FeatureMap& fm) {
  const Eigen::MatrixXd f = fm.features(x);
  return (f.array() != 0.0).colwise().any().count();
}

namespace {

Eigen::VectorXd conditional(const Eigen::VectorXd& x, const ParamVector& eta,
                            const FeatureMap& fm, const LabelSpace& ls) {
  const Eigen::VectorXd s = fm.scores(x, eta) + ls.log_base_weights();
  return softmax(s);
}

}  // namespace

Eigen::MatrixXd feature_covariance(const Eigen::VectorXd& x, const ParamVector& eta,
                                   const FeatureMap& fm, const LabelSpace& ls) {
  const Eigen::MatrixXd f = fm.features(x);
  const Eigen::VectorXd p = conditional(x, eta, fm, ls);
  const Eigen::VectorXd mean = f.transpose() * p;
  return f.transpose() * p.asDiagonal() * f - mean * mean.transpose();
}

double feature_covariance_max_eig(const Eigen::VectorXd& x, const ParamVector& eta,
                                  const FeatureMap& fm, const LabelSpace& ls, EigenMethod method) {
  const Eigen::Index dim = fm.param_dim();
  if (method == EigenMethod::Auto)
    method = dim <= kDenseEigenLimit ? EigenMethod::Dense : EigenMethod::PowerIteration;
  if (method == EigenMethod::Dense) {
    if (dim > kDenseEigenLimit)
      throw CapabilityError("dense covariance assembly limited to D <= " +
                            std::to_string(kDenseEigenLimit) + ", got D = " + std::to_string(dim));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        feature_covariance(x, eta, fm, ls), Eigen::EigenvaluesOnly);
    return std::max(0.0, solver.eigenvalues().maxCoeff());
  }

  // The covariance is PSD, so power iteration converges to its top eigenvalue.
  // Products go through F^T (diag p - p p^T) F without forming the D x D matrix.
  const Eigen::MatrixXd f = fm.features(x);
  const Eigen::VectorXd p = conditional(x, eta, fm, ls);
  auto apply = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd fv = f * v;
    const Eigen::VectorXd inner = p.cwiseProduct(fv) - p * p.dot(fv);
    return Eigen::VectorXd(f.transpose() * inner);
  };
  // A fixed generic start: structured vectors such as all-ones can lie in the
  // null space (the shared-shift directions of class conjunctions).
  const CounterRng rng(0x5eed);
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.normal(kStreamTests, static_cast<std::uint64_t>(i));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = apply(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-8 * std::max(1.0, std::abs(next))) return std::max(0.0, next);
    lambda = next;
  }
  return std::max(0.0, lambda);
}

}  // namespace selfnorm
