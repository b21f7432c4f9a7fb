#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "selfnorm/param_vector.hpp"

namespace selfnorm {

/// A finite input distribution: rows of `points` with probabilities `weights`.
struct InputDistribution {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  void validate() const;
};

/// The uniform distribution on {0,1}^d, enumerated lexicographically
/// (point i has bit j of i, most significant first, in coordinate j).
class HypercubeDist {
 public:
  static constexpr int kMaxEnumerationDim = 20;

  explicit HypercubeDist(int dim);

  int dim() const { return dim_; }
  std::int64_t size() const { return std::int64_t{1} << dim_; }
  Eigen::VectorXd point(std::int64_t index) const;
  InputDistribution distribution() const;

 private:
  int dim_;
};

/// `samples` i.i.d. uniform hypercube points with equal weights. For d above
/// the enumeration cap; not an exact expectation.
InputDistribution sampled_hypercube(int dim, Eigen::Index samples, std::uint64_t seed);

struct ProjectionResult {
  double residual_variance = 0.0;
  Eigen::VectorXd beta;  // optimal shared shift
  std::optional<Eigen::VectorXd> fitted_values;
  bool rank_deficient = false;
};

/// eta' with eta'_k = eta_k + beta for every class block k. Conditionals are
/// unchanged and A(x, eta') = A(x, eta) + beta^T x.
ParamVector equivalence_shift(const ParamVector& eta, const Eigen::VectorXd& beta);

/// min over beta of Var[f(X) - beta^T X]: the residual of the weighted
/// least-squares regression of centered f on the centered coordinates.
ProjectionResult project_out_linear(const Eigen::VectorXd& values, const InputDistribution& dist,
                                    bool keep_fitted = false);

/// Class-conjunction log-partition with the counting measure, per point.
Eigen::VectorXd log_partitions(const ParamVector& eta, const InputDistribution& dist);

/// max_k eta_k^T x.
double e_infinity(const Eigen::VectorXd& x, const ParamVector& eta);
Eigen::VectorXd e_infinity_values(const ParamVector& eta, const InputDistribution& dist);

/// V*(eta) = min over equivalent parameters of Var[A(X, eta')].
ProjectionResult optimal_variance(const ParamVector& eta, const InputDistribution& dist,
                                  bool keep_fitted = false);
ProjectionResult optimal_variance(const ParamVector& eta, const HypercubeDist& cube,
                                  bool keep_fitted = false);

/// V_E*(eta): the same projection applied to E_inf.
ProjectionResult optimal_einf_variance(const ParamVector& eta, const InputDistribution& dist);
ProjectionResult optimal_einf_variance(const ParamVector& eta, const HypercubeDist& cube);

/// The two-class parameter whose every equivalent parameterization has a
/// high-variance normalizer on the uniform hypercube:
///   eta_{1,1} = -a, eta_{1,j} = a/(d-1) (j >= 2), eta_{2,j} = a/(d(d-1)),
///   all other blocks zero, a = sqrt(1 - 1/d).
ParamVector hard_construction(int dim, int classes);

/// sqrt(1 - 1/d) / (2 (d - 1)).
double hard_margin(int dim);

enum class ThmForm {
  Statement,  // ||eta||^2 / (32 d (d-1)) - 4K exp(-margin ||eta||) ||eta||
  Proof,      // ||eta||^2 / (64 d (d-1)) - 4K exp(-margin ||eta||) ||eta||
};

/// Right-hand side of the normalizer-variance lower bound at
/// eta = alpha * hard_construction(d, K). May be negative.
double variance_lower_bound_thm(double alpha, int dim, int classes, ThmForm form = ThmForm::Proof);

struct CorollaryBound {
  double value;
  bool valid;  // alpha > log(2K) / margin
};

/// V_E* alpha^2 - 2K exp(-margin alpha) (1 + V_E*) alpha.
CorollaryBound corollary_bound(double v_e_star, double alpha, int classes, double delta_margin);

struct DeviationReport {
  double centered = 0.0;    // sup |A~(alpha eta, x) - E~_inf(alpha eta)(x)|
  double uncentered = 0.0;  // sup |A(alpha eta, x) - E_inf(alpha eta)(x)|
  double margin = 0.0;      // margin of eta over the retained inputs
  double bound_centered = 0.0;    // 2 K exp(-margin alpha)
  double bound_uncentered = 0.0;  // K exp(-margin alpha)
  std::vector<Eigen::Index> excluded;  // inputs without a unique argmax
};

/// Gap between the log-partition and its max-score surrogate at alpha * eta,
/// over the inputs where the unique-argmax premise holds.
DeviationReport a_einf_deviation(const ParamVector& eta, double alpha, const InputDistribution& dist);

}  // namespace selfnorm
