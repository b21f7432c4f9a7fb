#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selfnorm/dataset.hpp"
#include "selfnorm/feature_map.hpp"
#include "selfnorm/label_space.hpp"
#include "selfnorm/param_vector.hpp"

namespace selfnorm {

struct TrainConfig {
  int max_iterations = 2000;
  /// Bound on the l2 norm of the per-sample objective gradient.
  double gradient_tolerance = 1e-8;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int history_size = 10;
  /// Optional cap on ||eta||; fits beyond 10 B are flagged as diverged and
  /// the returned parameters are rescaled onto the ball.
  std::optional<double> B;
  /// Weight of ridge * ||eta||^2 added to the per-sample objective.
  double ridge = 0.0;
  /// Centre of the normalizer penalty and of V.
  double center = 0.0;
  /// Absolute slack on V <= delta^2.
  double constraint_tolerance = 1e-6;
  /// Penalty search runs on log10(alpha) within these limits.
  double log10_alpha_min = -8.0;
  double log10_alpha_max = 10.0;
  int max_bisection = 40;

  void validate() const;
};

struct FitResult {
  ParamVector eta;
  double log_likelihood = 0.0;  // total over the dataset
  double V = 0.0;               // (1/n) sum (A_i - center)^2
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  double gradient_norm = 0.0;
  std::optional<double> alpha_penalty;
  std::uint64_t dataset_hash = 0;
  std::string origin;  // "mle", "penalized", "shifted", "witness"
};

/// Summaries of `eta` on a dataset packaged as an (unoptimized) FitResult.
FitResult describe(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                   const ParamVector& eta, const TrainConfig& cfg, std::string origin);

/// Unconstrained maximum likelihood, started at eta = 0 unless `warm_start`.
FitResult fit_mle(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                  const TrainConfig& cfg, const ParamVector* warm_start = nullptr);

/// Maximizes sum_i log p(y_i|x_i) - alpha sum_i (A(x_i) - center)^2.
FitResult fit_penalized(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                        double alpha, const TrainConfig& cfg,
                        const ParamVector* warm_start = nullptr);

/// Highest-likelihood candidate found with V(eta) <= delta^2 (+ tolerance).
FitResult fit_constrained(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                          double delta, const TrainConfig& cfg);

/// alpha * eta_hat with alpha = min(1, delta / (R ||eta_hat||)).
ParamVector scaled_feasible_param(const ParamVector& eta_hat, double delta, double R);

/// The likelihood-equivalent parameter (a shared per-class shift) whose
/// log-partitions are closest to `center` in mean square on the dataset.
/// Only defined for class-conjunction features; other maps return `eta`.
ParamVector best_equivalent_shift(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                                  const ParamVector& eta, double center);

/// (1/n) (l(fit_a) - l(fit_b)).
double likelihood_gap(const FitResult& fit_a, const FitResult& fit_b, Eigen::Index n);

/// Reusable constrained solver for one dataset: remembers every fit it has
/// produced so a grid of deltas shares one penalty path, and a candidate
/// feasible at a small delta is reused for every larger delta.
class ConstrainedSolver {
 public:
  ConstrainedSolver(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                    TrainConfig cfg, std::optional<FitResult> mle = std::nullopt);

  const FitResult& mle() const { return mle_; }
  /// Extends the penalty path until it brackets delta, then returns the best
  /// feasible candidate found so far.
  FitResult solve(double delta);
  /// Best feasible candidate over everything generated so far; after solving
  /// a whole grid this is monotone in delta.
  FitResult best(double delta) const;
  std::size_t num_penalized_fits() const { return path_.size(); }

 private:
  bool feasible(const FitResult& f, double delta) const;
  const FitResult& penalized(double log10_alpha);
  void add_candidate(FitResult f);

  const Dataset& ds_;
  const FeatureMap& fm_;
  const LabelSpace& ls_;
  TrainConfig cfg_;
  FitResult mle_;
  std::map<double, FitResult> path_;
  std::vector<FitResult> candidates_;
};

}  // namespace selfnorm
