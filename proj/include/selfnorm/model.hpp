#pragma once

#include <vector>

#include <Eigen/Core>

#include "selfnorm/dataset.hpp"
#include "selfnorm/feature_map.hpp"
#include "selfnorm/label_space.hpp"
#include "selfnorm/param_vector.hpp"

namespace selfnorm {

/// A(x, eta) = log sum_y h(y) mu({y}) exp(eta^T T(x, y)), max-shifted.
double log_partition(const Eigen::VectorXd& x, const ParamVector& eta, const FeatureMap& fm,
                     const LabelSpace& ls);

/// log p_eta(y | x) for every label.
Eigen::VectorXd log_probs(const Eigen::VectorXd& x, const ParamVector& eta, const FeatureMap& fm,
                          const LabelSpace& ls);

double log_prob(const Eigen::VectorXd& x, Eigen::Index y, const ParamVector& eta,
                const FeatureMap& fm, const LabelSpace& ls);

/// Scores, log-partitions and conditionals for every record of a dataset.
struct BatchEvaluation {
  Eigen::MatrixXd scores;         // n x K, including log base weights
  Eigen::VectorXd log_partition;  // n
  Eigen::MatrixXd probs;          // n x K
};

BatchEvaluation evaluate(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                         const LabelSpace& ls);
BatchEvaluation evaluate(const InputMatrix& inputs, const ParamVector& eta, const FeatureMap& fm,
                         const LabelSpace& ls);

/// sum_i log p_eta(y_i | x_i).
double log_likelihood(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                      const LabelSpace& ls);

/// sum_i [T(x_i, y_i) - E_{p_eta(.|x_i)} T(x_i, Y)].
ParamVector grad_log_likelihood(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                                const LabelSpace& ls);

struct NormalizerStats {
  double V;       // (1/n) sum (A_i - center)^2
  double var;     // variance of A
  double mean_A;  // mean of A
};

NormalizerStats normalizer_stats(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                                 const LabelSpace& ls, double center = 0.0);
NormalizerStats normalizer_stats(const Eigen::VectorXd& log_partitions, double center = 0.0);

/// (1/n) sum_i KL(p_eta(. | x_i) || Unif), evaluated exactly over the labels.
double kl_to_uniform(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm,
                     const LabelSpace& ls);
double kl_to_uniform(const Eigen::MatrixXd& probs, const LabelSpace& ls);

struct MarginReport {
  double margin = 0.0;                   // min over inputs of top - second score
  std::vector<Eigen::Index> argmax;      // per input, lowest index on ties
  std::vector<Eigen::Index> tied_inputs; // inputs without a unique argmax
};

/// Minimum top-versus-runner-up score gap over the rows of `inputs`.
MarginReport margin(const Eigen::MatrixXd& inputs, const ParamVector& eta, const FeatureMap& fm,
                    double tie_tolerance = 1e-12);

/// Same, over per-input score rows directly.
MarginReport margin_of_scores(const Eigen::MatrixXd& scores, double tie_tolerance = 1e-12);

}  // namespace selfnorm
