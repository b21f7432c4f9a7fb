#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "selfnorm/dataset.hpp"
#include "selfnorm/feature_map.hpp"
#include "selfnorm/label_space.hpp"
#include "selfnorm/param_vector.hpp"

namespace selfnorm {

/// (1 - delta / (R ||eta_hat||))_+ * expected_kl, the factor clamped to [0, 1].
double lgap_upper_bound(double delta, double R, double eta_hat_norm, double expected_kl);

/// b (||eta|| - delta/R)^2 exp(-c delta / R); zero once delta >= R ||eta||.
double strong_lgap_bound(double eta_norm, double delta, double R, double b, double c);

/// max over the rows of `inputs` of |A(x, eta) - log mu(Y)|.
double shrinkage_deviation(const ParamVector& eta, const FeatureMap& fm, const LabelSpace& ls,
                           const Eigen::MatrixXd& inputs);

/// (1/n) sum_i min_{s in S} max_y ||T(x_i, y) - T(s, y)||_2, S given as rows.
double closeness(const Dataset& ds, const Eigen::MatrixXd& candidates, const FeatureMap& fm);

struct NormalizabilityBound {
  double value;      // B * D
  std::string note;  // caveat on what B bounds
};

NormalizabilityBound closeness_normalizability_bound(double D, double B);

enum class CovarianceBoundKind {
  Eigenvalue,  // q (k - 1) exp(-c ||eta||)
  PerEntry,    // 2 (k - 1) exp(-c ||eta||)
};

double covariance_eigen_bound(int q, int k, double c, double eta_norm,
                              CovarianceBoundKind kind = CovarianceBoundKind::Eigenvalue);

/// Number of coordinates of T(x, .) that are nonzero for some label: the
/// most nonzero entries any row of the feature covariance at x can hold.
/// For class conjunctions this is K times the number of nonzero inputs.
Eigen::Index covariance_row_support(const Eigen::VectorXd& x, const FeatureMap& fm);

enum class EigenMethod { Auto, Dense, PowerIteration };

/// Covariance of T(x, Y) under p_eta(. | x): F^T (diag p - p p^T) F with F
/// the K x D feature matrix.
Eigen::MatrixXd feature_covariance(const Eigen::VectorXd& x, const ParamVector& eta,
                                   const FeatureMap& fm, const LabelSpace& ls);

/// Largest eigenvalue of feature_covariance. Auto assembles densely for
/// D <= kDenseEigenLimit and otherwise iterates on the factored form.
double feature_covariance_max_eig(const Eigen::VectorXd& x, const ParamVector& eta,
                                  const FeatureMap& fm, const LabelSpace& ls,
                                  EigenMethod method = EigenMethod::Auto);

inline constexpr Eigen::Index kDenseEigenLimit = 100;

}  // namespace selfnorm
