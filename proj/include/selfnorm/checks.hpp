#pragma once

#include <cstdint>
#include <vector>

#include "selfnorm/config.hpp"
#include "selfnorm/experiments.hpp"
#include "selfnorm/reports.hpp"

namespace selfnorm {

/// max |A - log mu(Y)| <= delta for random eta with ||eta|| = delta / R.
std::vector<BoundCheckRow> check_shrinkage(std::uint64_t seed, int instances = 100);

/// Hard-construction variance summaries on the enumerated hypercube for every
/// (d, K, alpha) combination.
std::vector<VarianceRow> variance_report(const std::vector<int>& dims, const std::vector<int>& classes,
                                         const std::vector<double>& alphas);

/// 1/(32 d (d-1)) <= V_E*(eta^0) <= 1 for d in [d_min, d_max].
std::vector<BoundCheckRow> check_variance_sandwich(int d_min = 3, int d_max = 8);

/// Theorem (proof form), corollary (where valid) and A-vs-E_inf deviation rows.
std::vector<BoundCheckRow> check_variance_rows(const std::vector<VarianceRow>& rows);

/// Largest per-input feature-covariance eigenvalue against q (k-1) e^{-c ||eta||}
/// on random hypercube models with a positive margin, d in [2, 6], plus the
/// scaled hard construction. q is the largest covariance row support.
std::vector<BoundCheckRow> check_covariance(std::uint64_t seed);

/// gap <= bound_thm1 + slack for every experiment row.
std::vector<BoundCheckRow> check_thm1(const std::vector<ExperimentRow>& rows, double slack = 0.02);

/// Every check above; the synthetic suite from `cfg` is run when requested.
std::vector<BoundCheckRow> run_bound_checks(const RunConfig& cfg, int threads, bool include_synthetic);

}  // namespace selfnorm
