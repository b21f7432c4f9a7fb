#include "selfnorm/checks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "selfnorm/bounds.hpp"
#include "selfnorm/hash.hpp"
#include "selfnorm/model.hpp"
#include "selfnorm/rng.hpp"
#include "selfnorm/variance_analysis.hpp"

namespace selfnorm {

namespace {

std::uint64_t hash_values(const Eigen::VectorXd& v) {
  Fnv1a h;
  for (Eigen::Index i = 0; i < v.size(); ++i) h.add(v(i));
  return h.value();
}

std::uint64_t hash_instance(int d, int K, double alpha) {
  Fnv1a h;
  h.add(std::int64_t{d});
  h.add(std::int64_t{K});
  h.add(alpha);
  return h.value();
}

// Nonzero points of {0,1}^d.
Eigen::MatrixXd nonzero_hypercube(int dim) {
  const InputDistribution full = HypercubeDist(dim).distribution();
  return full.points.bottomRows(full.size() - 1);
}

}  // namespace

std::vector<BoundCheckRow> check_shrinkage(std::uint64_t seed, int instances) {
  const CounterRng rng(seed);
  std::vector<BoundCheckRow> rows;
  std::uint64_t counter = 0;
  for (int t = 0; t < instances; ++t) {
    const int d = 2 + static_cast<int>(rng.below(9, kStreamTests, counter++));
    const int K = 2 + static_cast<int>(rng.below(4, kStreamTests, counter++));
    const double delta = 0.05 + 2.95 * rng.uniform(kStreamTests, counter++);
    Eigen::MatrixXd inputs(20, d);
    for (Eigen::Index i = 0; i < inputs.size(); ++i)
      inputs.data()[i] = 2.0 * rng.uniform(kStreamTests, counter++) - 1.0;
    inputs.col(0).setOnes();
    double R = 0.0;
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) R = std::max(R, inputs.row(i).norm());
    const FeatureMap fm = FeatureMap::class_conjunction(d, K, R);
    ParamVector eta(K, d);
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta.values()(i) = rng.normal(kStreamTests, counter++);
    eta *= (delta / R) / eta.norm();
    const double observed = shrinkage_deviation(eta, fm, LabelSpace(K), inputs);
    rows.push_back({"shrinkage", hash_values(eta.values()), delta, observed, observed <= delta + 1e-10});
  }
  return rows;
}

std::vector<VarianceRow> variance_report(const std::vector<int>& dims, const std::vector<int>& classes,
                                         const std::vector<double>& alphas) {
  std::vector<VarianceRow> rows;
  for (int d : dims) {
    const HypercubeDist cube(d);
    const InputDistribution dist = cube.distribution();
    for (int K : classes) {
      const ParamVector eta0 = hard_construction(d, K);
      const double v_e_star = optimal_einf_variance(eta0, dist).residual_variance;
      for (double alpha : alphas) {
        VarianceRow r;
        r.d = d;
        r.K = K;
        r.alpha = alpha;
        const ParamVector eta = alpha * eta0;
        r.V_star = optimal_variance(eta, dist).residual_variance;
        r.V_E_star = v_e_star;
        r.thm_bound = variance_lower_bound_thm(alpha, d, K, ThmForm::Proof);
        r.thm_bound_statement = variance_lower_bound_thm(alpha, d, K, ThmForm::Statement);
        const CorollaryBound cb = corollary_bound(v_e_star, alpha, K, hard_margin(d));
        r.corollary_bound = cb.value;
        r.corollary_valid = cb.valid;
        const DeviationReport dev = a_einf_deviation(eta0, alpha, dist);
        r.margin = dev.margin;
        r.deviation_centered = dev.centered;
        r.deviation_bound = dev.bound_centered;
        rows.push_back(r);
      }
    }
  }
  return rows;
}

std::vector<BoundCheckRow> check_variance_sandwich(int d_min, int d_max) {
  std::vector<BoundCheckRow> rows;
  for (int d = d_min; d <= d_max; ++d) {
    const double v = optimal_einf_variance(hard_construction(d, 2), HypercubeDist(d)).residual_variance;
    const double lower = 1.0 / (32.0 * d * (d - 1));
    const std::uint64_t h = hash_instance(d, 2, 1.0);
    rows.push_back({"einf_variance_lower", h, lower, v, v >= lower});
    rows.push_back({"einf_variance_upper", h, 1.0, v, v <= 1.0});
  }
  return rows;
}

std::vector<BoundCheckRow> check_variance_rows(const std::vector<VarianceRow>& rows) {
  std::vector<BoundCheckRow> out;
  for (const VarianceRow& r : rows) {
    const std::uint64_t h = hash_instance(r.d, r.K, r.alpha);
    const double thm = std::max(0.0, r.thm_bound);
    out.push_back({"variance_lower_thm_proof_form", h, thm, r.V_star, r.V_star >= thm - 1e-12});
    if (r.corollary_valid)
      out.push_back({"variance_lower_corollary", h, r.corollary_bound, r.V_star,
                     r.V_star >= r.corollary_bound - 1e-12});
    out.push_back({"normalizer_einf_deviation", h, r.deviation_bound, r.deviation_centered,
                   r.deviation_centered <= r.deviation_bound + 1e-12});
  }
  return out;
}

std::vector<BoundCheckRow> check_covariance(std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<BoundCheckRow> rows;
  std::uint64_t counter = 0;
  auto check_model = [&](const ParamVector& eta, const Eigen::MatrixXd& inputs) {
    const int d = static_cast<int>(eta.block_dim());
    const int K = static_cast<int>(eta.num_blocks());
    const FeatureMap fm = FeatureMap::class_conjunction(d, K, std::sqrt(static_cast<double>(d)));
    const MarginReport m = margin(inputs, eta, fm);
    if (!(m.margin > 0.0)) return;  // premise fails: some input has no unique best class
    Eigen::Index q = 0;
    for (Eigen::Index i = 0; i < inputs.rows(); ++i)
      q = std::max(q, covariance_row_support(inputs.row(i).transpose(), fm));
    const double norm = eta.norm();
    const double bound = covariance_eigen_bound(static_cast<int>(q), K, m.margin / norm, norm);
    const LabelSpace ls(K);
    double observed = 0.0;
    for (Eigen::Index i = 0; i < inputs.rows(); ++i)
      observed = std::max(observed, feature_covariance_max_eig(inputs.row(i).transpose(), eta, fm, ls));
    rows.push_back({"covariance_eigenvalue", hash_values(eta.values()), bound, observed,
                    observed <= bound + 1e-12});
  };

  for (int d = 2; d <= 6; ++d) {
    const Eigen::MatrixXd inputs = nonzero_hypercube(d);
    for (int K = 2; K <= 4; ++K) {
      for (int t = 0; t < 20; ++t) {
        ParamVector base(K, d);
        for (Eigen::Index i = 0; i < base.size(); ++i) base.values()(i) = rng.normal(kStreamTests, counter++);
        for (double alpha : {1.0, 2.0, 5.0, 10.0, 20.0}) check_model(alpha * base, inputs);
      }
    }
    if (d >= 3)
      for (double alpha : {1.0, 5.0, 10.0, 20.0}) check_model(alpha * hard_construction(d, 2), inputs);
  }
  return rows;
}

std::vector<BoundCheckRow> check_thm1(const std::vector<ExperimentRow>& rows, double slack) {
  std::vector<BoundCheckRow> out;
  for (const ExperimentRow& r : rows) {
    Fnv1a h;
    h.add(r.seed);
    h.add(r.tau);
    h.add(r.delta);
    const double bound = r.bound_thm1 + slack;
    out.push_back({"likelihood_gap_thm1", h.value(), bound, r.gap, std::isfinite(r.gap) && r.gap <= bound});
  }
  return out;
}

std::vector<BoundCheckRow> run_bound_checks(const RunConfig& cfg, int threads, bool include_synthetic) {
  std::vector<BoundCheckRow> rows = check_shrinkage(cfg.synth.seed);
  auto append = [&rows](std::vector<BoundCheckRow> more) {
    rows.insert(rows.end(), more.begin(), more.end());
  };
  append(check_variance_sandwich());
  append(check_variance_rows(variance_report({3, 4, 5, 6}, {2, 4}, {1.0, 5.0, 10.0, 20.0})));
  append(check_covariance(cfg.synth.seed));
  if (include_synthetic) append(check_thm1(run_tradeoff_suite(cfg.synth, cfg.train, threads)));
  return rows;
}

}  // namespace selfnorm
