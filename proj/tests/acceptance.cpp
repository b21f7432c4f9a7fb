#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "selfnorm/bounds.hpp"
#include "selfnorm/checks.hpp"
#include "selfnorm/config.hpp"
#include "selfnorm/estimation.hpp"
#include "selfnorm/experiments.hpp"
#include "selfnorm/geometry.hpp"
#include "selfnorm/model.hpp"
#include "selfnorm/reports.hpp"
#include "selfnorm/synthetic.hpp"
#include "selfnorm/variance_analysis.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace selfnorm;
using testutil::Draws;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("[%s] %2d %-28s %s; %.3f s (limit %g s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs, limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Eigen::VectorXd grad_fd(const Dataset& ds, const ParamVector& eta, const FeatureMap& fm, const LabelSpace& ls) {
  const double h = 1e-5;
  Eigen::VectorXd g(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ParamVector up = eta, down = eta;
    up.values()(i) += h;
    down.values()(i) -= h;
    g(i) = (log_likelihood(ds, up, fm, ls) - log_likelihood(ds, down, fm, ls)) / (2.0 * h);
  }
  return g;
}

Outcome c1() {
  const FeatureMap fm = testutil::example_one_map();
  const ParamVector eta = testutil::example_one_eta();
  const LabelSpace ls(2);
  const double l2 = std::log(2.0);
  const auto start = std::chrono::steady_clock::now();
  const double a = log_partition(Eigen::VectorXd::Constant(1, l2), eta, fm, ls);
  const double b = log_partition(Eigen::VectorXd::Constant(1, -l2), eta, fm, ls);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  const double worst = std::max(std::abs(a), std::abs(b));
  return {worst <= 1e-12 && ms < 1.0, fmt("max |A| = %.3g, evaluation %.4f ms", worst, ms)};
}

Outcome c2() {
  Draws draws(9001);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = draws.between(1, 10), k = draws.between(2, 5), n = draws.between(1, 50);
    const Dataset ds = draws.dataset(n, d, k);
    const FeatureMap fm = FeatureMap::class_conjunction(d, k, 10.0);
    const ParamVector eta = draws.params(k, d);
    const LabelSpace ls(k);
    const Eigen::VectorXd analytic = grad_log_likelihood(ds, eta, fm, ls).values();
    const Eigen::VectorXd numeric = grad_fd(ds, eta, fm, ls);
    worst = std::max(worst, (analytic - numeric).norm() / std::max(numeric.norm(), 1e-8));
  }
  return {worst <= 1e-5, fmt("worst relative error %.3g over 100 instances", worst)};
}

Outcome c3() {
  Draws draws(9002);
  int violations = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = draws.between(1, 8), k = draws.between(1, 6);
    const Eigen::MatrixXd x = draws.inputs(draws.between(1, 40), d);
    const double R = testutil::max_row_norm(x);
    const double delta = draws.uniform(0.001, 3.0);
    ParamVector eta = draws.params(k, d);
    eta *= delta / (R * eta.norm());
    const double dev = shrinkage_deviation(eta, FeatureMap::class_conjunction(d, k, R), LabelSpace(k), x);
    worst = std::max(worst, dev / delta);
    violations += dev <= delta ? 0 : 1;
  }
  return {violations == 0, fmt("%g violations, worst deviation/delta %.4f", violations, worst)};
}

Outcome c4() {
  Draws draws(9003);
  double worst_a = 0.0, worst_p = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int d = draws.between(1, 6), k = draws.between(2, 6);
    const FeatureMap fm = FeatureMap::class_conjunction(d, k, 100.0);
    const ParamVector eta = draws.params(k, d);
    const Eigen::VectorXd beta = draws.normals(d);
    const ParamVector shifted = equivalence_shift(eta, beta);
    const Eigen::VectorXd x = draws.inputs(1, d).row(0).transpose();
    const LabelSpace ls(k);
    worst_a = std::max(worst_a,
                       std::abs(log_partition(x, shifted, fm, ls) - log_partition(x, eta, fm, ls) - beta.dot(x)));
    worst_p = std::max(worst_p, (log_probs(x, shifted, fm, ls).array().exp() - log_probs(x, eta, fm, ls).array().exp()).abs().maxCoeff());
  }
  return {worst_a <= 1e-12 && worst_p <= 1e-12,
          fmt("max |dA - beta.x| = %.3g, max |dp| = %.3g", worst_a, worst_p)};
}

Outcome c5() {
  const HypercubeDist cube(3);
  const InputDistribution dist = cube.distribution();
  Draws draws(9005);
  std::vector<ParamVector> models;
  for (int t = 0; t < 5; ++t) models.push_back(draws.params(2, 3));
  models.push_back(hard_construction(3, 2));
  double worst = 0.0;
  for (const ParamVector& eta : models) {
    Eigen::VectorXd f(dist.points.rows());
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = oracle::log_partition_cc(eta, dist.points.row(i).transpose());
    const double brute = oracle::grid_min_variance3(f, dist.points, dist.weights);
    worst = std::max(worst, std::abs(optimal_variance(eta, cube).residual_variance - brute));
  }
  return {worst <= 1e-3, fmt("max |V* - grid search| = %.3g over 6 models", worst)};
}

Outcome c6() {
  std::ostringstream s;
  bool ok = true;
  for (int d = 3; d <= 8; ++d) {
    const double v = optimal_einf_variance(hard_construction(d, 2), HypercubeDist(d)).residual_variance;
    ok = ok && v >= 1.0 / (32.0 * d * (d - 1.0)) && v <= 1.0;
    s << (d > 3 ? " " : "") << "d" << d << "=" << v;
  }
  return {ok, "V_E* " + s.str()};
}

Outcome c7() {
  int checked = 0, violations = 0, statement_violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int d = 3; d <= 6; ++d) {
    const HypercubeDist cube(d);
    for (int K : {2, 4}) {
      const ParamVector base = hard_construction(d, K);
      for (double alpha : {1.0, 5.0, 10.0, 20.0}) {
        const double v = optimal_variance(alpha * base, cube).residual_variance;
        const double proof = std::max(0.0, variance_lower_bound_thm(alpha, d, K, ThmForm::Proof));
        const double statement = std::max(0.0, variance_lower_bound_thm(alpha, d, K, ThmForm::Statement));
        ++checked;
        violations += v >= proof ? 0 : 1;
        statement_violations += v >= statement ? 0 : 1;
        min_slack = std::min(min_slack, v - proof);
      }
    }
  }
  return {violations == 0, fmt("proof form: %g violations of %g, min slack %.4g", violations, checked, min_slack) +
                               fmt("; statement form (reported only): %g violations", statement_violations)};
}

Outcome c8() {
  int checked = 0, violations = 0;
  for (int d = 3; d <= 6; ++d) {
    const HypercubeDist cube(d);
    for (int K : {2, 4}) {
      const ParamVector base = hard_construction(d, K);
      const double ve = optimal_einf_variance(base, cube).residual_variance;
      const double margin = hard_margin(d);
      for (double alpha : {1.0, 5.0, 10.0, 20.0}) {
        if (!(alpha > std::log(2.0 * K) / margin)) continue;
        const CorollaryBound b = corollary_bound(ve, alpha, K, margin);
        ++checked;
        violations += optimal_variance(alpha * base, cube).residual_variance >= b.value ? 0 : 1;
      }
    }
  }
  return {checked > 0 && violations == 0, fmt("%g violations of %g admissible grid points", violations, checked)};
}

struct SuiteOutputs {
  std::vector<ExperimentRow> tradeoff;
  std::vector<ExperimentRow> kl;
  std::string tradeoff_csv, kl_csv, fit_json;
};

SuiteOutputs run_suite(const RunConfig& cfg, int threads) {
  SuiteOutputs out;
  out.tradeoff = run_tradeoff_suite(cfg.synth, cfg.train, threads);
  std::ostringstream a;
  write_experiment_csv(out.tradeoff, a);
  out.tradeoff_csv = a.str();
  out.kl = run_kl_sweep(cfg.synth, cfg.train, cfg.kl_delta, threads);
  std::ostringstream b;
  write_experiment_csv(out.kl, b);
  out.kl_csv = b.str();
  const Dataset ds = generate_synthetic(cfg.synth, 1.0);
  out.fit_json = fit_result_json(fit_constrained(ds, synthetic_feature_map(cfg.synth), LabelSpace(cfg.synth.K),
                                                 cfg.kl_delta, cfg.train))
                     .dump(2);
  return out;
}

}  // namespace

int main() {
  const RunConfig cfg = load_config(SELFNORM_DEFAULT_CONFIG);
  std::printf("default config: d=%d K=%d n=%d, %zu tau x %zu delta, seed %llu\n", cfg.synth.d, cfg.synth.K,
              cfg.synth.n, cfg.synth.tau_grid.size(), cfg.synth.delta_grid.size(),
              static_cast<unsigned long long>(cfg.synth.seed));

  report(1, "exact self-normalization", 1.0, c1);
  report(2, "gradient oracle", 5.0, c2);
  report(3, "shrinkage", 5.0, c3);
  report(4, "equivalence shifts", 5.0, c4);
  report(5, "projection vs grid search", 60.0, c5);
  report(6, "E_inf variance sandwich", 10.0, c6);
  report(7, "variance lower bound", 30.0, c7);
  report(8, "corollary bound", 30.0, c8);

  SuiteOutputs one;
  report(9, "likelihood gap bound", 600.0, [&] {
    const auto start = std::chrono::steady_clock::now();
    one.tradeoff = run_tradeoff_suite(cfg.synth, cfg.train, 1);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream a;
    write_experiment_csv(one.tradeoff, a);
    one.tradeoff_csv = a.str();
    int violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (const ExperimentRow& r : one.tradeoff) {
      const double excess = r.gap - r.bound_thm1;
      worst = std::max(worst, excess);
      violations += std::isfinite(r.gap) && excess <= 0.02 ? 0 : 1;
    }
    return Outcome{violations == 0, fmt("%g of %g rows exceed bound + 0.02, worst gap - bound %.4g", violations,
                                        static_cast<double>(one.tradeoff.size()), worst) +
                                        fmt(", suite %.1f s", secs)};
  });

  report(10, "gap monotone in delta", 600.0, [&] {
    std::map<double, std::vector<const ExperimentRow*>> by_tau;
    for (const ExperimentRow& r : one.tradeoff) by_tau[r.tau].push_back(&r);
    int monotone = 0;
    for (auto& [tau, rows] : by_tau) {
      std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->delta < b->delta; });
      bool ok = true;
      for (std::size_t i = 1; i < rows.size(); ++i) ok = ok && rows[i]->gap <= rows[i - 1]->gap + 1e-3;
      monotone += ok ? 1 : 0;
    }
    return Outcome{monotone >= 3, fmt("%g of %g temperatures non-increasing", monotone,
                                      static_cast<double>(by_tau.size()))};
  });

  report(11, "gap peaks at interior tau", 600.0, [&] {
    one.kl = run_kl_sweep(cfg.synth, cfg.train, cfg.kl_delta, 1);
    std::ostringstream b;
    write_experiment_csv(one.kl, b);
    one.kl_csv = b.str();
    std::vector<ExperimentRow> rows = one.kl;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.tau < b.tau; });
    double interior = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) interior = std::max(interior, rows[i].gap);
    const double first = rows.front().gap, last = rows.back().gap;
    const bool peak = interior >= 2.0 * first && interior >= 2.0 * last;
    const bool small = first <= 0.05;
    return Outcome{peak && small, fmt("interior max %.4f, endpoints %.4f / %.4f", interior, first, last) +
                                      std::string(peak ? "" : " (no interior peak)") +
                                      fmt("; smallest-tau gap %.4g", first)};
  });

  report(12, "covariance eigenvalue bound", 30.0, [] {
    const std::vector<BoundCheckRow> rows = check_covariance(0);
    int violations = 0;
    double worst = 0.0;
    for (const BoundCheckRow& r : rows) {
      violations += r.satisfied ? 0 : 1;
      if (r.bound_value > 0.0) worst = std::max(worst, r.observed_value / r.bound_value);
    }
    return Outcome{!rows.empty() && violations == 0, fmt("%g violations of %g models, worst ratio %.4f", violations,
                                                         static_cast<double>(rows.size()), worst)};
  });

  report(13, "input-space zero level set", 5.0, [] {
    const FeatureMap fm = FeatureMap::shared_repeated(2, 2, 2, [](const Eigen::VectorXd& x) { return x; }, 10.0);
    const ParamVector eta(2, 2, (Eigen::VectorXd(4) << -1.0, 1.0, -1.0, -2.0).finished());
    const LabelSpace ls(2);
    const ContourSet c = levelset_input_space(eta, fm, ls, Box2{}, 512, 0.0);
    double worst = 0.0;
    int outside = 0;
    for (const auto& line : c.polylines)
      for (const auto& v : line.vertices) {
        const double a = log_partition(v, eta, fm, ls);
        worst = std::max(worst, std::abs(a));
        const double cap = std::max(a, 0.0) + 1e-6;
        outside += eta.block(0).dot(v) <= cap && eta.block(1).dot(v) <= cap ? 0 : 1;
      }
    return Outcome{c.num_vertices() > 0 && !c.degenerate && worst <= 1e-2 && outside == 0,
                   fmt("%g vertices, max |A| %.3g, %g outside the half-planes",
                       static_cast<double>(c.num_vertices()), worst, outside)};
  });

  report(14, "thread determinism", 1800.0, [&] {
    const Dataset ds = generate_synthetic(cfg.synth, 1.0);
    one.fit_json = fit_result_json(fit_constrained(ds, synthetic_feature_map(cfg.synth), LabelSpace(cfg.synth.K),
                                                   cfg.kl_delta, cfg.train))
                       .dump(2);
    const SuiteOutputs eight = run_suite(cfg, 8);
    const bool same_tradeoff = one.tradeoff_csv == eight.tradeoff_csv;
    const bool same_kl = one.kl_csv == eight.kl_csv;
    const bool same_json = one.fit_json == eight.fit_json;
    return Outcome{same_tradeoff && same_kl && same_json && !one.tradeoff_csv.empty() && !one.kl_csv.empty(),
                   fmt("1 vs 8 threads identical: tradeoff csv %g, kl csv %g, fit json %g", same_tradeoff, same_kl,
                       same_json)};
  });

  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
