#include "selfnorm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "selfnorm/bounds.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/model.hpp"

namespace selfnorm {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int resolve_threads(int requested) {
  if (const char* env = std::getenv("SELFNORM_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("SELFNORM_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(requested, 1);
}

namespace {

void append_flag(std::string& flags, const char* flag) {
  if (!flags.empty()) flags += ';';
  flags += flag;
}

}  // namespace

std::vector<ExperimentRow> run_tradeoff(const Dataset& ds, const FeatureMap& fm,
                                        const LabelSpace& ls, const std::vector<double>& delta_grid,
                                        const TrainConfig& cfg) {
  ConstrainedSolver solver(ds, fm, ls, cfg);
  const FitResult& mle = solver.mle();
  const double n = static_cast<double>(ds.size());
  const double kl = kl_to_uniform(ds, mle.eta, fm, ls);
  const double eta_norm = mle.eta.norm();

  // Solve every delta first, then read each row from the final candidate
  // pool: a candidate feasible at one delta is feasible at every larger one,
  // so the reported gap is non-increasing in delta.
  std::vector<bool> failed(delta_grid.size(), false);
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    try {
      solver.solve(delta_grid[i]);
    } catch (const NumericError&) {
      failed[i] = true;
    }
  }

  std::vector<ExperimentRow> rows;
  rows.reserve(delta_grid.size());
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    const double delta = delta_grid[i];
    ExperimentRow row;
    row.tau = ds.provenance().tau;
    row.seed = ds.provenance().seed;
    row.delta = delta;
    row.loglik_mle = mle.log_likelihood / n;
    row.kl_uniform = kl;
    row.bound_thm1 = eta_norm > 0.0 ? lgap_upper_bound(delta, fm.radius(), eta_norm, kl) : 0.0;
    if (!mle.converged) append_flag(row.flags, "mle_not_converged");
    try {
      if (failed[i]) throw NumericError("constrained solve failed");
      const FitResult fit = solver.best(delta);
      row.loglik_constrained = fit.log_likelihood / n;
      row.gap = likelihood_gap(mle, fit, ds.size());
      row.sqrtV = std::sqrt(fit.V);
      if (!fit.converged) append_flag(row.flags, "fit_not_converged");
      if (fit.diverged) append_flag(row.flags, "diverged");
    } catch (const NumericError&) {
      append_flag(row.flags, "optimizer_failed");
      row.loglik_constrained = std::nan("");
      row.gap = std::nan("");
      row.sqrtV = std::nan("");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ExperimentRow> run_tradeoff_suite(const SynthConfig& synth, const TrainConfig& cfg,
                                              int threads) {
  synth.validate();
  cfg.validate();
  const FeatureMap fm = synthetic_feature_map(synth);
  const LabelSpace ls(synth.K);
  const int count = static_cast<int>(synth.tau_grid.size());
  std::vector<std::vector<ExperimentRow>> per_tau(static_cast<std::size_t>(count));
  parallel_for(count, threads, [&](int t) {
    const Dataset ds = generate_synthetic(synth, synth.tau_grid[static_cast<std::size_t>(t)]);
    per_tau[static_cast<std::size_t>(t)] = run_tradeoff(ds, fm, ls, synth.delta_grid, cfg);
  });
  std::vector<ExperimentRow> rows;
  for (auto& block : per_tau) rows.insert(rows.end(), block.begin(), block.end());
  return rows;
}

std::vector<ExperimentRow> run_kl_sweep(const SynthConfig& synth, const TrainConfig& cfg,
                                        double fixed_delta, int threads) {
  if (!(fixed_delta > 0.0)) throw ArgumentError("fixed delta must be positive");
  SynthConfig single = synth;
  single.delta_grid = {fixed_delta};
  return run_tradeoff_suite(single, cfg, threads);
}

}  // namespace selfnorm
