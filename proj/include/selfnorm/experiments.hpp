#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "selfnorm/dataset.hpp"
#include "selfnorm/estimation.hpp"
#include "selfnorm/feature_map.hpp"
#include "selfnorm/label_space.hpp"
#include "selfnorm/synthetic.hpp"

namespace selfnorm {

/// One (tau, delta) grid point. Log-likelihoods and the gap are per sample.
struct ExperimentRow {
  double tau = 0.0;
  double delta = 0.0;
  double loglik_mle = 0.0;
  double loglik_constrained = 0.0;
  double gap = 0.0;
  double sqrtV = 0.0;
  double kl_uniform = 0.0;  // at the MLE
  double bound_thm1 = 0.0;
  std::uint64_t seed = 0;
  std::string flags;  // ';'-separated: mle_not_converged, fit_not_converged, diverged
  std::string source = "synthetic";
};

/// Runs fn(0), ..., fn(count - 1) on up to `threads` workers. Each index is
/// visited exactly once; callers write results by index.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/// Thread count from SELFNORM_THREADS when set, else `requested`, at least 1.
int resolve_threads(int requested);

/// One row per delta on a fixed dataset, sharing one penalty path.
std::vector<ExperimentRow> run_tradeoff(const Dataset& ds, const FeatureMap& fm,
                                        const LabelSpace& ls, const std::vector<double>& delta_grid,
                                        const TrainConfig& cfg);

/// run_tradeoff on generate_synthetic(synth, tau) for every tau in the grid,
/// rows ordered by (tau, delta) index.
std::vector<ExperimentRow> run_tradeoff_suite(const SynthConfig& synth, const TrainConfig& cfg,
                                              int threads = 1);

/// One row per tau at a fixed delta.
std::vector<ExperimentRow> run_kl_sweep(const SynthConfig& synth, const TrainConfig& cfg,
                                        double fixed_delta, int threads = 1);

}  // namespace selfnorm
