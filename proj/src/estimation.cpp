#include "selfnorm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>
#include <optional>
#include <string>

#include <Eigen/QR>
#include <Eigen/SparseCore>

#include "selfnorm/errors.hpp"
#include "selfnorm/model.hpp"
#include "selfnorm/optimizer.hpp"
#include "selfnorm/variance_analysis.hpp"

namespace selfnorm {

void TrainConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(gradient_tolerance > 0.0)) throw ConfigError("gradient_tolerance must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("line-search shrink must lie in (0, 1)");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0))
    throw ConfigError("sufficient_decrease must lie in (0, 1)");
  if (history_size < 1) throw ConfigError("history_size must be at least 1");
  if (B && !(*B > 0.0)) throw ConfigError("B must be positive");
  if (ridge < 0.0) throw ConfigError("ridge must be nonnegative");
  if (!std::isfinite(center)) throw ConfigError("center must be finite");
  if (!(constraint_tolerance >= 0.0)) throw ConfigError("constraint_tolerance must be nonnegative");
  if (!(log10_alpha_min < log10_alpha_max)) throw ConfigError("empty penalty search range");
  if (max_bisection < 1) throw ConfigError("max_bisection must be at least 1");
}

FitResult describe(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                   const ParamVector& eta, const TrainConfig& cfg, std::string origin) {
  const BatchEvaluation ev = evaluate(ds, eta, fm, ls);
  FitResult r;
  r.eta = eta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) ll += ev.scores(i, ds.labels()(i)) - ev.log_partition(i);
  r.log_likelihood = ll;
  r.V = normalizer_stats(ev.log_partition, cfg.center).V;
  r.dataset_hash = ds.hash();
  r.origin = std::move(origin);
  return r;
}

namespace {

// Distinct inputs with per-label counts; repeated inputs share one
// evaluation of the scores and the log-partition.
struct CompressedData {
  InputMatrix inputs;
  Eigen::MatrixXd counts;       // unique inputs x K
  Eigen::VectorXd multiplicity;  // row sums of counts
};

CompressedData compress(const Dataset& ds) {
  std::map<std::vector<std::pair<Eigen::Index, double>>, Eigen::Index> index;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> hits;  // (unique row, label)
  const InputMatrix& x = ds.inputs();
  std::vector<std::pair<Eigen::Index, double>> key;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    key.clear();
    for (InputMatrix::InnerIterator it(x, i); it; ++it) key.emplace_back(it.col(), it.value());
    const auto next = static_cast<Eigen::Index>(index.size());
    const auto [pos, fresh] = index.try_emplace(key, next);
    if (fresh)
      for (const auto& [col, value] : key) triplets.emplace_back(next, col, value);
    hits.emplace_back(pos->second, ds.labels()(i));
  }
  CompressedData c;
  const auto unique = static_cast<Eigen::Index>(index.size());
  c.inputs.resize(unique, ds.dim());
  c.inputs.setFromTriplets(triplets.begin(), triplets.end());
  c.counts = Eigen::MatrixXd::Zero(unique, ds.num_labels());
  for (const auto& [row, label] : hits) c.counts(row, label) += 1.0;
  c.multiplicity = c.counts.rowwise().sum();
  return c;
}

// Per-sample objective, divided by (1 + alpha) so one gradient tolerance
// fits every penalty weight:
//   [-(1/n) l(eta) + alpha (1/n) sum (A_i - c)^2 + ridge ||eta||^2] / (1 + alpha)
FitResult run_fit(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls, double alpha,
                  const TrainConfig& cfg, const ParamVector* warm_start, std::string origin) {
  cfg.validate();
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ArgumentError("penalty weight must be finite and >= 0");
  if (ds.num_labels() != ls.size()) throw ConfigError("dataset and label space disagree on K");
  ParamVector start = warm_start ? *warm_start : fm.zero_params();
  fm.check_params(start);

  const CompressedData data = compress(ds);
  const double n = static_cast<double>(ds.size());
  const double scale = 1.0 / (1.0 + alpha);
  const Eigen::Index blocks = start.num_blocks();
  const Eigen::Index block_dim = start.block_dim();

  Objective objective = [&](const Eigen::VectorXd& w, Eigen::VectorXd& grad) {
    const ParamVector eta(blocks, block_dim, w);
    const BatchEvaluation ev = evaluate(data.inputs, eta, fm, ls);
    const double ll = (data.counts.array() * ev.scores.array()).sum() - data.multiplicity.dot(ev.log_partition);
    Eigen::MatrixXd weights = data.counts - data.multiplicity.asDiagonal() * ev.probs;
    double penalty = 0.0;
    if (alpha > 0.0) {
      const Eigen::ArrayXd dev = ev.log_partition.array() - cfg.center;
      penalty = (data.multiplicity.array() * dev.square()).sum();
      weights -= (2.0 * alpha * data.multiplicity.array() * dev).matrix().asDiagonal() * ev.probs;
    }
    grad = (-scale / n) * fm.batch_pullback(data.inputs, weights).values() +
           (2.0 * cfg.ridge * scale) * w;
    return scale * (-(ll / n) + alpha * penalty / n + cfg.ridge * w.squaredNorm());
  };

  LbfgsOptions opts;
  opts.max_iterations = cfg.max_iterations;
  opts.gradient_tolerance = cfg.gradient_tolerance;
  opts.shrink = cfg.shrink;
  opts.sufficient_decrease = cfg.sufficient_decrease;
  opts.history_size = cfg.history_size;
  const LbfgsResult opt = minimize_lbfgs(objective, start.values(), opts);

  ParamVector eta(blocks, block_dim, opt.x);
  bool diverged = false;
  if (cfg.B) {
    const double norm = eta.norm();
    diverged = norm > 10.0 * *cfg.B;
    if (norm > *cfg.B) eta *= *cfg.B / norm;
  }
  if (!eta.all_finite()) throw NumericError("optimizer produced non-finite parameters");

  FitResult r = describe(ds, fm, ls, eta, cfg, std::move(origin));
  r.iterations = opt.iterations;
  r.converged = opt.converged;
  r.gradient_norm = opt.gradient_norm;
  r.diverged = diverged;
  if (alpha > 0.0 || r.origin == "penalized") r.alpha_penalty = alpha;
  return r;
}

}  // namespace

FitResult fit_mle(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                  const TrainConfig& cfg, const ParamVector* warm_start) {
  return run_fit(ds, fm, ls, 0.0, cfg, warm_start, "mle");
}

FitResult fit_penalized(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                        double alpha, const TrainConfig& cfg, const ParamVector* warm_start) {
  return run_fit(ds, fm, ls, alpha, cfg, warm_start, "penalized");
}

ParamVector scaled_feasible_param(const ParamVector& eta_hat, double delta, double R) {
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  if (!(R > 0.0)) throw ArgumentError("R must be positive");
  const double norm = eta_hat.norm();
  if (norm == 0.0) return eta_hat;
  const double alpha = std::min(1.0, delta / (R * norm));
  return alpha * eta_hat;
}

ParamVector best_equivalent_shift(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                                  const ParamVector& eta, double center) {
  if (!fm.is_class_conjunction()) return eta;
  const BatchEvaluation ev = evaluate(ds, eta, fm, ls);
  const Eigen::MatrixXd x = ds.dense_inputs();
  const Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::VectorXd rhs = x.transpose() * (ev.log_partition.array() - center).matrix();
  const Eigen::VectorXd beta = gram.completeOrthogonalDecomposition().solve(rhs);
  return equivalence_shift(eta, -beta);
}

double likelihood_gap(const FitResult& fit_a, const FitResult& fit_b, Eigen::Index n) {
  if (n < 1) throw ArgumentError("likelihood gap needs n >= 1");
  if (fit_a.dataset_hash != fit_b.dataset_hash)
    throw ArgumentError("fits were produced on different datasets");
  return (fit_a.log_likelihood - fit_b.log_likelihood) / static_cast<double>(n);
}

ConstrainedSolver::ConstrainedSolver(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                                     TrainConfig cfg, std::optional<FitResult> mle)
    : ds_(ds), fm_(fm), ls_(ls), cfg_(std::move(cfg)) {
  cfg_.validate();
  mle_ = mle ? std::move(*mle) : fit_mle(ds_, fm_, ls_, cfg_);
  if (mle_.dataset_hash != ds_.hash()) throw ArgumentError("MLE was fitted on a different dataset");
  add_candidate(mle_);
  if (fm_.is_class_conjunction()) {
    FitResult shifted = describe(ds_, fm_, ls_, best_equivalent_shift(ds_, fm_, ls_, mle_.eta, cfg_.center),
                                 cfg_, "shifted");
    shifted.iterations = mle_.iterations;
    shifted.converged = mle_.converged;
    shifted.gradient_norm = mle_.gradient_norm;
    add_candidate(std::move(shifted));
  }
}

bool ConstrainedSolver::feasible(const FitResult& f, double delta) const {
  return f.V <= delta * delta + cfg_.constraint_tolerance;
}

void ConstrainedSolver::add_candidate(FitResult f) { candidates_.push_back(std::move(f)); }

const FitResult& ConstrainedSolver::penalized(double log10_alpha) {
  if (auto it = path_.find(log10_alpha); it != path_.end()) return it->second;
  const ParamVector* warm = &mle_.eta;
  if (!path_.empty()) {
    auto above = path_.lower_bound(log10_alpha);
    if (above == path_.end()) {
      warm = &std::prev(above)->second.eta;
    } else if (above == path_.begin()) {
      warm = &above->second.eta;
    } else {
      auto below = std::prev(above);
      warm = (log10_alpha - below->first <= above->first - log10_alpha) ? &below->second.eta
                                                                          : &above->second.eta;
    }
  }
  FitResult fit = fit_penalized(ds_, fm_, ls_, std::pow(10.0, log10_alpha), cfg_, warm);
  if (fm_.is_class_conjunction()) {
    // The penalty is already stationary along shared shifts at an exact
    // optimum; re-centering removes what the optimizer left behind.
    FitResult shifted = describe(ds_, fm_, ls_, best_equivalent_shift(ds_, fm_, ls_, fit.eta, cfg_.center),
                                 cfg_, "penalized");
    if (shifted.V < fit.V) {
      shifted.iterations = fit.iterations;
      shifted.converged = fit.converged;
      shifted.gradient_norm = fit.gradient_norm;
      shifted.alpha_penalty = fit.alpha_penalty;
      fit = std::move(shifted);
    }
  }
  add_candidate(fit);
  return path_.emplace(log10_alpha, std::move(fit)).first->second;
}

FitResult ConstrainedSolver::solve(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ArgumentError("delta must be positive and finite");
  const double target = delta * delta;

  ParamVector witness = scaled_feasible_param(mle_.eta, delta, fm_.radius());
  witness = best_equivalent_shift(ds_, fm_, ls_, witness, cfg_.center);
  add_candidate(describe(ds_, fm_, ls_, witness, cfg_, "witness"));

  const FitResult current = best(delta);
  if (current.log_likelihood >= mle_.log_likelihood - 1e-9 * (1.0 + std::abs(mle_.log_likelihood)))
    return current;

  // Bracket the penalty weight whose fit lands V in [0.9, 1] delta^2,
  // stepping outwards from fits already on the path. Very large weights are
  // badly conditioned, so the search never starts at the top of the range.
  std::optional<double> hi, lo;
  for (const auto& [key, fit] : path_) {
    if (feasible(fit, delta)) {
      hi = key;
      break;
    }
  }
  if (!hi) {
    double key = path_.empty() ? 0.0 : std::prev(path_.end())->first + 1.0;
    while (true) {
      key = std::min(key, cfg_.log10_alpha_max);
      if (feasible(penalized(key), delta)) {
        hi = key;
        break;
      }
      if (key >= cfg_.log10_alpha_max) return best(delta);
      key += 1.0;
    }
  }
  for (const auto& [key, fit] : path_)
    if (key < *hi && !feasible(fit, delta)) lo = key;
  while (!lo) {
    const double key = std::max(*hi - 1.0, cfg_.log10_alpha_min);
    if (key >= *hi) return best(delta);
    const FitResult& fit = penalized(key);
    if (feasible(fit, delta)) {
      hi = key;
      if (fit.V >= 0.9 * target) return best(delta);
    } else {
      lo = key;
    }
  }

  for (int it = 0; it < cfg_.max_bisection && *hi - *lo > 1e-4; ++it) {
    if (path_.at(*hi).V >= 0.9 * target) break;
    // Secant step on log V against log10 alpha, kept inside the bracket.
    const double v_lo = std::log(std::max(path_.at(*lo).V, 1e-300));
    const double v_hi = std::log(std::max(path_.at(*hi).V, 1e-300));
    const double width = *hi - *lo;
    double mid = 0.5 * (*lo + *hi);
    if (v_lo > v_hi) mid = *lo + width * (v_lo - std::log(0.95 * target)) / (v_lo - v_hi);
    mid = std::clamp(mid, *lo + 0.1 * width, *hi - 0.1 * width);
    const FitResult& fit = penalized(mid);
    if (feasible(fit, delta)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return best(delta);
}

FitResult ConstrainedSolver::best(double delta) const {
  const FitResult* best = nullptr;
  for (const auto& c : candidates_)
    if (feasible(c, delta) && (!best || c.log_likelihood > best->log_likelihood)) best = &c;
  if (!best) throw NumericError("no feasible candidate for delta = " + std::to_string(delta));
  return *best;
}

FitResult fit_constrained(const Dataset& ds, const FeatureMap& fm, const LabelSpace& ls,
                          double delta, const TrainConfig& cfg) {
  ConstrainedSolver solver(ds, fm, ls, cfg);
  return solver.solve(delta);
}

}  // namespace selfnorm
