#include "selfnorm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "selfnorm/errors.hpp"
#include "selfnorm/hash.hpp"
#include "selfnorm/log_sum_exp.hpp"
#include "selfnorm/rng.hpp"

namespace selfnorm {

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw ArgumentError("log grid needs 0 < lo <= hi and count >= 1");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

namespace {

void check_grid(const std::vector<double>& grid, const char* name, bool allow_zero) {
  if (grid.empty()) throw ConfigError(std::string(name) + " must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = grid[i];
    if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0))
      throw ConfigError(std::string(name) + " has an invalid entry");
    if (i > 0 && !(grid[i - 1] < v)) throw ConfigError(std::string(name) + " must be sorted ascending");
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (d < 1 || K < 2 || n < 1) throw ConfigError("need d >= 1, K >= 2 and n >= 1");
  if (nnz < 0 || nnz > d) throw ConfigError("nnz must lie in [0, d]");
  if (!(eta0_scale >= 0.0) || !std::isfinite(eta0_scale)) throw ConfigError("eta0_scale must be >= 0");
  check_grid(tau_grid, "tau_grid", true);
  check_grid(delta_grid, "delta_grid", false);
}

std::uint64_t SynthConfig::hash() const {
  Fnv1a h;
  h.add(std::int64_t{d});
  h.add(std::int64_t{K});
  h.add(std::int64_t{n});
  h.add(std::int64_t{nnz});
  h.add(seed);
  h.add(eta0_scale);
  return h.value();
}

double SynthConfig::radius() const { return std::sqrt(1.0 + nnz); }

ParamVector initial_weights(const SynthConfig& cfg) {
  cfg.validate();
  const CounterRng rng(cfg.seed);
  ParamVector eta(cfg.K, cfg.input_dim());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    eta.values()(i) = cfg.eta0_scale * rng.normal(kStreamInitialWeights, static_cast<std::uint64_t>(i));
  return eta;
}

FeatureMap synthetic_feature_map(const SynthConfig& cfg) {
  return FeatureMap::class_conjunction(cfg.input_dim(), cfg.K, cfg.radius());
}

Dataset generate_synthetic(const SynthConfig& cfg, double tau) {
  cfg.validate();
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ArgumentError("tau must be finite and >= 0");
  const CounterRng rng(cfg.seed);
  const ParamVector eta0 = initial_weights(cfg);
  const auto d = static_cast<std::uint64_t>(cfg.d);

  std::vector<std::pair<SparseEntries, int>> records;
  records.reserve(static_cast<std::size_t>(cfg.n));
  std::vector<int> pool(static_cast<std::size_t>(cfg.d));
  Eigen::VectorXd scores(cfg.K);
  for (int i = 0; i < cfg.n; ++i) {
    // Partial Fisher-Yates over {1, ..., d}.
    std::iota(pool.begin(), pool.end(), 1);
    const std::uint64_t base = static_cast<std::uint64_t>(i) * d;
    for (int t = 0; t < cfg.nnz; ++t) {
      const auto pick = t + static_cast<int>(rng.below(d - static_cast<std::uint64_t>(t), kStreamFeatures,
                                                       base + static_cast<std::uint64_t>(t)));
      std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(pick)]);
    }
    std::vector<int> active(pool.begin(), pool.begin() + cfg.nnz);
    std::sort(active.begin(), active.end());

    SparseEntries x{{0, 1.0}};
    for (int j : active) x.emplace_back(j, 1.0);

    for (int k = 0; k < cfg.K; ++k) {
      double s = eta0(k, 0);
      for (int j : active) s += eta0(k, j);
      scores(k) = tau * s;
    }
    const Eigen::VectorXd p = softmax(scores);
    const double u = rng.uniform(kStreamLabels, static_cast<std::uint64_t>(i));
    int label = cfg.K - 1;
    double cumulative = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
      cumulative += p(k);
      if (u < cumulative) {
        label = k;
        break;
      }
    }
    records.emplace_back(std::move(x), label);
  }
  DatasetProvenance prov{cfg.seed, cfg.hash(), tau, "sparse-binary"};
  return Dataset::from_records(cfg.input_dim(), cfg.K, records, prov);
}

}  // namespace selfnorm
