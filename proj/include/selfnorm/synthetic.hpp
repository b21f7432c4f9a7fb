#pragma once

#include <cstdint>
#include <vector>

#include "selfnorm/dataset.hpp"
#include "selfnorm/feature_map.hpp"
#include "selfnorm/param_vector.hpp"

namespace selfnorm {

/// Log-spaced grid of `count` points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

struct SynthConfig {
  int d = 20;       // features besides the constant x_0
  int K = 10;
  int n = 10000;
  int nnz = 5;      // active features per input besides the constant
  std::vector<double> tau_grid = log_grid(0.01, 100.0, 13);
  std::vector<double> delta_grid = log_grid(0.01, 10.0, 12);
  std::uint64_t seed = 0;
  double eta0_scale = 1.0;

  void validate() const;
  std::uint64_t hash() const;
  /// Inputs carry d + 1 coordinates, x_0 first.
  Eigen::Index input_dim() const { return d + 1; }
  /// sup ||T(x, y)|| = ||x|| = sqrt(1 + nnz).
  double radius() const;
};

/// eta_0: (d + 1) x K standard normals times eta0_scale, a function of the seed only.
ParamVector initial_weights(const SynthConfig& cfg);

/// Class-conjunction feature map matching the synthetic inputs.
FeatureMap synthetic_feature_map(const SynthConfig& cfg);

/// n sparse binary inputs (x_0 = 1 plus nnz distinct active coordinates) with
/// labels drawn by inverse CDF from p_{tau eta_0}(. | x). Inputs and the label
/// uniforms depend only on the seed, so datasets at different tau share them.
Dataset generate_synthetic(const SynthConfig& cfg, double tau);

}  // namespace selfnorm
