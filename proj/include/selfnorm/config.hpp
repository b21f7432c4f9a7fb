#pragma once

#include <string>

#include "json.hpp"

#include "selfnorm/estimation.hpp"
#include "selfnorm/synthetic.hpp"

namespace selfnorm {

/// Everything a run reads from its JSON config document.
struct RunConfig {
  SynthConfig synth;
  TrainConfig train;
  /// Fixed delta of the KL sweep.
  double kl_delta = 0.1;
  int threads = 1;

  void validate() const;
};

/// Parses {"synth": {...}, "train": {...}, "kl_delta": x, "threads": n}.
/// Missing keys keep their defaults; unknown keys and bad values raise
/// ConfigError. Grids are arrays or {"min", "max", "count"} (log-spaced).
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace selfnorm
