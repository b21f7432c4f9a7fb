#include "selfnorm/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "selfnorm/errors.hpp"

namespace selfnorm {

using nlohmann::json;

void RunConfig::validate() const {
  synth.validate();
  train.validate();
  if (!(kl_delta > 0.0)) throw ConfigError("kl_delta must be positive");
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items())
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

template <typename T>
void read_optional(const json& obj, const char* key, std::optional<T>& out, const std::string& where) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
    return;
  }
  T value{};
  read(obj, key, value, where);
  out = value;
}

std::vector<double> read_grid(const json& value, const std::string& where) {
  if (value.is_array()) {
    try {
      return value.get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ConfigError(where + " must contain numbers");
    }
  }
  reject_unknown(value, {"min", "max", "count"}, where);
  if (!value.contains("min") || !value.contains("max") || !value.contains("count"))
    throw ConfigError(where + " needs min, max and count");
  double lo = 0.0, hi = 0.0;
  int count = 0;
  read(value, "min", lo, where);
  read(value, "max", hi, where);
  read(value, "count", count, where);
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw ConfigError(where + " is not a valid log grid");
  return log_grid(lo, hi, count);
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  reject_unknown(doc, {"synth", "train", "kl_delta", "threads"}, "config");
  if (doc.contains("synth")) {
    const json& s = doc.at("synth");
    reject_unknown(s, {"d", "K", "n", "nnz", "tau_grid", "delta_grid", "seed", "eta0_scale"}, "synth");
    read(s, "d", cfg.synth.d, "synth");
    read(s, "K", cfg.synth.K, "synth");
    read(s, "n", cfg.synth.n, "synth");
    read(s, "nnz", cfg.synth.nnz, "synth");
    read(s, "seed", cfg.synth.seed, "synth");
    read(s, "eta0_scale", cfg.synth.eta0_scale, "synth");
    if (s.contains("tau_grid")) cfg.synth.tau_grid = read_grid(s.at("tau_grid"), "synth.tau_grid");
    if (s.contains("delta_grid")) cfg.synth.delta_grid = read_grid(s.at("delta_grid"), "synth.delta_grid");
  }
  if (doc.contains("train")) {
    const json& t = doc.at("train");
    reject_unknown(t,
                   {"max_iterations", "gradient_tolerance", "shrink", "sufficient_decrease",
                    "history_size", "B", "ridge", "center", "constraint_tolerance",
                    "log10_alpha_min", "log10_alpha_max", "max_bisection"},
                   "train");
    TrainConfig& c = cfg.train;
    read(t, "max_iterations", c.max_iterations, "train");
    read(t, "gradient_tolerance", c.gradient_tolerance, "train");
    read(t, "shrink", c.shrink, "train");
    read(t, "sufficient_decrease", c.sufficient_decrease, "train");
    read(t, "history_size", c.history_size, "train");
    read_optional(t, "B", c.B, "train");
    read(t, "ridge", c.ridge, "train");
    read(t, "center", c.center, "train");
    read(t, "constraint_tolerance", c.constraint_tolerance, "train");
    read(t, "log10_alpha_min", c.log10_alpha_min, "train");
    read(t, "log10_alpha_max", c.log10_alpha_max, "train");
    read(t, "max_bisection", c.max_bisection, "train");
  }
  read(doc, "kl_delta", cfg.kl_delta, "config");
  read(doc, "threads", cfg.threads, "config");
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  const SynthConfig& s = cfg.synth;
  const TrainConfig& t = cfg.train;
  json train = {{"max_iterations", t.max_iterations},
                {"gradient_tolerance", t.gradient_tolerance},
                {"shrink", t.shrink},
                {"sufficient_decrease", t.sufficient_decrease},
                {"history_size", t.history_size},
                {"B", t.B ? json(*t.B) : json(nullptr)},
                {"ridge", t.ridge},
                {"center", t.center},
                {"constraint_tolerance", t.constraint_tolerance},
                {"log10_alpha_min", t.log10_alpha_min},
                {"log10_alpha_max", t.log10_alpha_max},
                {"max_bisection", t.max_bisection}};
  return {{"synth",
           {{"d", s.d},
            {"K", s.K},
            {"n", s.n},
            {"nnz", s.nnz},
            {"tau_grid", s.tau_grid},
            {"delta_grid", s.delta_grid},
            {"seed", s.seed},
            {"eta0_scale", s.eta0_scale}}},
          {"train", train},
          {"kl_delta", cfg.kl_delta},
          {"threads", cfg.threads}};
}

}  // namespace selfnorm
