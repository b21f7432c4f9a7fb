#include "selfnorm/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "selfnorm/checks.hpp"
#include "selfnorm/config.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/experiments.hpp"
#include "selfnorm/geometry.hpp"
#include "selfnorm/model.hpp"
#include "selfnorm/reports.hpp"
#include "selfnorm/synthetic.hpp"

namespace selfnorm {

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_path;
  int threads = 0;
};

// Writes to --out when given, else to the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ConfigError("cannot open output file " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

RunConfig load_run_config(const GlobalOptions& g) {
  RunConfig cfg = g.config_path.empty() ? parse_config(nlohmann::json::object()) : load_config(g.config_path);
  if (g.seed) cfg.synth.seed = *g.seed;
  return cfg;
}

int thread_count(const GlobalOptions& g, const RunConfig& cfg) {
  return resolve_threads(g.threads > 0 ? g.threads : cfg.threads);
}

Dataset dataset_from(const std::string& data_path, std::optional<double> tau, const RunConfig& cfg) {
  if (!data_path.empty()) return read_jsonl_file(data_path);
  if (!tau) throw ArgumentError("give --data or --tau");
  return generate_synthetic(cfg.synth, *tau);
}

FeatureMap feature_map_for(const Dataset& ds) {
  // Class conjunction over the dataset's own inputs; R is their largest norm.
  double R = 0.0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) R = std::max(R, ds.input(i).norm());
  return FeatureMap::class_conjunction(ds.dim(), ds.num_labels(), R);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-normalized log-linear models: fitting, bounds and experiments", "selfnorm"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "RNG seed (overrides the config)");
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--out", g.out_path, "Output path (default: stdout)");
  app.add_option("--threads", g.threads, "Worker threads; SELFNORM_THREADS overrides")->check(CLI::PositiveNumber);
  app.set_help_all_flag("--help-all");

  double tau = 1.0;
  std::string data_path;

  auto* gen = app.add_subcommand("gen", "Write a synthetic dataset as JSON lines");
  gen->add_option("--tau", tau, "Label temperature")->capture_default_str();

  auto* train = app.add_subcommand("train", "Fit a model and write the FitResult as JSON");
  std::string mode = "mle";
  double alpha = 0.0;
  double delta = 0.1;
  std::optional<double> train_tau;
  train->add_option("--data", data_path, "JSON-lines dataset");
  train->add_option("--tau", train_tau, "Generate a synthetic dataset at this temperature");
  train->add_option("--mode", mode, "mle | penalized | constrained")
      ->check(CLI::IsMember({"mle", "penalized", "constrained"}));
  train->add_option("--alpha", alpha, "Penalty weight for --mode penalized")->check(CLI::NonNegativeNumber);
  train->add_option("--delta", delta, "Constraint level for --mode constrained")->check(CLI::PositiveNumber);

  auto* tradeoff = app.add_subcommand("tradeoff", "Likelihood gap over the delta grid");
  std::optional<double> tradeoff_tau;
  bool suite = false;
  tradeoff->add_option("--data", data_path, "JSON-lines dataset");
  tradeoff->add_option("--tau", tradeoff_tau, "Generate a synthetic dataset at this temperature");
  tradeoff->add_flag("--suite", suite, "Run every temperature of the config's tau grid");

  auto* klsweep = app.add_subcommand("klsweep", "Likelihood gap over the tau grid at fixed delta");
  std::optional<double> sweep_delta;
  klsweep->add_option("--delta", sweep_delta, "Fixed delta (default: config kl_delta)")->check(CLI::PositiveNumber);

  auto* variance = app.add_subcommand("variance", "Hard-construction normalizer-variance report");
  std::vector<int> dims{3, 4, 5, 6};
  std::vector<int> classes{2, 4};
  std::vector<double> alphas{1.0, 5.0, 10.0, 20.0};
  variance->add_option("--dims", dims, "Input dimensions")->check(CLI::Range(2, HypercubeDist::kMaxEnumerationDim));
  variance->add_option("--classes", classes, "Class counts")->check(CLI::Range(2, 1000));
  variance->add_option("--alphas", alphas, "Scales of the construction")->check(CLI::PositiveNumber);

  Box2 box;
  int resolution = 512;
  int refine = 3;
  auto add_grid_options = [&](CLI::App* sub) {
    sub->add_option("--xmin", box.x_min);
    sub->add_option("--xmax", box.x_max);
    sub->add_option("--ymin", box.y_min);
    sub->add_option("--ymax", box.y_max);
    sub->add_option("--resolution", resolution, "Grid nodes per side")->check(CLI::Range(16, 1 << 14));
    sub->add_option("--refine", refine, "False-position refinement steps per vertex")->check(CLI::Range(0, 64));
  };

  auto* levelset = app.add_subcommand("levelset", "Input-space level set {x : A(x, eta) = level}");
  std::vector<double> eta_values{-1.0, 1.0, -1.0, -2.0};
  double level = 0.0;
  levelset->add_option("--eta", eta_values, "Two class vectors, row by row")->expected(4);
  levelset->add_option("--level", level, "Level of A");
  add_grid_options(levelset);

  auto* paramset = app.add_subcommand("paramset", "Parameter contour {eta : E[A^2] = delta^2}");
  double param_delta = 0.5;
  paramset->add_option("--delta", param_delta, "Normalizer level")->check(CLI::NonNegativeNumber);
  add_grid_options(paramset);

  auto* bounds = app.add_subcommand("bounds-check", "Verify every bound; exit 1 on a violation");
  bool skip_synthetic = false;
  bounds->add_flag("--skip-synthetic", skip_synthetic, "Omit the likelihood-gap check on the synthetic suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg_out, msg_err;
    const int code = app.exit(e, msg_out, msg_err);
    out << msg_out.str();
    err << msg_err.str();
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    const RunConfig cfg = load_run_config(g);
    const int threads = thread_count(g, cfg);
    Sink sink(g.out_path, out);
    std::ostream& os = sink.get();

    if (*gen) {
      write_jsonl(generate_synthetic(cfg.synth, tau), os);
    } else if (*train) {
      const Dataset ds = dataset_from(data_path, train_tau, cfg);
      const FeatureMap fm = feature_map_for(ds);
      const LabelSpace ls(ds.num_labels());
      FitResult fit;
      if (mode == "mle") fit = fit_mle(ds, fm, ls, cfg.train);
      else if (mode == "penalized") fit = fit_penalized(ds, fm, ls, alpha, cfg.train);
      else fit = fit_constrained(ds, fm, ls, delta, cfg.train);
      os << fit_result_json(fit).dump(2) << '\n';
    } else if (*tradeoff) {
      if (suite) {
        write_experiment_csv(run_tradeoff_suite(cfg.synth, cfg.train, threads), os);
      } else {
        const Dataset ds = dataset_from(data_path, tradeoff_tau, cfg);
        const bool synthetic = data_path.empty();
        const FeatureMap fm = synthetic ? synthetic_feature_map(cfg.synth) : feature_map_for(ds);
        write_experiment_csv(run_tradeoff(ds, fm, LabelSpace(ds.num_labels()), cfg.synth.delta_grid, cfg.train), os);
      }
    } else if (*klsweep) {
      write_experiment_csv(run_kl_sweep(cfg.synth, cfg.train, sweep_delta.value_or(cfg.kl_delta), threads), os);
    } else if (*variance) {
      write_variance_csv(variance_report(dims, classes, alphas), os);
    } else if (*levelset) {
      const FeatureMap fm = FeatureMap::shared_repeated(
          2, 2, 2, [](const Eigen::VectorXd& x) { return x; },
          std::hypot(std::max(std::abs(box.x_min), std::abs(box.x_max)),
                     std::max(std::abs(box.y_min), std::abs(box.y_max))));
      ParamVector eta(2, 2);
      for (int i = 0; i < 4; ++i) eta.values()(i) = eta_values[static_cast<std::size_t>(i)];
      const ContourSet c = levelset_input_space(eta, fm, LabelSpace(2), box, resolution, level, refine);
      write_contour_csv(c, level, os);
    } else if (*paramset) {
      // T(x, y) = (x + y, -x y), y in {-1, 1}, x uniform on {1, 2}.
      std::vector<Eigen::VectorXd> xs{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 2.0)};
      std::vector<Eigen::MatrixXd> feats;
      double R = 0.0;
      for (const auto& x : xs) {
        Eigen::MatrixXd f(2, 2);
        f << x(0) - 1.0, x(0), x(0) + 1.0, -x(0);
        R = std::max(R, f.rowwise().norm().maxCoeff());
        feats.push_back(f);
      }
      const FeatureMap fm = FeatureMap::tabulated(xs, feats, R);
      InputDistribution dist{Eigen::MatrixXd(2, 1), Eigen::VectorXd::Constant(2, 0.5)};
      dist.points << 1.0, 2.0;
      const ContourSet c = param_feasibility_contour(dist, fm, LabelSpace(2), box, resolution, param_delta, refine);
      write_contour_csv(c, param_delta * param_delta, os);
    } else if (*bounds) {
      const std::vector<BoundCheckRow> rows = run_bound_checks(cfg, threads, !skip_synthetic);
      write_bounds_csv(rows, os);
      std::size_t violations = 0;
      for (const auto& r : rows) violations += r.satisfied ? 0 : 1;
      if (violations > 0) {
        err << violations << " of " << rows.size() << " bound checks violated\n";
        return 1;
      }
    }
    os.flush();
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace selfnorm
