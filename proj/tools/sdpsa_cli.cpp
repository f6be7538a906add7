#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "sdpsa/harness.hpp"

using namespace sdpsa;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> episodes_per_update;
  std::optional<std::uint64_t> iters;
  std::optional<double> delta;
  std::optional<double> nu;
  std::optional<int> L;
  std::optional<double> alpha;

  void add_to(CLI::App* app) {
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--out", out, "Output CSV path");
    app->add_option("--episodes-per-update", episodes_per_update, "Episodes per slow iteration");
    app->add_option("--iters", iters, "Slow iterations");
    app->add_option("--delta", delta, "Perturbation size");
    app->add_option("--nu", nu, "Initial slow step");
    app->add_option("--L", L, "Largest n");
  }

  void apply(ExperimentConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (episodes_per_update) cfg.episodes_per_update = *episodes_per_update;
    if (iters) cfg.iterations = *iters;
    if (delta) cfg.delta = *delta;
    if (nu) cfg.nu = *nu;
    if (L) cfg.L = *L;
    if (alpha) cfg.alpha = *alpha;
  }
};

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j);
}

// Writes to the path, or to stdout when the path is empty or "-".
template <class Write>
void emit(const std::string& path, Write&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write(f);
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lookahead search for n-step TD"};
  app.require_subcommand(1);

  Overrides common;
  std::string env_name = "rw";

  auto* run = app.add_subcommand("run", "Run one experiment; CSV to --out, summary JSON to stdout");
  int preset_id = 0;
  std::string config_path;
  std::string algo_name;
  auto* preset_opt = run->add_option("--preset", preset_id, "Preset 1..9")->check(CLI::Range(1, 9));
  auto* config_opt = run->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  preset_opt->excludes(config_opt);
  run->add_option("--env", env_name, "rw or gw (with --preset)");
  run->add_option("--algo", algo_name, "sdpsa, ocba or fixed-n");
  run->add_option("--alpha", common.alpha, "TD step size");
  common.add_to(run);

  auto* sweep = app.add_subcommand("sweep", "Fixed-n RMSE for n = 1..n-max; CSV n,alpha,rmse");
  SweepConfig sweep_cfg;
  sweep->add_option("--env", env_name, "rw or gw");
  sweep->add_option("--alpha", sweep_cfg.alpha, "TD step size")->required();
  sweep->add_option("--n-max", sweep_cfg.L, "Largest n")->check(CLI::PositiveNumber);
  sweep->add_option("--episodes", sweep_cfg.episodes, "Episodes per n");
  sweep->add_option("--episodes-per-update", sweep_cfg.block, "Episodes per RMSE block");
  sweep->add_option("--seed", sweep_cfg.seed, "Master seed");
  std::string sweep_out;
  sweep->add_option("--out", sweep_out, "Output CSV path (default stdout)");

  auto* compare = app.add_subcommand("compare", "SDPSA vs OCBA at equal budget; CSV budget,algo,rmse");
  std::uint64_t budget = 50'000;
  std::size_t compare_seeds = 1;
  compare->add_option("--env", env_name, "rw or gw");
  compare->add_option("--alpha", common.alpha, "TD step size")->required();
  compare->add_option("--budget", budget, "Episode budget per algorithm");
  compare->add_option("--seeds", compare_seeds, "Number of seeds")->check(CLI::PositiveNumber);
  common.add_to(compare);

  auto* rep = app.add_subcommand("replicate", "Preset over several seeds; aggregate JSON to stdout");
  std::size_t num_seeds = 10;
  rep->add_option("--preset", preset_id, "Preset 1..9")->required()->check(CLI::Range(1, 9));
  rep->add_option("--seeds", num_seeds, "Number of seeds")->check(CLI::PositiveNumber);
  rep->add_option("--env", env_name, "rw or gw");
  common.add_to(rep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!preset_opt->count() && !config_opt->count()) throw ConfigError("run: need --preset or --config");
      ExperimentConfig cfg = config_opt->count() ? load_config(config_path)
                                                 : preset(preset_id, parse_env(env_name));
      if (!algo_name.empty()) cfg = config_from_json(nlohmann::json{{"algo", algo_name}}, cfg);
      common.apply(cfg);
      validate(cfg);
      Summary s;
      if (cfg.out.empty()) {
        s = run_experiment(cfg).summary;
      } else {
        std::ofstream f(cfg.out);
        if (!f) throw std::runtime_error("cannot write " + cfg.out);
        s = run_experiment(cfg, f);
        if (!f) throw std::runtime_error("write failed: " + cfg.out);
      }
      std::cout << s.to_json().dump() << '\n';
    } else if (sweep->parsed()) {
      ExperimentConfig cfg;
      cfg.env = parse_env(env_name);
      const Workload w = make_workload(cfg);
      const auto points = sweep_n(w.env, w.policy, sweep_cfg);
      emit(sweep_out, [&](std::ostream& os) { write_sweep_csv(os, points); });
    } else if (compare->parsed()) {
      ExperimentConfig cfg = preset(1, parse_env(env_name));
      common.apply(cfg);
      const auto seeds = replicate_seeds(cfg.seed, compare_seeds);
      const CompareResult result = compare_budget(cfg, budget, seeds);
      emit(cfg.out, [&](std::ostream& os) { write_compare_csv(os, result); });
      for (const auto& r : result.runs)
        std::cerr << nlohmann::json{{"seed", r.seed},
                                    {"sdpsa_n", r.sdpsa_n},
                                    {"sdpsa_rmse", r.sdpsa_rmse},
                                    {"ocba_n", r.ocba_n},
                                    {"ocba_rmse", r.ocba_rmse}}
                         .dump()
                  << '\n';
    } else if (rep->parsed()) {
      ExperimentConfig cfg = preset(preset_id, parse_env(env_name));
      common.apply(cfg);
      const ReplicateSummary summary = replicate(cfg, num_seeds);
      std::cout << summary.to_json().dump() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
