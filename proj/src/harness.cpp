#include "sdpsa/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace sdpsa {

// ---- presets and configuration ------------------------------------------------

ExperimentConfig preset(int id, EnvKind env) {
  struct Row {
    double alpha;
    double n0;
  };
  static constexpr Row kTable[kPresetCount] = {{0.6, 16}, {0.6, 8}, {0.6, 4},  {0.4, 16}, {0.4, 8},
                                               {0.4, 2},  {0.2, 16}, {0.2, 4}, {0.2, 2}};
  if (id < 1 || id > kPresetCount) throw ConfigError("preset: expected 1..9, got " + std::to_string(id));
  ExperimentConfig cfg;
  cfg.env = env;
  cfg.alpha = kTable[id - 1].alpha;
  cfg.n0 = kTable[id - 1].n0;
  cfg.iterations = env == EnvKind::random_walk ? kRandomWalkIterations : kGridworldIterations;
  cfg.seed = static_cast<std::uint64_t>(id);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  std::vector<std::string> bad;
  if (cfg.L < 2) bad.push_back("L (must be >= 2)");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) bad.push_back("alpha (must lie in (0, 1])");
  if (!(cfg.n0 >= 1.0 && cfg.n0 <= cfg.L)) bad.push_back("n0 (must lie in [1, L])");
  if (!(cfg.delta > 0.0)) bad.push_back("delta (must be positive)");
  if (!(cfg.nu >= 0.0)) bad.push_back("nu (must be nonnegative)");
  if (cfg.algo == Algorithm::sdpsa && !(cfg.nu < cfg.alpha)) bad.push_back("nu (must be below alpha)");
  if (!(cfg.nu_hold >= 0.0 && cfg.nu_hold <= 1.0)) bad.push_back("nu_hold (must lie in [0, 1])");
  if (!(cfg.nu_decay > 0.0 && cfg.nu_decay <= 1.0)) bad.push_back("nu_decay (must lie in (0, 1])");
  if (!(cfg.nu_floor >= 0.0 && cfg.nu_floor <= 1.0)) bad.push_back("nu_floor (must lie in [0, 1])");
  if (cfg.episodes_per_update == 0) bad.push_back("episodes_per_update (must be positive)");
  if (cfg.env == EnvKind::random_walk && (cfg.rw_states < 3 || cfg.rw_states % 2 == 0))
    bad.push_back("rw_states (must be odd and >= 3)");
  if (cfg.env == EnvKind::gridworld) {
    if (cfg.grid.width <= 0 || cfg.grid.height <= 0) bad.push_back("grid_width/grid_height");
    if (cfg.grid.goal.x < 0 || cfg.grid.goal.x >= cfg.grid.width || cfg.grid.goal.y < 0 ||
        cfg.grid.goal.y >= cfg.grid.height)
      bad.push_back("goal_x/goal_y (outside grid)");
    if (!(cfg.grid.discount > 0.0 && cfg.grid.discount <= 1.0)) bad.push_back("gamma (must lie in (0, 1])");
    if (cfg.grid.max_episode_steps == 0) bad.push_back("max_episode_steps");
  }
  if (!bad.empty()) {
    std::string msg = "invalid config:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
  }
}

std::string to_string(EnvKind kind) { return kind == EnvKind::random_walk ? "rw" : "gw"; }

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::sdpsa:
      return "sdpsa";
    case Algorithm::ocba:
      return "ocba";
    case Algorithm::fixed_n:
      return "fixed-n";
  }
  return "sdpsa";
}

EnvKind parse_env(const std::string& name) {
  if (name == "rw") return EnvKind::random_walk;
  if (name == "gw") return EnvKind::gridworld;
  throw ConfigError("env: expected rw or gw, got '" + name + "'");
}

namespace {

Algorithm parse_algo(const std::string& name) {
  if (name == "sdpsa") return Algorithm::sdpsa;
  if (name == "ocba") return Algorithm::ocba;
  if (name == "fixed-n") return Algorithm::fixed_n;
  throw ConfigError("algo: expected sdpsa, ocba or fixed-n, got '" + name + "'");
}

ErrorTiming parse_timing(const std::string& name) {
  if (name == "before") return ErrorTiming::before_update;
  if (name == "after") return ErrorTiming::after_update;
  throw ConfigError("g_timing: expected before or after, got '" + name + "'");
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig cfg) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kKeys = {
      "env",   "rw_states", "grid_width", "grid_height", "goal_x", "goal_y", "step_reward",
      "goal_reward", "gamma", "max_episode_steps", "algo", "alpha", "n0", "delta", "nu", "nu_hold",
      "nu_decay", "nu_floor", "iterations", "episodes_per_update", "L", "seed", "out", "timing",
      "g_timing"};
  for (const auto& [key, value] : j.items())
    if (!kKeys.count(key)) throw ConfigError("unknown config field '" + key + "'");

  std::string text;
  if (j.contains("env")) {
    read_field(j, "env", text);
    cfg.env = parse_env(text);
  }
  if (j.contains("algo")) {
    read_field(j, "algo", text);
    cfg.algo = parse_algo(text);
  }
  if (j.contains("g_timing")) {
    read_field(j, "g_timing", text);
    cfg.error_timing = parse_timing(text);
  }
  read_field(j, "rw_states", cfg.rw_states);
  read_field(j, "grid_width", cfg.grid.width);
  read_field(j, "grid_height", cfg.grid.height);
  read_field(j, "goal_x", cfg.grid.goal.x);
  read_field(j, "goal_y", cfg.grid.goal.y);
  read_field(j, "step_reward", cfg.grid.step_reward);
  read_field(j, "goal_reward", cfg.grid.goal_reward);
  read_field(j, "gamma", cfg.grid.discount);
  read_field(j, "max_episode_steps", cfg.grid.max_episode_steps);
  read_field(j, "alpha", cfg.alpha);
  read_field(j, "n0", cfg.n0);
  read_field(j, "delta", cfg.delta);
  read_field(j, "nu", cfg.nu);
  read_field(j, "nu_hold", cfg.nu_hold);
  read_field(j, "nu_decay", cfg.nu_decay);
  read_field(j, "nu_floor", cfg.nu_floor);
  read_field(j, "iterations", cfg.iterations);
  read_field(j, "episodes_per_update", cfg.episodes_per_update);
  read_field(j, "L", cfg.L);
  read_field(j, "seed", cfg.seed);
  read_field(j, "out", cfg.out);
  read_field(j, "timing", cfg.timing);
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return {{"env", to_string(cfg.env)},
          {"rw_states", cfg.rw_states},
          {"grid_width", cfg.grid.width},
          {"grid_height", cfg.grid.height},
          {"goal_x", cfg.grid.goal.x},
          {"goal_y", cfg.grid.goal.y},
          {"step_reward", cfg.grid.step_reward},
          {"goal_reward", cfg.grid.goal_reward},
          {"gamma", cfg.grid.discount},
          {"max_episode_steps", cfg.grid.max_episode_steps},
          {"algo", to_string(cfg.algo)},
          {"alpha", cfg.alpha},
          {"n0", cfg.n0},
          {"delta", cfg.delta},
          {"nu", cfg.nu},
          {"nu_hold", cfg.nu_hold},
          {"nu_decay", cfg.nu_decay},
          {"nu_floor", cfg.nu_floor},
          {"iterations", cfg.iterations},
          {"episodes_per_update", cfg.episodes_per_update},
          {"L", cfg.L},
          {"seed", cfg.seed},
          {"out", cfg.out},
          {"timing", cfg.timing},
          {"g_timing", cfg.error_timing == ErrorTiming::before_update ? "before" : "after"}};
}

Workload make_workload(const ExperimentConfig& cfg) {
  if (cfg.env == EnvKind::random_walk) {
    Environment env = make_random_walk(cfg.rw_states);
    Policy policy = uniform_policy(env);
    return {std::move(env), std::move(policy)};
  }
  Environment env = make_gridworld(cfg.grid);
  Policy policy = uniform_policy(env);
  return {std::move(env), std::move(policy)};
}

SdpsaConfig make_sdpsa_config(const ExperimentConfig& cfg) {
  SdpsaConfig s;
  s.domain = ParameterDomain(cfg.L);
  s.delta = cfg.delta;
  const auto hold = static_cast<std::uint64_t>(cfg.nu_hold * static_cast<double>(cfg.iterations));
  s.slow = cfg.nu > 0.0 ? Schedule::hold_decay(cfg.nu, hold, cfg.nu_decay, cfg.nu * cfg.nu_floor)
                        : Schedule::constant(0.0);
  s.fast = Schedule::constant(cfg.alpha);
  s.n0 = cfg.n0;
  s.slow_iterations = cfg.iterations;
  s.episodes_per_update = cfg.episodes_per_update;
  s.timing = cfg.error_timing;
  return s;
}

// ---- single experiments -------------------------------------------------------

nlohmann::json Summary::to_json() const {
  return {{"converged_n", converged_n}, {"tail_rmse", tail_rmse}, {"seed", seed}};
}

namespace {

ExperimentResult run_fixed_n(const ExperimentConfig& cfg, const Workload& w) {
  SdpsaConfig scfg = make_sdpsa_config(cfg);
  const int n = static_cast<int>(std::lround(cfg.n0));
  SdpsaState state = SdpsaState::initial(scfg, w.env.state_count());
  state.n_cont = n;
  if (cfg.timing) state.clock_start = std::chrono::steady_clock::now();
  TdBlockSampler sampler(w.env, w.policy, cfg.episodes_per_update, cfg.error_timing,
                         make_rng(cfg.seed, Stream::episodes));
  for (std::uint64_t m = 0; m < cfg.iterations; ++m) {
    const BlockResult block = sampler(n, cfg.alpha, state);
    state.episodes += block.episodes;
    RunRecord r{m, static_cast<double>(n), n, state.tracker, rmse(block.cost), state.episodes, 0.0};
    if (state.clock_start)
      r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                       *state.clock_start)
                 .count();
    state.trace.push_back(r);
  }
  ExperimentResult result;
  result.summary.seed = cfg.seed;
  result.summary.converged_n = n;
  if (!state.trace.empty()) result.summary.tail_rmse = summarize_tail(state.trace).tail_rmse;
  result.trace = std::move(state.trace);
  return result;
}

ExperimentResult run_ocba_experiment(const ExperimentConfig& cfg, const Workload& w) {
  OcbaConfig ocfg;
  ocfg.domain = ParameterDomain(cfg.L);
  ocfg.alpha = cfg.alpha;
  ocfg.block = cfg.episodes_per_update;
  ocfg.total_budget = cfg.iterations * cfg.episodes_per_update;
  ocfg.round_blocks = static_cast<std::uint64_t>(cfg.L);
  ocfg.timing = cfg.error_timing;
  const OcbaResult ocba = run_ocba(w.env, w.policy, ocfg, cfg.seed);
  ExperimentResult result;
  result.summary = {ocba.best_n, ocba.best_rmse, cfg.seed};
  for (std::size_t i = 0; i < ocba.trace.size(); ++i) {
    const auto& p = ocba.trace[i];
    result.trace.push_back({i, static_cast<double>(p.best_n), p.best_n, p.best_rmse * p.best_rmse,
                            p.best_rmse, p.episodes, 0.0});
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const Workload w = make_workload(cfg);
  switch (cfg.algo) {
    case Algorithm::fixed_n:
      return run_fixed_n(cfg, w);
    case Algorithm::ocba:
      return run_ocba_experiment(cfg, w);
    case Algorithm::sdpsa:
      break;
  }
  SdpsaResult r = run_sdpsa(make_sdpsa_config(cfg), w.env, w.policy, cfg.seed, cfg.timing);
  return {{r.converged_n, r.tail_rmse, cfg.seed}, std::move(r.trace)};
}

Summary run_experiment(const ExperimentConfig& cfg, std::ostream& csv) {
  ExperimentResult result = run_experiment(cfg);
  write_trace_csv(csv, result.trace);
  return result.summary;
}

// ---- CSV ----------------------------------------------------------------------

void write_trace_csv(std::ostream& out, std::span<const RunRecord> trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace)
    out << fmt::format("{},{},{},{},{},{},{}\n", r.m, r.n_cont, r.n_proj, r.tracker, r.rmse,
                       r.episodes, r.ms);
}

namespace {

template <class T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::runtime_error("bad number '" + std::string(field) + "' on line " +
                             std::to_string(line));
  return value;
}

}  // namespace

std::vector<RunRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw std::runtime_error("missing trace header");
  std::vector<RunRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      f.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    f.push_back(rest);
    if (f.size() != 7) throw std::runtime_error("expected 7 fields on line " + std::to_string(line_no));
    RunRecord r;
    r.m = parse_number<std::uint64_t>(f[0], line_no);
    r.n_cont = parse_number<double>(f[1], line_no);
    r.n_proj = parse_number<int>(f[2], line_no);
    r.tracker = parse_number<double>(f[3], line_no);
    r.rmse = parse_number<double>(f[4], line_no);
    r.episodes = parse_number<std::uint64_t>(f[5], line_no);
    r.ms = parse_number<double>(f[6], line_no);
    out.push_back(r);
  }
  return out;
}

// ---- sweeps -------------------------------------------------------------------

std::vector<SweepPoint> sweep_n(const Environment& env, const Policy& policy, const SweepConfig& cfg,
                                Execution exec) {
  if (cfg.L < 1) throw std::invalid_argument("sweep needs L >= 1");
  if (cfg.block == 0) throw std::invalid_argument("sweep block must be positive");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  const auto count = static_cast<std::size_t>(cfg.L);
  std::vector<SweepPoint> points(count);
  const EpisodeSampler sampler(env, policy);

  for_each_index(count, exec, [&](std::size_t i) {
    const int n = static_cast<int>(i) + 1;
    Rng rng = make_rng(cfg.seed, Stream::episodes, i + 1);
    std::vector<double> values(env.state_count(), 0.0);
    NStepEpisode episode(n, env.discount(), cfg.timing);
    const std::uint64_t blocks = cfg.episodes / cfg.block;
    const auto tail_start =
        blocks - std::min<std::uint64_t>(
                     blocks, static_cast<std::uint64_t>(std::ceil(cfg.tail_fraction * blocks)));
    double tail_sum = 0.0;
    std::uint64_t tail_count = 0;
    for (std::uint64_t b = 0; b < blocks; ++b) {
      BlockCost cost{cfg.alpha};
      auto sink = [&](StateId, double, double g) { cost.add(g); };
      for (std::uint64_t e = 0; e < cfg.block; ++e)
        run_td_episode(sampler, episode, values, cfg.alpha, rng, sink);
      if (b >= tail_start) {
        tail_sum += rmse(cost.mean());
        ++tail_count;
      }
    }
    points[i] = {n, cfg.alpha, tail_count ? tail_sum / static_cast<double>(tail_count) : 0.0};
  });
  return points;
}

int sweep_argmin(std::span<const SweepPoint> sweep) {
  if (sweep.empty()) throw std::invalid_argument("empty sweep");
  return std::min_element(sweep.begin(), sweep.end(),
                          [](const SweepPoint& a, const SweepPoint& b) { return a.rmse < b.rmse; })
      ->n;
}

bool is_monotone(std::span<const SweepPoint> sweep) {
  bool up = true;
  bool down = true;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (sweep[i].rmse < sweep[i - 1].rmse) up = false;
    if (sweep[i].rmse > sweep[i - 1].rmse) down = false;
  }
  return up || down;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> sweep) {
  out << "n,alpha,rmse\n";
  for (const auto& p : sweep) out << fmt::format("{},{},{}\n", p.n, p.alpha, p.rmse);
}

// ---- SDPSA vs OCBA --------------------------------------------------------------

CompareResult compare_budget(const ExperimentConfig& base, std::uint64_t budget,
                             std::span<const std::uint64_t> seeds, Execution exec) {
  validate(base);
  CompareResult result;
  result.runs.resize(seeds.size());
  if (budget == 0) {
    for (std::size_t i = 0; i < seeds.size(); ++i) result.runs[i].seed = seeds[i];
    return result;
  }
  if (budget % base.episodes_per_update != 0)
    throw ConfigError("budget: must be a multiple of episodes_per_update");
  const Workload w = make_workload(base);

  for_each_index(seeds.size(), exec, [&](std::size_t i) {
    CompareRun& run = result.runs[i];
    run.seed = seeds[i];

    OcbaConfig ocfg;
    ocfg.domain = ParameterDomain(base.L);
    ocfg.alpha = base.alpha;
    ocfg.total_budget = budget;
    ocfg.block = base.episodes_per_update;
    ocfg.round_blocks = static_cast<std::uint64_t>(base.L);
    ocfg.timing = base.error_timing;
    // Nested regions stay serial; the outer loop over seeds carries the parallelism.
    const OcbaResult ocba = run_ocba(w.env, w.policy, ocfg, seeds[i], Execution::serial);

    ExperimentConfig scfg = base;
    scfg.iterations = budget / base.episodes_per_update;
    const SdpsaResult sdpsa = run_sdpsa(make_sdpsa_config(scfg), w.env, w.policy, seeds[i]);

    run.ocba_n = ocba.best_n;
    run.ocba_rmse = ocba.best_rmse;
    run.sdpsa_n = sdpsa.converged_n;
    run.sdpsa_rmse = sdpsa.tail_rmse;
    for (const auto& p : ocba.trace) {
      run.ocba_curve.push_back({p.episodes, p.best_rmse});
      const auto upto = static_cast<std::size_t>(p.episodes / base.episodes_per_update);
      const auto prefix = std::span<const RunRecord>(sdpsa.trace).first(upto);
      run.sdpsa_curve.push_back({p.episodes, summarize_tail(prefix).tail_rmse});
    }
  });
  return result;
}

void write_compare_csv(std::ostream& out, const CompareResult& result) {
  out << "budget,algo,rmse\n";
  if (result.runs.empty()) return;
  const auto emit = [&](const char* algo, auto curve_of) {
    std::map<std::uint64_t, std::pair<double, std::size_t>> acc;
    for (const auto& run : result.runs)
      for (const auto& p : curve_of(run)) {
        auto& [sum, count] = acc[p.budget];
        sum += p.rmse;
        ++count;
      }
    for (const auto& [budget, sc] : acc)
      out << fmt::format("{},{},{}\n", budget, algo, sc.first / static_cast<double>(sc.second));
  };
  emit("sdpsa", [](const CompareRun& r) -> const std::vector<BudgetPoint>& { return r.sdpsa_curve; });
  emit("ocba", [](const CompareRun& r) -> const std::vector<BudgetPoint>& { return r.ocba_curve; });
}

// ---- replications ---------------------------------------------------------------

nlohmann::json ReplicateSummary::to_json() const {
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& r : runs) per_seed.push_back(r.to_json());
  return {{"runs", per_seed}, {"modal_n", modal_n}, {"rmse_mean", rmse_mean}, {"rmse_std", rmse_std}};
}

std::vector<std::uint64_t> replicate_seeds(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = base + i;
  return seeds;
}

ReplicateSummary replicate(const ExperimentConfig& cfg, std::size_t num_seeds, Execution exec) {
  if (num_seeds == 0) throw ConfigError("seeds: need at least one replication");
  validate(cfg);
  ReplicateSummary summary;
  summary.seeds = replicate_seeds(cfg.seed, num_seeds);
  summary.runs.resize(num_seeds);
  for_each_index(num_seeds, exec, [&](std::size_t i) {
    ExperimentConfig c = cfg;
    c.seed = summary.seeds[i];
    c.timing = false;
    summary.runs[i] = run_experiment(c).summary;
  });

  std::map<int, std::size_t> votes;
  double sum = 0.0;
  for (const auto& r : summary.runs) {
    ++votes[r.converged_n];
    sum += r.tail_rmse;
  }
  std::size_t best = 0;
  for (const auto& [n, c] : votes)
    if (c > best) {
      best = c;
      summary.modal_n = n;
    }
  const auto count = static_cast<double>(num_seeds);
  summary.rmse_mean = sum / count;
  double sq = 0.0;
  for (const auto& r : summary.runs) sq += (r.tail_rmse - summary.rmse_mean) * (r.tail_rmse - summary.rmse_mean);
  summary.rmse_std = num_seeds > 1 ? std::sqrt(sq / (count - 1.0)) : 0.0;
  return summary;
}

}  // namespace sdpsa
