#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sdpsa/env.hpp"
#include "sdpsa/ocba.hpp"
#include "sdpsa/parallel.hpp"
#include "sdpsa/sdpsa.hpp"

namespace sdpsa {

enum class EnvKind { random_walk, gridworld };
enum class Algorithm { sdpsa, ocba, fixed_n };

/// Invalid experiment settings; the message names the offending fields.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  EnvKind env = EnvKind::random_walk;
  int rw_states = 19;
  GridworldSpec grid;
  Algorithm algo = Algorithm::sdpsa;
  double alpha = 0.4;
  double n0 = 16.0;
  double delta = 0.3;
  // Slow step: nu for the first nu_hold fraction of iterations, then decays by
  // nu_decay per iteration down to nu * nu_floor.
  double nu = 0.1;
  double nu_hold = 0.2;
  double nu_decay = 0.999;
  double nu_floor = 0.1;
  std::uint64_t iterations = 20'000;
  std::uint64_t episodes_per_update = 10;
  int L = 16;
  std::uint64_t seed = 1;
  std::string out;
  bool timing = false;
  ErrorTiming error_timing = ErrorTiming::before_update;
};

inline constexpr int kPresetCount = 9;
inline constexpr std::uint64_t kRandomWalkIterations = 20'000;
inline constexpr std::uint64_t kGridworldIterations = 5'000;

/// Experiments #1..#9: alpha in {0.6, 0.4, 0.2} with three starting n each.
ExperimentConfig preset(int id, EnvKind env = EnvKind::random_walk);

void validate(const ExperimentConfig& cfg);

/// Flat JSON; keys absent from `j` keep the value from `base`. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json to_json(const ExperimentConfig& cfg);

std::string to_string(EnvKind kind);
std::string to_string(Algorithm algo);
EnvKind parse_env(const std::string& name);

struct Workload {
  Environment env;
  Policy policy;
};

Workload make_workload(const ExperimentConfig& cfg);
SdpsaConfig make_sdpsa_config(const ExperimentConfig& cfg);

struct Summary {
  int converged_n = 1;
  double tail_rmse = 0.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

struct ExperimentResult {
  Summary summary;
  std::vector<RunRecord> trace;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);
/// Runs and writes the trace CSV to `csv`.
Summary run_experiment(const ExperimentConfig& cfg, std::ostream& csv);

inline constexpr const char* kTraceHeader = "m,n_cont,n_proj,Y,rmse,episodes,ms";

void write_trace_csv(std::ostream& out, std::span<const RunRecord> trace);
/// Parses a file written by write_trace_csv; throws std::runtime_error on malformed input.
std::vector<RunRecord> read_trace_csv(std::istream& in);

struct SweepConfig {
  double alpha = 0.4;
  int L = 16;
  std::uint64_t episodes = 2'000;
  std::uint64_t block = 10;
  double tail_fraction = 0.5;
  std::uint64_t seed = 1;
  ErrorTiming timing = ErrorTiming::before_update;
};

struct SweepPoint {
  int n = 1;
  double alpha = 0.0;
  double rmse = 0.0;
};

/// Fixed-n TD for every n in {1..L}; rmse is the mean block RMSE over the tail.
std::vector<SweepPoint> sweep_n(const Environment& env, const Policy& policy, const SweepConfig& cfg,
                                Execution exec = Execution::parallel);
int sweep_argmin(std::span<const SweepPoint> sweep);
bool is_monotone(std::span<const SweepPoint> sweep);
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> sweep);

struct BudgetPoint {
  std::uint64_t budget = 0;
  double rmse = 0.0;
};

struct CompareRun {
  std::uint64_t seed = 0;
  int sdpsa_n = 1;
  int ocba_n = 1;
  double sdpsa_rmse = 0.0;
  double ocba_rmse = 0.0;
  std::vector<BudgetPoint> sdpsa_curve;
  std::vector<BudgetPoint> ocba_curve;
};

struct CompareResult {
  std::vector<CompareRun> runs;
};

/**
 * SDPSA and OCBA under the same episode budget. Both curves are sampled at
 * OCBA's round boundaries; the SDPSA value at a budget is the tail RMSE of its
 * trace up to that point.
 */
CompareResult compare_budget(const ExperimentConfig& base, std::uint64_t budget,
                             std::span<const std::uint64_t> seeds,
                             Execution exec = Execution::parallel);
/// CSV `budget,algo,rmse` with the mean over seeds at each budget.
void write_compare_csv(std::ostream& out, const CompareResult& result);

struct ReplicateSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<Summary> runs;
  int modal_n = 1;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;

  nlohmann::json to_json() const;
};

std::vector<std::uint64_t> replicate_seeds(std::uint64_t base, std::size_t count);
ReplicateSummary replicate(const ExperimentConfig& cfg, std::size_t num_seeds,
                           Execution exec = Execution::parallel);

}  // namespace sdpsa
