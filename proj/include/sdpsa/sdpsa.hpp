#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sdpsa/env.hpp"
#include "sdpsa/projection.hpp"
#include "sdpsa/schedule.hpp"
#include "sdpsa/td.hpp"

namespace sdpsa {

/**
 * Settings for the two-timescale search over the lookahead n.
 *
 * `slow` drives the parameter iterate (a_m, or nu in constant-step runs),
 * `fast` drives both the value table and the average-cost tracker (b_m, or the
 * TD step alpha). Both are indexed by the slow iteration m.
 */
struct SdpsaConfig {
  ParameterDomain domain{16};
  double delta = 0.3;
  Schedule slow = Schedule::constant(0.1);
  Schedule fast = Schedule::constant(0.4);
  double n0 = 16.0;
  std::uint64_t slow_iterations = 20'000;
  std::uint64_t episodes_per_update = 10;
  ErrorTiming timing = ErrorTiming::before_update;

  void validate() const;
};

/// One slow iteration of a search run, also the CSV row format.
struct RunRecord {
  std::uint64_t m = 0;
  double n_cont = 0.0;  // iterate after the slow step
  int n_proj = 1;       // integer lookahead simulated in this iteration
  double tracker = 0.0; // average-cost tracker Y after the block
  double rmse = 0.0;    // sqrt of the block's mean squared TD error
  std::uint64_t episodes = 0;  // cumulative
  double ms = 0.0;

  bool operator==(const RunRecord&) const = default;
};

struct SdpsaState {
  std::uint64_t m = 0;
  double n_cont = 1.0;
  double tracker = 0.0;
  TdState td;
  std::uint64_t episodes = 0;
  std::vector<RunRecord> trace;
  std::optional<std::chrono::steady_clock::time_point> clock_start;

  static SdpsaState initial(const SdpsaConfig& cfg, std::size_t state_count);
};

/// Cost observed while simulating one block at a fixed integer n.
struct BlockResult {
  double cost = 0.0;
  std::uint64_t episodes = 0;
};

inline double gradient_estimate(double tracker, double delta, int direction) {
  return tracker / (delta * static_cast<double>(direction));
}

/// n_{m+1} = clip(n_m - a_m * Y / (delta * Delta_m)).
inline double slow_update(double n, double step, double tracker, double delta, int direction,
                          const ParameterDomain& domain) {
  return clip_project(n - step * gradient_estimate(tracker, delta, direction), domain);
}

/**
 * Advances the coupled recursions by one slow iteration.
 *
 * `sampler(n_proj, fast_step, state)` simulates at the projected integer n,
 * updates state.tracker (and whatever value table it owns) and returns the
 * block cost. Keeping the sampler generic lets tests replace the TD loop with
 * a synthetic cost.
 */
template <class Sampler>
void sdpsa_step(SdpsaState& state, const SdpsaConfig& cfg, Sampler& sampler, Rng& projection_rng) {
  const int direction = perturbation(state.m);
  const double perturbed = state.n_cont + cfg.delta * direction;
  const int n_proj = std::min(cfg.domain.upper(),
                              std::max(1, random_project(perturbed, cfg.domain, projection_rng)));
  const BlockResult block = sampler(n_proj, cfg.fast.at(state.m), state);
  state.episodes += block.episodes;
  state.n_cont = slow_update(state.n_cont, cfg.slow.at(state.m), state.tracker, cfg.delta,
                             direction, cfg.domain);

  RunRecord record;
  record.m = state.m;
  record.n_cont = state.n_cont;
  record.n_proj = n_proj;
  record.tracker = state.tracker;
  record.rmse = rmse(block.cost);
  record.episodes = state.episodes;
  if (state.clock_start) {
    const auto elapsed = std::chrono::steady_clock::now() - *state.clock_start;
    record.ms = std::chrono::duration<double, std::milli>(elapsed).count();
  }
  state.trace.push_back(record);
  ++state.m;
}

/**
 * Block sampler backed by n-step TD on an environment. Each block restarts the
 * block cost J at zero and reports its average over the block; the value table
 * is carried over. Every TD update also advances the tracker Y with the fast step.
 */
class TdBlockSampler {
 public:
  TdBlockSampler(const Environment& env, const Policy& policy, std::uint64_t episodes_per_block,
                 ErrorTiming timing, Rng episode_rng);

  BlockResult operator()(int n, double fast_step, SdpsaState& state);

  /// Called with every squared TD error g as it is produced.
  void set_observer(std::function<void(double)> observer) { observer_ = std::move(observer); }

 private:
  std::function<void(double)> observer_;
  EpisodeSampler sampler_;
  double gamma_;
  std::uint64_t episodes_per_block_;
  ErrorTiming timing_;
  Rng rng_;
};

/// Tail statistics of a trace: modal n_proj and mean rmse over the final fraction.
struct TailSummary {
  int converged_n = 1;
  double tail_rmse = 0.0;
};

TailSummary summarize_tail(std::span<const RunRecord> trace, double fraction = 0.05);

struct SdpsaResult {
  int converged_n = 1;
  double tail_rmse = 0.0;
  std::vector<RunRecord> trace;
};

/// Full search run: episode and projection draws come from separate sub-streams of `seed`.
SdpsaResult run_sdpsa(const SdpsaConfig& cfg, const Environment& env, const Policy& policy,
                      std::uint64_t seed, bool record_time = false);

}  // namespace sdpsa
