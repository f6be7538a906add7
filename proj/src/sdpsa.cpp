#include "sdpsa/sdpsa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sdpsa {

void SdpsaConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(n0 >= 1.0 && n0 <= domain.upper()))
    throw std::invalid_argument("n0 must lie in [1, L]");
  if (episodes_per_update == 0) throw std::invalid_argument("episodes_per_update must be positive");
  if (fast.at(0) > 1.0) throw std::invalid_argument("fast step must not exceed 1");
  if (slow.is_constant_like() && fast.is_constant_like() && !(slow.scale() < fast.scale()))
    throw std::invalid_argument("slow step must be smaller than the fast step");
}

SdpsaState SdpsaState::initial(const SdpsaConfig& cfg, std::size_t state_count) {
  SdpsaState state;
  state.n_cont = cfg.n0;
  state.td = TdState::zeros(state_count);
  return state;
}

TdBlockSampler::TdBlockSampler(const Environment& env, const Policy& policy,
                               std::uint64_t episodes_per_block, ErrorTiming timing, Rng episode_rng)
    : sampler_(env, policy),
      gamma_(env.discount()),
      episodes_per_block_(episodes_per_block),
      timing_(timing),
      rng_(std::move(episode_rng)) {}

BlockResult TdBlockSampler::operator()(int n, double fast_step, SdpsaState& state) {
  NStepEpisode episode(n, gamma_, timing_);
  BlockCost block{fast_step};
  auto sink = [&](StateId, double, double g) {
    state.tracker += fast_step * (g - state.tracker);
    block.add(g);
    ++state.td.updates;
    if (observer_) observer_(g);
  };
  for (std::uint64_t e = 0; e < episodes_per_block_; ++e) {
    run_td_episode(sampler_, episode, state.td.values, fast_step, rng_, sink);
    ++state.td.episodes_run;
  }
  state.td.cost = block.current;
  return {block.mean(), episodes_per_block_};
}

TailSummary summarize_tail(std::span<const RunRecord> trace, double fraction) {
  TailSummary summary;
  if (trace.empty()) return summary;
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(trace.size()))));
  const auto tail = trace.subspan(trace.size() - std::min(count, trace.size()));
  std::map<int, std::size_t> votes;
  double total = 0.0;
  for (const auto& r : tail) {
    ++votes[r.n_proj];
    total += r.rmse;
  }
  // Ties go to the smallest n.
  std::size_t best = 0;
  for (const auto& [n, c] : votes) {
    if (c > best) {
      best = c;
      summary.converged_n = n;
    }
  }
  summary.tail_rmse = total / static_cast<double>(tail.size());
  return summary;
}

SdpsaResult run_sdpsa(const SdpsaConfig& cfg, const Environment& env, const Policy& policy,
                      std::uint64_t seed, bool record_time) {
  cfg.validate();
  SdpsaState state = SdpsaState::initial(cfg, env.state_count());
  state.trace.reserve(cfg.slow_iterations);
  if (record_time) state.clock_start = std::chrono::steady_clock::now();
  TdBlockSampler sampler(env, policy, cfg.episodes_per_update, cfg.timing,
                         make_rng(seed, Stream::episodes));
  Rng projection_rng = make_rng(seed, Stream::projection);
  for (std::uint64_t i = 0; i < cfg.slow_iterations; ++i)
    sdpsa_step(state, cfg, sampler, projection_rng);

  SdpsaResult result;
  if (state.trace.empty()) {
    result.converged_n = static_cast<int>(std::lround(clip_project(cfg.n0, cfg.domain)));
  } else {
    const TailSummary tail = summarize_tail(state.trace);
    result.converged_n = tail.converged_n;
    result.tail_rmse = tail.tail_rmse;
  }
  result.trace = std::move(state.trace);
  return result;
}

}  // namespace sdpsa
