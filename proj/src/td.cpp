#include "sdpsa/td.hpp"

#include <algorithm>
#include <string>

namespace sdpsa {

void TdConfig::validate(int max_n) const {
  if (n < 1 || n > max_n)
    throw std::invalid_argument("n must lie in [1, " + std::to_string(max_n) + "], got " +
                                std::to_string(n));
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
}

double n_step_return(const Trajectory& traj, std::span<const double> values, int n, double gamma,
                     std::size_t kappa) {
  const std::size_t T = traj.length();
  if (kappa >= T) throw std::out_of_range("return start index must be below episode length");
  if (n < 1) throw std::invalid_argument("n must be positive");
  const auto steps = static_cast<std::size_t>(n);
  const std::size_t last = std::min(kappa + steps, T);
  double target = 0.0;
  double discount = 1.0;
  for (std::size_t j = kappa; j < last; ++j) {
    target += discount * traj.rewards[j];
    discount *= gamma;
  }
  if (kappa + steps < T) target += std::pow(gamma, n) * values[traj.states[kappa + steps]];
  return target;
}

void td_update(TdState& state, StateId s, double target, double alpha) {
  double& v = state.values.at(s);
  v += alpha * (target - v);
}

NStepEpisode::NStepEpisode(int n, double gamma, ErrorTiming timing)
    : n_(static_cast<std::size_t>(n)), timing_(timing), powers_(static_cast<std::size_t>(n) + 1) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  powers_[0] = 1.0;
  for (std::size_t j = 1; j < powers_.size(); ++j) powers_[j] = powers_[j - 1] * gamma;
}

void NStepEpisode::start(StateId s0) {
  states_.clear();
  rewards_.clear();
  states_.push_back(s0);
  ended_ = false;
}

namespace {

struct CostSink {
  TdState* state;
  double alpha;
  void operator()(StateId, double, double g) {
    state->cost = j_update(state->cost, g, alpha);
    ++state->updates;
  }
};

}  // namespace

void run_td_episodes(const Environment& env, const Policy& policy, const TdConfig& cfg,
                     TdState& state, std::uint64_t episodes, Rng& rng) {
  run_td_episodes(env, policy, cfg, Schedule::constant(cfg.alpha), state, episodes, rng);
}

void run_td_episodes(const Environment& env, const Policy& policy, const TdConfig& cfg,
                     const Schedule& step, TdState& state, std::uint64_t episodes, Rng& rng) {
  cfg.validate();
  if (state.values.size() != env.state_count())
    throw std::invalid_argument("value table does not match environment");
  const EpisodeSampler sampler(env, policy);
  NStepEpisode episode(cfg.n, cfg.gamma, cfg.timing);
  for (std::uint64_t e = 0; e < episodes; ++e) {
    const double alpha = step.at(state.episodes_run);
    run_td_episode(sampler, episode, state.values, alpha, rng, CostSink{&state, alpha});
    ++state.episodes_run;
  }
}

void replay_episode(const Trajectory& traj, const TdConfig& cfg, TdState& state) {
  cfg.validate();
  if (traj.states.size() != traj.rewards.size() + 1)
    throw std::invalid_argument("trajectory needs one more state than rewards");
  NStepEpisode episode(cfg.n, cfg.gamma, cfg.timing);
  episode.start(traj.states.front());
  CostSink sink{&state, cfg.alpha};
  for (std::size_t i = 0; i < traj.length(); ++i) {
    const bool last = i + 1 == traj.length();
    episode.observe(traj.rewards[i], traj.states[i + 1], last, state.values,
                    cfg.alpha, sink);
  }
  episode.finish(state.values, cfg.alpha, sink);
  ++state.episodes_run;
}

}  // namespace sdpsa
