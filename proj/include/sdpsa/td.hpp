#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdpsa/env.hpp"
#include "sdpsa/schedule.hpp"

namespace sdpsa {

/// Whether the squared TD error g is taken against V(S_k) before or after the value step.
enum class ErrorTiming { before_update, after_update };

struct TdConfig {
  int n = 1;
  double alpha = 0.1;
  double gamma = 1.0;
  ErrorTiming timing = ErrorTiming::before_update;

  void validate(int max_n = std::numeric_limits<int>::max()) const;
};

struct TdState {
  std::vector<double> values;
  double cost = 0.0;  // running mean squared TD error J(n)
  std::uint64_t episodes_run = 0;
  std::uint64_t updates = 0;

  static TdState zeros(std::size_t state_count) { return {std::vector<double>(state_count, 0.0)}; }
};

/// Truncated n-step return from time `kappa` of a recorded trajectory. Bootstraps
/// from V(S_{kappa+n}) only when kappa + n < T.
double n_step_return(const Trajectory& traj, std::span<const double> values, int n, double gamma,
                     std::size_t kappa);

void td_update(TdState& state, StateId s, double target, double alpha);

inline double j_update(double cost, double g, double alpha) { return cost + alpha * (g - cost); }

/// J restarted at zero for one block of episodes. The block's estimate is the
/// running J averaged over every update it saw, not the final snapshot, which
/// with a large step mostly reflects the last few errors of the last episode.
struct BlockCost {
  double alpha = 0.0;
  double current = 0.0;
  double sum = 0.0;
  std::uint64_t count = 0;

  void add(double g) {
    current = j_update(current, g, alpha);
    sum += current;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

inline double rmse(double cost) {
  if (cost < 0.0) throw std::domain_error("mean squared error must be nonnegative");
  return std::sqrt(cost);
}

/**
 * Online n-step TD over a single episode.
 *
 * Transitions are fed one at a time; the update for time k = i - n + 1 fires as
 * soon as R_{i+1}, S_{i+1} are known, and finish() flushes the tail updates
 * k = T-n+1 .. T-1 whose returns are cut off by the end of the episode. Each
 * update reports (S_k, return, squared error) to a sink, which owns the cost
 * recursions.
 */
class NStepEpisode {
 public:
  NStepEpisode(int n, double gamma, ErrorTiming timing);

  void start(StateId s0);

  /// `last` fixes T = i + 1 before the update for k = i - n + 1 is made.
  template <class Sink>
  void observe(double reward, StateId next, bool last, std::span<double> values, double step,
               Sink&& sink) {
    states_.push_back(next);
    rewards_.push_back(reward);
    ended_ = last;
    const auto i = static_cast<std::int64_t>(rewards_.size()) - 1;
    const std::int64_t kappa = i - static_cast<std::int64_t>(n_) + 1;
    if (kappa >= 0) update(static_cast<std::size_t>(kappa), values, step, sink);
  }

  /// Marks the end of the episode (terminal or truncated) and applies the tail updates.
  template <class Sink>
  void finish(std::span<double> values, double step, Sink&& sink) {
    ended_ = true;
    const auto T = static_cast<std::int64_t>(rewards_.size());
    const auto n = static_cast<std::int64_t>(n_);
    for (std::int64_t kappa = std::max<std::int64_t>(0, T - n + 1); kappa < T; ++kappa)
      update(static_cast<std::size_t>(kappa), values, step, sink);
  }

  std::size_t length() const { return rewards_.size(); }

 private:
  template <class Sink>
  void update(std::size_t kappa, std::span<double> values, double step, Sink& sink) {
    // While the episode is running T is unbounded, so kappa + n < T holds.
    const std::size_t T = rewards_.size();
    const bool bootstrap = !ended_ || kappa + n_ < T;
    const std::size_t last = std::min(kappa + n_, T);
    double target = 0.0;
    for (std::size_t j = kappa; j < last; ++j) target += powers_[j - kappa] * rewards_[j];
    if (bootstrap) target += powers_[n_] * values[states_[kappa + n_]];
    const StateId s = states_[kappa];
    double& v = values[s];
    double error = target - v;
    double g = error * error;
    v += step * error;
    if (timing_ == ErrorTiming::after_update) {
      error = target - v;
      g = error * error;
    }
    sink(s, target, g);
  }

  std::size_t n_;
  ErrorTiming timing_;
  bool ended_ = false;
  std::vector<double> powers_;
  std::vector<StateId> states_;
  std::vector<double> rewards_;
};

/**
 * Samples one episode and runs n-step TD on it. Episodes are truncated at the
 * environment's max_episode_steps. Returns the number of transitions.
 */
template <class Sink>
std::size_t run_td_episode(const EpisodeSampler& sampler, NStepEpisode& episode,
                           std::span<double> values, double step, Rng& rng, Sink&& sink) {
  const Environment& env = sampler.env();
  StateId s = sampler.start(rng);
  episode.start(s);
  if (env.is_terminal(s)) return 0;
  const std::size_t cap = env.max_episode_steps();
  for (std::size_t t = 0; t < cap; ++t) {
    const Transition tr = sampler.step(s, rng);
    // Hitting the cap ends the episode like a terminal state: no bootstrap past it.
    episode.observe(tr.reward, tr.next, tr.terminal || t + 1 == cap, values, step, sink);
    if (tr.terminal) break;
    s = tr.next;
  }
  episode.finish(values, step, sink);
  return episode.length();
}

/// Runs `episodes` episodes of n-step TD with constant step alpha; V and J advance in place.
void run_td_episodes(const Environment& env, const Policy& policy, const TdConfig& cfg,
                     TdState& state, std::uint64_t episodes, Rng& rng);

/// As above with the value step drawn from `step` indexed by state.episodes_run.
void run_td_episodes(const Environment& env, const Policy& policy, const TdConfig& cfg,
                     const Schedule& step, TdState& state, std::uint64_t episodes, Rng& rng);

/// Applies n-step TD to an already recorded trajectory.
void replay_episode(const Trajectory& traj, const TdConfig& cfg, TdState& state);

}  // namespace sdpsa
