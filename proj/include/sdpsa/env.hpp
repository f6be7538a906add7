#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdpsa/rng.hpp"

namespace sdpsa {

using StateId = std::uint32_t;

struct Outcome {
  StateId next;
  double reward;
  double probability;
};

/**
 * Finite episodic MDP with tabular transitions.
 *
 * Transitions are stored per (state, action) as a short outcome list. Terminal
 * states are absorbing with zero reward. The object is immutable after
 * construction and can be shared between threads.
 */
class Environment {
 public:
  Environment(std::size_t state_count, std::size_t action_count,
              std::vector<std::vector<Outcome>> transitions, std::vector<bool> terminal,
              std::vector<double> start_distribution, double discount,
              std::size_t max_episode_steps);

  std::size_t state_count() const { return state_count_; }
  std::size_t action_count() const { return action_count_; }
  double discount() const { return discount_; }
  std::size_t max_episode_steps() const { return max_episode_steps_; }
  bool is_terminal(StateId s) const { return terminal_[s]; }
  std::span<const double> start_distribution() const { return start_; }
  /// Largest |reward| over all transitions.
  double reward_bound() const { return reward_bound_; }

  std::span<const Outcome> outcomes(StateId s, std::size_t action) const {
    return transitions_[s * action_count_ + action];
  }

 private:
  std::size_t state_count_;
  std::size_t action_count_;
  std::vector<std::vector<Outcome>> transitions_;
  std::vector<bool> terminal_;
  std::vector<double> start_;
  double discount_;
  std::size_t max_episode_steps_;
  double reward_bound_ = 0.0;
};

/// Stochastic evaluation policy, one probability row per state.
class Policy {
 public:
  Policy(std::size_t state_count, std::size_t action_count, std::vector<double> probabilities);

  std::size_t action_count() const { return action_count_; }
  std::span<const double> row(StateId s) const {
    return {probabilities_.data() + s * action_count_, action_count_};
  }

 private:
  std::size_t action_count_;
  std::vector<double> probabilities_;
};

struct Trajectory {
  std::vector<StateId> states;  // S_0 .. S_T
  std::vector<double> rewards;  // R_1 .. R_T
  bool terminated = false;

  std::size_t length() const { return rewards.size(); }
};

struct Transition {
  StateId next;
  double reward;
  bool terminal;
};

/// Draws start states and single transitions; the building block of every sampler.
class EpisodeSampler {
 public:
  EpisodeSampler(const Environment& env, const Policy& policy);

  StateId start(Rng& rng) const;
  Transition step(StateId s, Rng& rng) const;

  const Environment& env() const { return *env_; }

 private:
  const Environment* env_;
  const Policy* policy_;
};

/// Classic odd-length random walk: interior states 1..k, terminals 0 and k+1.
Environment make_random_walk(int interior_states, std::size_t max_episode_steps = 10'000);

struct Cell {
  int x = 0;
  int y = 0;
};

struct GridworldSpec {
  int width = 16;
  int height = 16;
  Cell goal{15, 15};
  double step_reward = 0.0;
  double goal_reward = 1.0;
  double discount = 0.95;
  std::size_t max_episode_steps = 512;
};

/// Empty deterministic grid. Actions: 0 up, 1 right, 2 down, 3 left; off-grid moves
/// leave the agent in place. Episodes start in the corner opposite the goal.
Environment make_gridworld(const GridworldSpec& spec);

inline StateId cell_id(const GridworldSpec& spec, Cell c) {
  return static_cast<StateId>(c.y * spec.width + c.x);
}

Policy uniform_policy(const Environment& env);
Policy deterministic_policy(const Environment& env, std::span<const std::size_t> actions);

Trajectory sample_episode(const Environment& env, const Policy& policy, Rng& rng);

/// Solves V = r_pi + gamma P_pi V on the non-terminal states; terminals are 0.
/// Throws std::runtime_error when the system is singular.
std::vector<double> exact_value(const Environment& env, const Policy& policy);

}  // namespace sdpsa
