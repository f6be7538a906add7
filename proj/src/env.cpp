#include "sdpsa/env.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sdpsa {
namespace {

constexpr double kStochasticTolerance = 1e-12;

template <class Range, class Weight>
std::size_t sample_index(const Range& items, Weight weight, Rng& rng) {
  const std::size_t count = std::size(items);
  if (count == 1) return 0;
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    acc += weight(items[i]);
    if (u < acc) return i;
  }
  return count - 1;
}

}  // namespace

Environment::Environment(std::size_t state_count, std::size_t action_count,
                         std::vector<std::vector<Outcome>> transitions, std::vector<bool> terminal,
                         std::vector<double> start_distribution, double discount,
                         std::size_t max_episode_steps)
    : state_count_(state_count),
      action_count_(action_count),
      transitions_(std::move(transitions)),
      terminal_(std::move(terminal)),
      start_(std::move(start_distribution)),
      discount_(discount),
      max_episode_steps_(max_episode_steps) {
  if (state_count_ == 0 || action_count_ == 0)
    throw std::invalid_argument("environment needs at least one state and one action");
  if (transitions_.size() != state_count_ * action_count_)
    throw std::invalid_argument("transition table has wrong size");
  if (terminal_.size() != state_count_ || start_.size() != state_count_)
    throw std::invalid_argument("terminal/start vectors must have one entry per state");
  if (!(discount_ > 0.0 && discount_ <= 1.0))
    throw std::invalid_argument("discount must lie in (0, 1]");
  if (max_episode_steps_ == 0) throw std::invalid_argument("max_episode_steps must be positive");

  for (std::size_t sa = 0; sa < transitions_.size(); ++sa) {
    const auto s = static_cast<StateId>(sa / action_count_);
    const auto& outs = transitions_[sa];
    if (outs.empty()) throw std::invalid_argument("empty transition distribution");
    double total = 0.0;
    for (const auto& o : outs) {
      if (o.next >= state_count_) throw std::invalid_argument("transition to unknown state");
      if (o.probability < 0.0) throw std::invalid_argument("negative transition probability");
      if (terminal_[s] && (o.next != s || o.reward != 0.0))
        throw std::invalid_argument("terminal state " + std::to_string(s) +
                                    " must be absorbing with zero reward");
      total += o.probability;
      reward_bound_ = std::max(reward_bound_, std::abs(o.reward));
    }
    if (std::abs(total - 1.0) > kStochasticTolerance)
      throw std::invalid_argument("transition probabilities of state " + std::to_string(s) +
                                  " do not sum to 1");
  }
  const double start_total = std::accumulate(start_.begin(), start_.end(), 0.0);
  if (std::abs(start_total - 1.0) > kStochasticTolerance)
    throw std::invalid_argument("start distribution does not sum to 1");
}

Policy::Policy(std::size_t state_count, std::size_t action_count, std::vector<double> probabilities)
    : action_count_(action_count), probabilities_(std::move(probabilities)) {
  if (probabilities_.size() != state_count * action_count)
    throw std::invalid_argument("policy table has wrong size");
  for (std::size_t s = 0; s < state_count; ++s) {
    double total = 0.0;
    for (std::size_t a = 0; a < action_count; ++a) {
      const double p = probabilities_[s * action_count + a];
      if (p < 0.0) throw std::invalid_argument("negative action probability");
      total += p;
    }
    if (std::abs(total - 1.0) > kStochasticTolerance)
      throw std::invalid_argument("policy row " + std::to_string(s) + " does not sum to 1");
  }
}

EpisodeSampler::EpisodeSampler(const Environment& env, const Policy& policy)
    : env_(&env), policy_(&policy) {
  if (policy.action_count() != env.action_count())
    throw std::invalid_argument("policy and environment disagree on action count");
}

StateId EpisodeSampler::start(Rng& rng) const {
  const auto start = env_->start_distribution();
  return static_cast<StateId>(sample_index(start, [](double p) { return p; }, rng));
}

Transition EpisodeSampler::step(StateId s, Rng& rng) const {
  const auto row = policy_->row(s);
  const std::size_t action = sample_index(row, [](double p) { return p; }, rng);
  const auto outs = env_->outcomes(s, action);
  const Outcome& o = outs[sample_index(outs, [](const Outcome& x) { return x.probability; }, rng)];
  return {o.next, o.reward, env_->is_terminal(o.next)};
}

Environment make_random_walk(int interior_states, std::size_t max_episode_steps) {
  if (interior_states < 3 || interior_states % 2 == 0)
    throw std::invalid_argument("random walk needs an odd number (>= 3) of interior states");
  const auto count = static_cast<std::size_t>(interior_states) + 2;
  const auto right = static_cast<StateId>(count - 1);

  std::vector<std::vector<Outcome>> transitions(count);
  std::vector<bool> terminal(count, false);
  terminal[0] = terminal[right] = true;
  transitions[0] = {{0, 0.0, 1.0}};
  transitions[right] = {{right, 0.0, 1.0}};
  for (StateId s = 1; s < right; ++s) {
    const double left_reward = (s - 1 == 0) ? -1.0 : 0.0;
    const double right_reward = (s + 1 == right) ? 1.0 : 0.0;
    transitions[s] = {{s - 1, left_reward, 0.5}, {s + 1, right_reward, 0.5}};
  }
  std::vector<double> start(count, 0.0);
  start[count / 2] = 1.0;
  return Environment(count, 1, std::move(transitions), std::move(terminal), std::move(start), 1.0,
                     max_episode_steps);
}

Environment make_gridworld(const GridworldSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("grid must be non-empty");
  if (spec.width * spec.height < 2) throw std::invalid_argument("grid needs at least two cells");
  if (spec.goal.x < 0 || spec.goal.x >= spec.width || spec.goal.y < 0 || spec.goal.y >= spec.height)
    throw std::invalid_argument("goal lies outside the grid");
  if (!(spec.discount > 0.0 && spec.discount <= 1.0))
    throw std::invalid_argument("gridworld discount must lie in (0, 1]");

  constexpr int dx[4] = {0, 1, 0, -1};
  constexpr int dy[4] = {-1, 0, 1, 0};
  const auto count = static_cast<std::size_t>(spec.width * spec.height);
  const StateId goal = cell_id(spec, spec.goal);

  std::vector<std::vector<Outcome>> transitions(count * 4);
  std::vector<bool> terminal(count, false);
  terminal[goal] = true;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const StateId s = cell_id(spec, {x, y});
      for (int a = 0; a < 4; ++a) {
        auto& slot = transitions[s * 4 + a];
        if (s == goal) {
          slot = {{s, 0.0, 1.0}};
          continue;
        }
        int nx = x + dx[a];
        int ny = y + dy[a];
        if (nx < 0 || nx >= spec.width || ny < 0 || ny >= spec.height) {
          nx = x;
          ny = y;
        }
        const StateId next = cell_id(spec, {nx, ny});
        slot = {{next, next == goal ? spec.goal_reward : spec.step_reward, 1.0}};
      }
    }
  }
  std::vector<double> start(count, 0.0);
  start[cell_id(spec, {spec.width - 1 - spec.goal.x, spec.height - 1 - spec.goal.y})] = 1.0;
  return Environment(count, 4, std::move(transitions), std::move(terminal), std::move(start),
                     spec.discount, spec.max_episode_steps);
}

Policy uniform_policy(const Environment& env) {
  const std::size_t actions = env.action_count();
  return Policy(env.state_count(), actions,
                std::vector<double>(env.state_count() * actions, 1.0 / static_cast<double>(actions)));
}

Policy deterministic_policy(const Environment& env, std::span<const std::size_t> actions) {
  if (actions.size() != env.state_count())
    throw std::invalid_argument("need one action per state");
  std::vector<double> probs(env.state_count() * env.action_count(), 0.0);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] >= env.action_count()) throw std::invalid_argument("action out of range");
    probs[s * env.action_count() + actions[s]] = 1.0;
  }
  return Policy(env.state_count(), env.action_count(), std::move(probs));
}

Trajectory sample_episode(const Environment& env, const Policy& policy, Rng& rng) {
  const EpisodeSampler sampler(env, policy);
  Trajectory traj;
  StateId s = sampler.start(rng);
  traj.states.push_back(s);
  if (env.is_terminal(s)) {
    traj.terminated = true;
    return traj;
  }
  while (traj.rewards.size() < env.max_episode_steps()) {
    const Transition t = sampler.step(s, rng);
    traj.states.push_back(t.next);
    traj.rewards.push_back(t.reward);
    s = t.next;
    if (t.terminal) {
      traj.terminated = true;
      break;
    }
  }
  return traj;
}

std::vector<double> exact_value(const Environment& env, const Policy& policy) {
  const std::size_t count = env.state_count();
  std::vector<std::size_t> index(count, count);
  std::size_t live = 0;
  for (StateId s = 0; s < count; ++s)
    if (!env.is_terminal(s)) index[s] = live++;

  std::vector<double> values(count, 0.0);
  if (live == 0) return values;

  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(live, live);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(live);
  const double gamma = env.discount();
  for (StateId s = 0; s < count; ++s) {
    if (index[s] == count) continue;
    const auto row = policy.row(s);
    for (std::size_t a = 0; a < env.action_count(); ++a) {
      if (row[a] == 0.0) continue;
      for (const auto& o : env.outcomes(s, a)) {
        const double p = row[a] * o.probability;
        rhs(index[s]) += p * o.reward;
        if (index[o.next] != count) system(index[s], index[o.next]) -= gamma * p;
      }
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw std::runtime_error("value system is singular");
  const Eigen::VectorXd solution = lu.solve(rhs);
  for (StateId s = 0; s < count; ++s)
    if (index[s] != count) values[s] = solution(index[s]);
  return values;
}

}  // namespace sdpsa
