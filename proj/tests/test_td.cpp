#include "doctest.h"

#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sdpsa/env.hpp"
#include "sdpsa/td.hpp"

using namespace sdpsa;

namespace {

// Literal transcription of the TD(n) episode loop: T starts unbounded, the
// update for k = i - n + 1 follows each observed step, and the loop stops once
// k reaches T - 1. Written independently of NStepEpisode.
void reference_episode(const Trajectory& traj, int n, double alpha, double gamma,
                       ErrorTiming timing, std::vector<double>& V, double& J) {
  const auto inf = std::numeric_limits<std::int64_t>::max();
  std::int64_t T = inf;
  const auto recorded = static_cast<std::int64_t>(traj.length());
  for (std::int64_t i = 0;; ++i) {
    if (i < T) {
      if (i + 1 == recorded) T = i + 1;  // terminal or truncation point
    }
    const std::int64_t k = i - n + 1;
    if (k >= 0) {
      // Discount factors as running products so the comparison can be exact.
      double G = 0.0;
      double disc = 1.0;
      for (std::int64_t j = k + 1; j <= std::min<std::int64_t>(k + n, T); ++j) {
        G += disc * traj.rewards[j - 1];
        disc *= gamma;
      }
      double gamma_n = 1.0;
      for (int j = 0; j < n; ++j) gamma_n *= gamma;
      if (k + n < T) G += gamma_n * V[traj.states[k + n]];
      const StateId s = traj.states[k];
      const double before = G - V[s];
      V[s] = V[s] + alpha * (G - V[s]);
      const double err = timing == ErrorTiming::before_update ? before : G - V[s];
      J = J + alpha * (err * err - J);
    }
    if (k == T - 1) break;
  }
}

}  // namespace

TEST_CASE("n-step return") {
  Trajectory t;
  t.states = {0, 1, 2, 3, 4};
  t.rewards = {1.0, 1.0, 1.0, 1.0};
  t.terminated = true;
  std::vector<double> v = {0.0, 0.0, 4.0, 0.0, 0.0};

  CHECK(n_step_return(t, v, 2, 0.5, 0) == doctest::Approx(2.5));
  std::vector<double> zeros(5, 0.0);
  Trajectory z{{0, 1, 2}, {0.0, 0.0}, true};
  CHECK(n_step_return(z, zeros, 1, 1.0, 0) == 0.0);

  // One reward left: no bootstrap term whatever n is.
  Trajectory tail{{0, 1}, {0.7}, true};
  std::vector<double> big(2, 100.0);
  for (int n : {1, 2, 5}) CHECK(n_step_return(tail, big, n, 0.9, 0) == doctest::Approx(0.7));

  CHECK_THROWS_AS(n_step_return(t, v, 2, 0.5, 4), std::out_of_range);
}

TEST_CASE("value and cost updates") {
  TdState s = TdState::zeros(3);
  td_update(s, 1, 1.0, 1.0);
  CHECK(s.values[1] == 1.0);
  s.values[2] = 2.0;
  td_update(s, 2, 2.0, 0.3);
  CHECK(s.values[2] == 2.0);
  s.values[0] = 0.0;
  td_update(s, 0, 1.0, 0.6);
  CHECK(s.values[0] == doctest::Approx(0.6));

  CHECK(j_update(0.0, 4.0, 0.5) == 2.0);
  CHECK(j_update(1.5, 1.5, 0.3) == 1.5);

  // Repeated g = c contracts the gap by (1 - alpha) each step.
  double J = 3.0;
  const double c = 0.25, alpha = 0.2;
  for (int k = 1; k <= 30; ++k) {
    J = j_update(J, c, alpha);
    CHECK(J - c == doctest::Approx((3.0 - c) * std::pow(1.0 - alpha, k)).epsilon(1e-12));
  }

  CHECK(rmse(0.0) == 0.0);
  CHECK(rmse(0.04) == doctest::Approx(0.2));
  CHECK_THROWS(rmse(-1.0));
}

TEST_CASE("online TD matches the reference loop on recorded episodes") {
  const Environment rw = make_random_walk(19);
  GridworldSpec spec;
  spec.width = spec.height = 5;
  spec.goal = {4, 4};
  spec.max_episode_steps = 30;  // forces truncated episodes
  const Environment gw = make_gridworld(spec);

  for (const Environment* env : {&rw, &gw}) {
    const Policy pi = uniform_policy(*env);
    for (ErrorTiming timing : {ErrorTiming::before_update, ErrorTiming::after_update}) {
      for (int n : {1, 2, 3, 7, 16, 40}) {
        Rng rng(100 + n);
        TdConfig cfg{n, 0.3, env->discount(), timing};
        TdState state = TdState::zeros(env->state_count());
        std::vector<double> V(env->state_count(), 0.0);
        double J = 0.0;
        for (int e = 0; e < 25; ++e) {
          const Trajectory t = sample_episode(*env, pi, rng);
          replay_episode(t, cfg, state);
          reference_episode(t, n, cfg.alpha, cfg.gamma, timing, V, J);
        }
        CHECK(state.values == V);
        CHECK(state.cost == J);
      }
    }
  }
}

TEST_CASE("sampling run equals replay of the same episodes") {
  const Environment env = make_random_walk(19);
  const Policy pi = uniform_policy(env);
  const TdConfig cfg{4, 0.4, 1.0};
  Rng live(9), recorded(9);
  TdState a = TdState::zeros(env.state_count());
  TdState b = TdState::zeros(env.state_count());
  run_td_episodes(env, pi, cfg, a, 50, live);
  for (int e = 0; e < 50; ++e) replay_episode(sample_episode(env, pi, recorded), cfg, b);
  CHECK(a.values == b.values);
  CHECK(a.cost == b.cost);
  CHECK(a.episodes_run == 50);
}

TEST_CASE("zero episodes leave the state untouched") {
  const Environment env = make_random_walk(5);
  TdState s = TdState::zeros(env.state_count());
  s.values[2] = 0.3;
  s.cost = 0.1;
  Rng rng(1);
  run_td_episodes(env, uniform_policy(env), {2, 0.5, 1.0}, s, 0, rng);
  CHECK(s.values[2] == 0.3);
  CHECK(s.cost == 0.1);
  CHECK(s.episodes_run == 0);
}

TEST_CASE("J stays nonnegative and V stays bounded") {
  const Environment rw = make_random_walk(19);
  const Environment gw = make_gridworld(GridworldSpec{});
  for (const Environment* env : {&rw, &gw}) {
    const Policy pi = uniform_policy(*env);
    const double bound = env->discount() < 1.0
                             ? env->reward_bound() / (1.0 - env->discount())
                             : env->reward_bound() * static_cast<double>(env->max_episode_steps());
    for (int n : {1, 4, 16}) {
      TdState s = TdState::zeros(env->state_count());
      Rng rng(n);
      const TdConfig cfg{n, 0.9, env->discount()};
      for (int e = 0; e < 40; ++e) {
        run_td_episodes(*env, pi, cfg, s, 1, rng);
        REQUIRE(s.cost >= 0.0);
        for (double v : s.values) REQUIRE(std::abs(v) <= bound);
      }
    }
  }
}

TEST_CASE("diminishing steps converge to the exact values") {
  const Environment env = make_random_walk(19);
  const Policy pi = uniform_policy(env);
  const auto exact = exact_value(env, pi);
  TdState s = TdState::zeros(env.state_count());
  Rng rng(2024);
  run_td_episodes(env, pi, {1, 0.1, 1.0}, Schedule::power(0.1, 0.6), s, 50000, rng);
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(s.values[i] - exact[i]));
  CHECK(worst < 0.05);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(TdConfig({0, 0.5, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(TdConfig({2, 0.0, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(TdConfig({2, 1.5, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(TdConfig({17, 0.5, 1.0}).validate(16), std::invalid_argument);
  CHECK_NOTHROW(TdConfig({16, 1.0, 1.0}).validate(16));
}
