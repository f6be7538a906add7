#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <vector>

#include "sdpsa/env.hpp"

using namespace sdpsa;

namespace {

// Iterated Bellman backups; independent of the linear solve in exact_value.
std::vector<double> bellman_fixed_point(const Environment& env, const Policy& policy,
                                        int sweeps = 20000) {
  std::vector<double> v(env.state_count(), 0.0);
  for (int it = 0; it < sweeps; ++it) {
    std::vector<double> next(v.size(), 0.0);
    for (StateId s = 0; s < env.state_count(); ++s) {
      if (env.is_terminal(s)) continue;
      const auto row = policy.row(s);
      for (std::size_t a = 0; a < env.action_count(); ++a)
        for (const auto& o : env.outcomes(s, a))
          next[s] += row[a] * o.probability * (o.reward + env.discount() * v[o.next]);
    }
    v = next;
  }
  return v;
}

}  // namespace

TEST_CASE("random walk layout") {
  const Environment env = make_random_walk(19);
  CHECK(env.state_count() == 21);
  CHECK(env.is_terminal(0));
  CHECK(env.is_terminal(20));
  CHECK(env.start_distribution()[10] == 1.0);
  CHECK(env.discount() == 1.0);
  CHECK(env.reward_bound() == 1.0);

  const Environment small = make_random_walk(3);
  CHECK(small.start_distribution()[2] == 1.0);
  const auto outs = small.outcomes(2, 0);
  REQUIRE(outs.size() == 2);
  CHECK(outs[0].next == 1);
  CHECK(outs[0].probability == 0.5);
  CHECK(outs[1].next == 3);
  CHECK(outs[1].probability == 0.5);

  CHECK_THROWS_AS(make_random_walk(4), std::invalid_argument);
  CHECK_THROWS_AS(make_random_walk(1), std::invalid_argument);
}

TEST_CASE("transition rows are stochastic") {
  for (const Environment& env : {make_random_walk(19), make_gridworld(GridworldSpec{})}) {
    for (StateId s = 0; s < env.state_count(); ++s)
      for (std::size_t a = 0; a < env.action_count(); ++a) {
        double total = 0.0;
        for (const auto& o : env.outcomes(s, a)) total += o.probability;
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
  }
}

TEST_CASE("malformed environments are rejected") {
  std::vector<std::vector<Outcome>> t = {{{0, 0.0, 1.0}}, {{0, 0.0, 0.7}}};
  CHECK_THROWS_AS(Environment(2, 1, t, {true, false}, {0.0, 1.0}, 1.0, 10), std::invalid_argument);
  t[1] = {{0, 0.0, 1.0}};
  t[0] = {{1, 1.0, 1.0}};  // terminal that leaks
  CHECK_THROWS_AS(Environment(2, 1, t, {true, false}, {0.0, 1.0}, 1.0, 10), std::invalid_argument);
}

TEST_CASE("random walk values") {
  const Environment env = make_random_walk(19);
  const Policy pi = uniform_policy(env);
  const auto v = exact_value(env, pi);
  const auto brute = bellman_fixed_point(env, pi);
  for (int i = 1; i <= 19; ++i) {
    CHECK(v[i] == doctest::Approx(i / 10.0 - 1.0).epsilon(1e-12));
    CHECK(brute[i] == doctest::Approx(i / 10.0 - 1.0).epsilon(1e-9));
  }
  CHECK(v[0] == 0.0);
  CHECK(v[20] == 0.0);
}

TEST_CASE("gridworld") {
  GridworldSpec spec;
  CHECK(make_gridworld(spec).state_count() == 256);

  SUBCASE("one-step episode") {
    GridworldSpec line{2, 1, {1, 0}, 0.0, 1.0, 0.5, 10};
    const Environment env = make_gridworld(line);
    const std::vector<std::size_t> right(2, 1);
    const auto v = exact_value(env, deterministic_policy(env, right));
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(env.start_distribution()[0] == 1.0);
  }

  SUBCASE("2x2 uniform policy matches Bellman iteration") {
    GridworldSpec sq{2, 2, {1, 1}, -0.1, 1.0, 0.9, 100};
    const Environment env = make_gridworld(sq);
    const Policy pi = uniform_policy(env);
    const auto v = exact_value(env, pi);
    const auto brute = bellman_fixed_point(env, pi, 2000);
    for (std::size_t s = 0; s < 4; ++s) CHECK(v[s] == doctest::Approx(brute[s]).epsilon(1e-10));
  }

  SUBCASE("off-grid moves are no-ops") {
    const Environment env = make_gridworld(spec);
    const auto up = env.outcomes(0, 0);
    CHECK(up[0].next == 0);
    CHECK(up[0].reward == 0.0);
  }

  CHECK_THROWS_AS(make_gridworld({4, 4, {4, 0}, 0.0, 1.0, 0.9, 10}), std::invalid_argument);
  CHECK_THROWS_AS(make_gridworld({4, 4, {1, 1}, 0.0, 1.0, 1.5, 10}), std::invalid_argument);
  CHECK_THROWS_AS(make_gridworld({4, 4, {1, 1}, 0.0, 1.0, 0.0, 10}), std::invalid_argument);
}

TEST_CASE("exact_value edge cases") {
  SUBCASE("all-zero rewards") {
    GridworldSpec spec{3, 3, {2, 2}, 0.0, 0.0, 0.9, 50};
    const Environment env = make_gridworld(spec);
    for (double x : exact_value(env, uniform_policy(env))) CHECK(x == 0.0);
  }
  SUBCASE("geometric series") {
    std::vector<std::vector<Outcome>> t = {{{0, 1.0, 1.0}}, {{1, 1.0, 1.0}}};
    const Environment env(2, 1, t, {false, false}, {1.0, 0.0}, 0.5, 100);
    const auto v = exact_value(env, uniform_policy(env));
    CHECK(v[0] == doctest::Approx(2.0));
    CHECK(v[1] == doctest::Approx(2.0));
  }
  SUBCASE("singular system") {
    std::vector<std::vector<Outcome>> t = {{{0, 1.0, 1.0}}, {{1, 1.0, 1.0}}};
    const Environment env(2, 1, t, {false, false}, {1.0, 0.0}, 1.0, 100);
    CHECK_THROWS_AS(exact_value(env, uniform_policy(env)), std::runtime_error);
  }
}

TEST_CASE("episode sampling") {
  const Environment env = make_random_walk(19);
  const Policy pi = uniform_policy(env);

  Rng a(7), b(7);
  for (int i = 0; i < 20; ++i) {
    const Trajectory x = sample_episode(env, pi, a);
    const Trajectory y = sample_episode(env, pi, b);
    CHECK(x.states == y.states);
    CHECK(x.rewards == y.rewards);
  }

  Rng rng(11);
  int right = 0;
  constexpr int kEpisodes = 100000;
  for (int i = 0; i < kEpisodes; ++i) {
    const Trajectory t = sample_episode(env, pi, rng);
    REQUIRE(t.terminated);
    REQUIRE(t.states.size() == t.rewards.size() + 1);
    const StateId last = t.states.back();
    REQUIRE((last == 0 || last == 20));
    REQUIRE(t.rewards.back() == (last == 0 ? -1.0 : 1.0));
    for (double r : t.rewards) REQUIRE(std::abs(r) <= env.reward_bound());
    right += last == 20;
  }
  const double sigma = std::sqrt(kEpisodes * 0.25);
  CHECK(std::abs(right - kEpisodes / 2.0) < 3.0 * sigma);
}

TEST_CASE("gridworld episodes truncate") {
  GridworldSpec spec;
  spec.max_episode_steps = 40;
  const Environment env = make_gridworld(spec);
  Rng rng(3);
  const Trajectory t = sample_episode(env, uniform_policy(env), rng);
  CHECK_FALSE(t.terminated);
  CHECK(t.length() == 40);
  CHECK(t.states.front() == 0);
}

TEST_CASE("first-visit Monte Carlo agrees with exact values") {
  const Environment env = make_random_walk(5);
  const Policy pi = uniform_policy(env);
  const auto v = exact_value(env, pi);
  std::vector<double> sum(env.state_count(), 0.0), sq(env.state_count(), 0.0);
  std::vector<int> count(env.state_count(), 0);
  Rng rng(5);
  for (int e = 0; e < 20000; ++e) {
    const Trajectory t = sample_episode(env, pi, rng);
    std::vector<bool> seen(env.state_count(), false);
    // Undiscounted, reward only on the final step: every return equals the last reward.
    for (std::size_t k = 0; k < t.length(); ++k) {
      const StateId s = t.states[k];
      if (seen[s]) continue;
      seen[s] = true;
      const double g = t.rewards.back();
      sum[s] += g;
      sq[s] += g * g;
      ++count[s];
    }
  }
  for (StateId s = 1; s <= 5; ++s) {
    REQUIRE(count[s] > 0);
    const double mean = sum[s] / count[s];
    const double var = sq[s] / count[s] - mean * mean;
    const double se = std::sqrt(var / count[s]);
    CHECK(std::abs(mean - v[s]) < 3.0 * se + 1e-12);
  }
}
