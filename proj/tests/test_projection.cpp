#include "doctest.h"

#include <stdexcept>
#include <cmath>

#include "sdpsa/projection.hpp"

using namespace sdpsa;

TEST_CASE("perturbation alternates") {
  CHECK(perturbation(0) == 1);
  CHECK(perturbation(1) == -1);
  for (std::uint64_t k = 0; k < 1000; k += 2) {
    CHECK(perturbation(k) + perturbation(k + 1) == 0);
    CHECK(1.0 / perturbation(k) + 1.0 / perturbation(k + 1) == 0.0);
  }
}

TEST_CASE("random projection probabilities") {
  const ParameterDomain d(16);
  Rng rng(42);
  constexpr int kDraws = 100000;
  int fours = 0;
  for (int i = 0; i < kDraws; ++i) {
    const int k = random_project(3.25, d, rng);
    REQUIRE((k == 3 || k == 4));
    fours += k == 4;
  }
  const double p = static_cast<double>(fours) / kDraws;
  CHECK(std::abs(p - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / kDraws));

  for (int k = 1; k <= 16; ++k)
    for (int i = 0; i < 50; ++i) REQUIRE(random_project(k, d, rng) == k);

  CHECK(random_project(0.5, d, rng) == 1);
  CHECK(random_project(-7.0, d, rng) == 1);
  CHECK(random_project(18.0, d, rng) == 16);
  CHECK(random_project(16.0, d, rng) == 16);
  CHECK_THROWS(random_project(std::nan(""), d, rng));
}

TEST_CASE("random projection is unbiased on the interior") {
  const ParameterDomain d(16);
  Rng rng(7);
  for (double n : {1.0, 1.3, 2.5, 7.77, 15.01, 15.99}) {
    constexpr int kDraws = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double x = random_project(n, d, rng);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / kDraws;
    const double frac = n - std::floor(n);
    const double se = std::sqrt(frac * (1.0 - frac) / kDraws);
    CHECK(std::abs(mean - n) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("clip projection") {
  const ParameterDomain d(16);
  CHECK(clip_project(7.3, d) == 7.3);
  CHECK(clip_project(-2.0, d) == 1.0);
  CHECK(clip_project(99.0, d) == 16.0);
  Rng rng(1);
  std::uniform_real_distribution<double> wide(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = wide(rng);
    const double c = clip_project(x, d);
    REQUIRE(c >= 1.0);
    REQUIRE(c <= 16.0);
    REQUIRE(d.contains(random_project(x, d, rng)));
  }
}

TEST_CASE("domain needs at least two points") {
  CHECK_THROWS_AS(ParameterDomain(1), std::invalid_argument);
  CHECK_NOTHROW(ParameterDomain(2));
}
