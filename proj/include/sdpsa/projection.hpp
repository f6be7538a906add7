#pragma once

#include <cstdint>

#include "sdpsa/rng.hpp"

namespace sdpsa {

/// Integer lookahead set {1..L} and its hull [1, L].
class ParameterDomain {
 public:
  explicit ParameterDomain(int upper);

  int upper() const { return upper_; }
  bool contains(int n) const { return n >= 1 && n <= upper_; }

 private:
  int upper_;
};

/// Deterministic +1/-1 alternation: +1 on even iterations.
constexpr int perturbation(std::uint64_t m) { return (m % 2 == 0) ? 1 : -1; }

/**
 * Randomized rounding onto the integer domain. For k <= n <= k+1 returns k with
 * probability k+1-n and k+1 otherwise; n < 1 maps to 1 and n >= L maps to L.
 * Interior calls always consume exactly one draw.
 */
int random_project(double n, const ParameterDomain& domain, Rng& rng);

/// Clamp onto [1, L].
double clip_project(double n, const ParameterDomain& domain);

}  // namespace sdpsa
