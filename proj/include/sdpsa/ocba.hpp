#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sdpsa/env.hpp"
#include "sdpsa/parallel.hpp"
#include "sdpsa/projection.hpp"
#include "sdpsa/td.hpp"

namespace sdpsa {

inline constexpr double kVarianceFloor = 1e-8;
inline constexpr std::uint64_t kOcbaWarmup = 5;

/// Per-design sample count, mean and variance (Welford).
class DesignStats {
 public:
  explicit DesignStats(std::size_t designs);

  void add(std::size_t design, double observation);

  std::size_t size() const { return count_.size(); }
  std::uint64_t count(std::size_t design) const { return count_[design]; }
  double mean(std::size_t design) const { return mean_[design]; }
  /// Unbiased sample variance; 0 with fewer than two samples.
  double variance(std::size_t design) const;
  std::uint64_t total() const;
  /// Design with the lowest mean; ties go to the lower index.
  std::size_t best() const;

 private:
  std::vector<std::uint64_t> count_;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

/**
 * Relative OCBA budget weights for minimization. With b the current best and
 * d_i = mean_b - mean_i:
 *
 *   w_i = (sigma_i / d_i)^2               for i != b
 *   w_b = sigma_b * sqrt(sum_{i!=b} w_i^2 / sigma_i^2)
 *
 * Variances and squared gaps are floored at `variance_floor`.
 */
std::vector<double> ocba_weights(const DesignStats& stats, double variance_floor = kVarianceFloor);

/**
 * Splits `increment` new samples across designs so that the resulting totals
 * follow the OCBA weights as closely as possible without taking samples away
 * from any design. The result sums to `increment`. Falls back to a uniform
 * split when every mean ties with the best.
 */
std::vector<std::uint64_t> ocba_allocate(const DesignStats& stats, std::uint64_t increment,
                                         double variance_floor = kVarianceFloor);

struct OcbaPlan {
  std::uint64_t total_units = 0;
  std::uint64_t warmup = kOcbaWarmup;
  std::uint64_t round_units = 16;
};

struct OcbaCheckpoint {
  std::uint64_t units = 0;  // cumulative
  std::size_t best = 0;
  double best_mean = 0.0;
};

struct OcbaTrace {
  DesignStats stats{0};
  std::vector<OcbaCheckpoint> checkpoints;
};

/// `observe(design, units)` simulates `units` more samples of one design and
/// returns their observations. Calls for different designs may run concurrently.
using DesignObserver = std::function<std::vector<double>(std::size_t design, std::uint64_t units)>;

/// Warm-up then allocate/simulate/update rounds until the unit budget is spent.
OcbaTrace run_ocba_rounds(std::size_t designs, const OcbaPlan& plan, const DesignObserver& observe,
                          Execution exec = Execution::parallel);

struct OcbaConfig {
  ParameterDomain domain{16};
  double alpha = 0.4;
  std::uint64_t total_budget = 0;  // episodes
  std::uint64_t block = 10;        // episodes per observation
  std::uint64_t warmup = kOcbaWarmup;
  std::uint64_t round_blocks = 16;
  ErrorTiming timing = ErrorTiming::before_update;
};

struct OcbaBudgetPoint {
  std::uint64_t episodes = 0;
  int best_n = 1;
  double best_rmse = 0.0;
};

struct OcbaResult {
  int best_n = 1;
  double best_rmse = 0.0;  // sample mean of the selected design's block RMSEs
  std::uint64_t episodes = 0;
  DesignStats stats{0};
  std::vector<OcbaBudgetPoint> trace;
};

/**
 * OCBA over n in {1..L} with n-step TD as the simulator. One observation is the
 * RMSE of one block of episodes: the block cost restarts at zero while each
 * candidate keeps its own value table. Each candidate draws episodes from its
 * own sub-stream of `seed`, so serial and parallel execution agree exactly.
 */
OcbaResult run_ocba(const Environment& env, const Policy& policy, const OcbaConfig& cfg,
                    std::uint64_t seed, Execution exec = Execution::parallel);

}  // namespace sdpsa
