#include "sdpsa/ocba.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sdpsa {

DesignStats::DesignStats(std::size_t designs)
    : count_(designs, 0), mean_(designs, 0.0), m2_(designs, 0.0) {}

void DesignStats::add(std::size_t design, double observation) {
  const auto n = static_cast<double>(++count_[design]);
  const double delta = observation - mean_[design];
  mean_[design] += delta / n;
  m2_[design] += delta * (observation - mean_[design]);
}

double DesignStats::variance(std::size_t design) const {
  if (count_[design] < 2) return 0.0;
  return std::max(0.0, m2_[design] / static_cast<double>(count_[design] - 1));
}

std::uint64_t DesignStats::total() const {
  return std::accumulate(count_.begin(), count_.end(), std::uint64_t{0});
}

std::size_t DesignStats::best() const {
  return static_cast<std::size_t>(std::min_element(mean_.begin(), mean_.end()) - mean_.begin());
}

std::vector<double> ocba_weights(const DesignStats& stats, double variance_floor) {
  const std::size_t k = stats.size();
  std::vector<double> weights(k, 0.0);
  if (k == 0) return weights;
  const std::size_t b = stats.best();
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (i == b) continue;
    const double var = std::max(stats.variance(i), variance_floor);
    const double gap = stats.mean(b) - stats.mean(i);
    weights[i] = var / std::max(gap * gap, variance_floor);
    sum += weights[i] * weights[i] / var;
  }
  weights[b] = std::sqrt(std::max(stats.variance(b), variance_floor)) * std::sqrt(sum);
  if (k == 1) weights[b] = 1.0;
  return weights;
}

std::vector<std::uint64_t> ocba_allocate(const DesignStats& stats, std::uint64_t increment,
                                         double variance_floor) {
  const std::size_t k = stats.size();
  if (k == 0) throw std::invalid_argument("no designs to allocate to");
  for (std::size_t i = 0; i < k; ++i)
    if (stats.count(i) < kOcbaWarmup)
      throw std::invalid_argument("every design needs the warm-up samples before allocation");

  std::vector<std::uint64_t> alloc(k, 0);
  const std::size_t b = stats.best();
  const double tie = std::sqrt(variance_floor);
  bool all_tied = true;
  for (std::size_t i = 0; i < k; ++i)
    if (std::abs(stats.mean(i) - stats.mean(b)) > tie) all_tied = false;
  if (all_tied) {
    for (std::size_t i = 0; i < k; ++i) alloc[i] = increment / k + (i < increment % k ? 1 : 0);
    return alloc;
  }

  const std::vector<double> weights = ocba_weights(stats, variance_floor);
  const double target_total = static_cast<double>(stats.total() + increment);
  std::vector<bool> active(k, true);
  std::vector<double> desired(k, 0.0);
  // Designs whose proportional share is below what they already have are frozen
  // at their current count and the rest is re-split among the others.
  for (bool changed = true; changed;) {
    changed = false;
    double active_weight = 0.0;
    double frozen = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (active[i])
        active_weight += weights[i];
      else
        frozen += static_cast<double>(stats.count(i));
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (!active[i]) {
        desired[i] = static_cast<double>(stats.count(i));
        continue;
      }
      desired[i] = (target_total - frozen) * weights[i] / active_weight;
      if (desired[i] < static_cast<double>(stats.count(i))) {
        active[i] = false;
        changed = true;
      }
    }
  }

  std::vector<double> extra(k, 0.0);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    extra[i] = std::max(0.0, desired[i] - static_cast<double>(stats.count(i)));
    alloc[i] = static_cast<std::uint64_t>(std::floor(extra[i]));
    assigned += alloc[i];
  }
  if (assigned > increment) {
    // Rounding noise only; trim from the largest shares.
    while (assigned > increment) {
      const auto it = std::max_element(alloc.begin(), alloc.end());
      --*it;
      --assigned;
    }
    return alloc;
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    return extra[a] - std::floor(extra[a]) > extra[c] - std::floor(extra[c]);
  });
  for (std::size_t j = 0; assigned < increment; j = (j + 1) % k) {
    ++alloc[order[j]];
    ++assigned;
  }
  return alloc;
}

OcbaTrace run_ocba_rounds(std::size_t designs, const OcbaPlan& plan, const DesignObserver& observe,
                          Execution exec) {
  if (designs == 0) throw std::invalid_argument("no designs");
  if (plan.warmup < kOcbaWarmup) throw std::invalid_argument("warm-up below the OCBA minimum");
  if (plan.round_units == 0) throw std::invalid_argument("round size must be positive");
  if (plan.total_units < designs * plan.warmup)
    throw std::invalid_argument("budget too small for the warm-up phase");

  OcbaTrace trace;
  trace.stats = DesignStats(designs);
  std::vector<std::vector<double>> batch(designs);

  const auto simulate = [&](const std::vector<std::uint64_t>& alloc) {
    for_each_index(designs, exec, [&](std::size_t i) {
      batch[i] = alloc[i] == 0 ? std::vector<double>{} : observe(i, alloc[i]);
      if (batch[i].size() != alloc[i])
        throw std::runtime_error("observer returned the wrong number of samples");
    });
    for (std::size_t i = 0; i < designs; ++i)
      for (double x : batch[i]) trace.stats.add(i, x);
    const std::size_t best = trace.stats.best();
    trace.checkpoints.push_back({trace.stats.total(), best, trace.stats.mean(best)});
  };

  simulate(std::vector<std::uint64_t>(designs, plan.warmup));
  while (trace.stats.total() < plan.total_units) {
    const std::uint64_t inc = std::min(plan.round_units, plan.total_units - trace.stats.total());
    simulate(ocba_allocate(trace.stats, inc));
  }
  return trace;
}

OcbaResult run_ocba(const Environment& env, const Policy& policy, const OcbaConfig& cfg,
                    std::uint64_t seed, Execution exec) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (cfg.block == 0) throw std::invalid_argument("block must be positive");
  if (cfg.total_budget % cfg.block != 0)
    throw std::invalid_argument("total budget must be a whole number of blocks");
  const auto designs = static_cast<std::size_t>(cfg.domain.upper());
  if (cfg.total_budget < designs * cfg.warmup * cfg.block)
    throw std::invalid_argument("budget too small: need at least L * warmup * block episodes");

  struct Candidate {
    TdState td;
    Rng rng;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(designs);
  for (std::size_t i = 0; i < designs; ++i)
    candidates.push_back({TdState::zeros(env.state_count()), make_rng(seed, Stream::episodes, i + 1)});
  const EpisodeSampler sampler(env, policy);

  const DesignObserver observe = [&](std::size_t design, std::uint64_t units) {
    Candidate& c = candidates[design];
    NStepEpisode episode(static_cast<int>(design) + 1, env.discount(), cfg.timing);
    std::vector<double> out;
    out.reserve(units);
    for (std::uint64_t u = 0; u < units; ++u) {
      BlockCost block{cfg.alpha};
      auto sink = [&](StateId, double, double g) {
        block.add(g);
        ++c.td.updates;
      };
      for (std::uint64_t e = 0; e < cfg.block; ++e) {
        run_td_episode(sampler, episode, c.td.values, cfg.alpha, c.rng, sink);
        ++c.td.episodes_run;
      }
      c.td.cost = block.current;
      out.push_back(rmse(block.mean()));
    }
    return out;
  };

  const OcbaPlan plan{cfg.total_budget / cfg.block, cfg.warmup, cfg.round_blocks};
  OcbaTrace trace = run_ocba_rounds(designs, plan, observe, exec);

  OcbaResult result;
  const std::size_t best = trace.stats.best();
  result.best_n = static_cast<int>(best) + 1;
  result.best_rmse = trace.stats.mean(best);
  result.episodes = trace.stats.total() * cfg.block;
  for (const auto& cp : trace.checkpoints)
    result.trace.push_back({cp.units * cfg.block, static_cast<int>(cp.best) + 1, cp.best_mean});
  result.stats = std::move(trace.stats);
  return result;
}

}  // namespace sdpsa
