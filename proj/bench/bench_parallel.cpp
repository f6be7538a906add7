// Serial reference vs OpenMP execution of the embarrassingly parallel kernels.
#include <chrono>
#include <cstdio>
#include <functional>

#include "sdpsa/harness.hpp"

using namespace sdpsa;

namespace {

double seconds(const std::function<void()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, const std::function<void(Execution)>& kernel) {
  const double s = seconds([&] { kernel(Execution::serial); });
  const double p = seconds([&] { kernel(Execution::parallel); });
  std::printf("%-12s serial %8.3fs  parallel %8.3fs  speedup %5.2fx\n", name, s, p, s / p);
}

}  // namespace

int main() {
  std::printf("workers: %d\n", worker_count());
  const Workload rw = make_workload(preset(1));
  const Workload gw = make_workload(preset(1, EnvKind::gridworld));

  SweepConfig sc;
  sc.alpha = 0.4;
  sc.episodes = 2'000;
  report("sweep rw", [&](Execution e) { sweep_n(rw.env, rw.policy, sc, e); });
  sc.episodes = 200;
  report("sweep gw", [&](Execution e) { sweep_n(gw.env, gw.policy, sc, e); });

  ExperimentConfig cfg = preset(4);
  cfg.iterations = 1'000;
  report("replicate", [&](Execution e) { replicate(cfg, 8, e); });

  OcbaConfig oc;
  oc.total_budget = 4'000;
  report("ocba", [&](Execution e) { run_ocba(rw.env, rw.policy, oc, 1, e); });
  return 0;
}
