// Serial reference kernels against the OpenMP ones on the same inputs.
// Usage: basinlab_bench [threads]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "basinlab/basin.h"
#include "basinlab/metrics.h"

using namespace basinlab;

namespace {

double seconds(const std::function<void()>& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-34s %10.4f %10.4f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  std::printf("threads: %d (best of 3 runs, seconds)\n", threads);
  std::printf("%-34s %10s %10s %9s\n", "kernel", "reference", "openmp", "speedup");

  const SystemSpec newton = NewtonParams{};
  Region nr{-2.5, 2.5, -2.5, 2.5, 333};
  const auto ncfg = default_config(newton);
  BasinGrid a, b;
  const double ns = seconds([&] { a = reference::compute_basin(newton, nr, ncfg); });
  const double np = seconds([&] { b = compute_basin(newton, nr, ncfg, 0, threads); });
  row("compute_basin newton 333^2", ns, np, a == b);

  const SystemSpec duffing = DuffingParams{0.3, 1.0};
  Region dr{-2.0, 2.0, -2.0, 2.0, 48};
  const auto dcfg = default_config(duffing);
  BasinGrid c, d;
  const double ds = seconds([&] { c = reference::compute_basin(duffing, dr, dcfg); }, 1);
  const double dp = seconds([&] { d = compute_basin(duffing, dr, dcfg, 0, threads); }, 1);
  row("compute_basin duffing 48^2", ds, dp, c == d);

  FDimConfig fcfg;
  fcfg.boxes_per_size = 100000;
  std::vector<UncertaintyPoint> u1, u2;
  const double fs = seconds([&] { u1 = reference::uncertainty_curve(b, fcfg); });
  const double fp = seconds([&] { u2 = uncertainty_curve(b, fcfg, threads); });
  bool same = u1.size() == u2.size();
  for (std::size_t i = 0; same && i < u1.size(); ++i) same = u1[i].uncertain == u2[i].uncertain;
  row("uncertainty_curve 11 x 1e5 boxes", fs, fp, same);

  EntropyConfig ecfg;
  EntropyEstimate e1, e2;
  const double es = seconds([&] { e1 = reference::estimate_entropy(b, ecfg); });
  const double ep = seconds([&] { e2 = estimate_entropy(b, ecfg, threads); });
  row("estimate_entropy 3.5e5 boxes", es, ep,
      e1.entropy_sum == e2.entropy_sum && e1.boundary_boxes == e2.boundary_boxes);

  const Mask m = boundary_mask(b);
  Mask f1, f2;
  const double ms = seconds([&] { f1 = reference::fatten(m, 5); });
  const double mp = seconds([&] { f2 = fatten(m, 5); });
  row("fatten r=5 333^2", ms, mp, f1 == f2);
  return 0;
}
