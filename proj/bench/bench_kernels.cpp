// Serial reference kernels against their OpenMP counterparts.
// Usage: bench_kernels [n] [repeats]. The Laplacian keeps a dense copy, so
// memory grows as n^2.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dynpriv/analysis.hpp"
#include "dynpriv/dynamics.hpp"
#include "dynpriv/kernels.hpp"

using namespace dynpriv;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    best = std::min(best,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-22s %12.3f %12.3f %8.2fx  %s\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 4000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  std::printf("n = %zu, %d OpenMP thread(s), best of %d\n", n, omp_get_max_threads(), repeats);

  const BalancedLaplacian L = build_laplacian(random_balanced_digraph(n, 8, 1));
  const MaskedSystem sys(L, random_mask_spec(MaskFamily::VanishingAffine, n, 2));
  std::vector<double> x(n);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (double& v : x) v = u(rng);

  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");
  std::vector<double> a(n), b(n);
  {
    const double s = best_of(repeats, [&] {
      for (int k = 0; k < 100; ++k) kernels::neg_laplacian_apply_serial(L.sparse(), x, a);
    });
    const double p = best_of(repeats, [&] {
      for (int k = 0; k < 100; ++k) kernels::neg_laplacian_apply_parallel(L.sparse(), x, b);
    });
    row("laplacian x100", s, p, a == b);
  }
  {
    const double s = best_of(repeats, [&] {
      for (int k = 0; k < 100; ++k) kernels::apply_mask_serial(sys.mask(), 0.5, x, a);
    });
    const double p = best_of(repeats, [&] {
      for (int k = 0; k < 100; ++k) kernels::apply_mask_parallel(sys.mask(), 0.5, x, b);
    });
    row("mask x100", s, p, a == b);
  }
  {
    const IntegrationSettings settings{0, 0.2, 1e-3, 50};
    Trajectory ts, tp;
    const double s =
        best_of(repeats, [&] { ts = integrate(sys, x, settings, kernels::Exec::Serial); });
    const double p =
        best_of(repeats, [&] { tp = integrate(sys, x, settings, kernels::Exec::Parallel); });
    row("integrate 200 steps", s, p, ts.x == tp.x && ts.y == tp.y);
  }
  {
    const MaskedSystem small(build_laplacian(random_balanced_digraph(200, 4, 4)),
                             random_mask_spec(MaskFamily::VanishingAffine, 200, 5));
    double ds = 0, dp = 0;
    const double s = best_of(repeats, [&] {
      ds = limit_system_deviation(small, 1.0, 10, 4096, 6, kernels::Exec::Serial);
    });
    const double p = best_of(repeats, [&] {
      dp = limit_system_deviation(small, 1.0, 10, 4096, 6, kernels::Exec::Parallel);
    });
    row("deviation 4096 pts", s, p, ds == dp);
  }
  return 0;
}
