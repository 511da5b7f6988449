#pragma once

// Data-parallel inner loops. Each kernel has a serial reference version,
// kept for testing and as the small-n fast path, and an OpenMP version.
// The parallel versions partition work by output element, so every output
// is computed by exactly one thread in the same order as the serial code
// and results are bit-identical.

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>

#include "dynpriv/graph.hpp"
#include "dynpriv/masks.hpp"

namespace dynpriv::kernels {

enum class Exec { Serial, Parallel, Auto };

// Below this many nodes Auto picks the serial path; thread start-up costs
// more than the whole mat-vec.
inline constexpr std::size_t kParallelThreshold = 2048;

// out = -L * y
void neg_laplacian_apply_serial(const CsrMatrix& L, std::span<const double> y,
                                std::span<double> out);
void neg_laplacian_apply_parallel(const CsrMatrix& L, std::span<const double> y,
                                  std::span<double> out);
void neg_laplacian_apply(const CsrMatrix& L, std::span<const double> y, std::span<double> out,
                         Exec exec = Exec::Auto);

// y_i = h_i(t, x_i)
void apply_mask_serial(const MaskSpec& spec, double t, std::span<const double> x,
                       std::span<double> y);
void apply_mask_parallel(const MaskSpec& spec, double t, std::span<const double> x,
                         std::span<double> y);
void apply_mask(const MaskSpec& spec, double t, std::span<const double> x, std::span<double> y,
                Exec exec = Exec::Auto);

// max_i |v_i|
double max_abs_serial(std::span<const double> v);
double max_abs_parallel(std::span<const double> v);

// Runs fn(i) for i in [0, count). Parallel mode uses a dynamic schedule with
// `jobs` threads (0 = OpenMP default). The first exception thrown by any
// iteration is rethrown after the loop; later iterations still run.
template <class Fn>
void for_each_index(std::size_t count, Exec exec, int jobs, Fn&& fn) {
  if (exec == Exec::Serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first;
  std::mutex guard;
  const long long n = static_cast<long long>(count);
  if (jobs > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (long long i = 0; i < n; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard lock(guard);
        if (!first) first = std::current_exception();
      }
    }
  } else {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard lock(guard);
        if (!first) first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace dynpriv::kernels
