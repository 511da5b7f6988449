#include "dynpriv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynpriv/errors.hpp"

namespace dynpriv::kernels {

namespace {

void check_dims(const CsrMatrix& L, std::size_t y, std::size_t out) {
  if (y != L.n || out != L.n) {
    throw DimensionMismatch("Laplacian is " + std::to_string(L.n) + "x" + std::to_string(L.n) +
                            ", vector has " + std::to_string(y) + " entries");
  }
}

inline double neg_row_dot(const CsrMatrix& L, std::size_t i, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = L.row_ptr[i]; k < L.row_ptr[i + 1]; ++k) s += L.val[k] * y[L.col[k]];
  return -s;
}

bool go_parallel(Exec exec, std::size_t n) {
  return exec == Exec::Parallel || (exec == Exec::Auto && n >= kParallelThreshold);
}

}  // namespace

void neg_laplacian_apply_serial(const CsrMatrix& L, std::span<const double> y,
                                std::span<double> out) {
  check_dims(L, y.size(), out.size());
  for (std::size_t i = 0; i < L.n; ++i) out[i] = neg_row_dot(L, i, y);
}

void neg_laplacian_apply_parallel(const CsrMatrix& L, std::span<const double> y,
                                  std::span<double> out) {
  check_dims(L, y.size(), out.size());
  const long long n = static_cast<long long>(L.n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = neg_row_dot(L, static_cast<std::size_t>(i), y);
  }
}

void neg_laplacian_apply(const CsrMatrix& L, std::span<const double> y, std::span<double> out,
                         Exec exec) {
  if (go_parallel(exec, L.n)) {
    neg_laplacian_apply_parallel(L, y, out);
  } else {
    neg_laplacian_apply_serial(L, y, out);
  }
}

void apply_mask_serial(const MaskSpec& spec, double t, std::span<const double> x,
                       std::span<double> y) {
  eval_mask_all(spec, t, x, y);
}

void apply_mask_parallel(const MaskSpec& spec, double t, std::span<const double> x,
                         std::span<double> y) {
  if (x.size() != spec.size() || y.size() != spec.size()) {
    throw DimensionMismatch("mask has " + std::to_string(spec.size()) + " nodes, state has " +
                            std::to_string(x.size()));
  }
  const long long n = static_cast<long long>(x.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    y[k] = eval_mask(spec, k, t, x[k]);
  }
}

void apply_mask(const MaskSpec& spec, double t, std::span<const double> x, std::span<double> y,
                Exec exec) {
  if (go_parallel(exec, x.size())) {
    apply_mask_parallel(spec, t, x, y);
  } else {
    apply_mask_serial(spec, t, x, y);
  }
}

double max_abs_serial(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

double max_abs_parallel(std::span<const double> v) {
  double m = 0.0;
  const long long n = static_cast<long long>(v.size());
#pragma omp parallel for reduction(max : m) schedule(static)
  for (long long i = 0; i < n; ++i) m = std::max(m, std::abs(v[static_cast<std::size_t>(i)]));
  return m;
}

}  // namespace dynpriv::kernels
