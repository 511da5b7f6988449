#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dynpriv/errors.hpp"
#include "dynpriv/graph.hpp"
#include "dynpriv/kernels.hpp"
#include "dynpriv/masks.hpp"

namespace dynpriv {

// The masked consensus system x' = -L h(t, x). Construction checks that the
// Laplacian and mask agree on n and that L is irreducible.
class MaskedSystem {
 public:
  MaskedSystem(BalancedLaplacian laplacian, MaskSpec mask);

  const BalancedLaplacian& laplacian() const noexcept { return laplacian_; }
  const MaskSpec& mask() const noexcept { return mask_; }
  std::size_t size() const noexcept { return laplacian_.size(); }

 private:
  BalancedLaplacian laplacian_;
  MaskSpec mask_;
};

// Row-major rows x cols block of samples.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  explicit SampleMatrix(std::size_t cols) : cols_(cols) {}

  std::size_t rows() const noexcept { return cols_ == 0 ? 0 : data_.size() / cols_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(data_).subspan(k * cols_, cols_);
  }
  double operator()(std::size_t k, std::size_t j) const { return data_[k * cols_ + j]; }
  void push_back(std::span<const double> r);
  void reserve_rows(std::size_t rows) { data_.reserve(rows * cols_); }

  // Values of column j across all rows.
  std::vector<double> column(std::size_t j) const;

  friend bool operator==(const SampleMatrix&, const SampleMatrix&) = default;

 private:
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Trajectory {
  std::vector<double> times;
  SampleMatrix x;  // private true states
  SampleMatrix y;  // public masked outputs
  double eta = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t dim() const noexcept { return x.cols(); }
};

struct IntegrationSettings {
  double t0 = 0.0;
  double horizon = 50.0;
  double step = 1e-3;
  std::size_t sample_every = 1;
};

// Overflow or NaN during integration. Carries everything computed so far.
class NonFiniteState : public Error {
 public:
  NonFiniteState(Trajectory partial, double t);
  const Trajectory& partial() const noexcept { return partial_; }
  double time() const noexcept { return t_; }

 private:
  Trajectory partial_;
  double t_;
};

// -L h(t, x), evaluated through the generic mask so every family shares the
// same code path.
std::vector<double> rhs(const MaskedSystem& sys, double t, std::span<const double> x);
void rhs_into(const MaskedSystem& sys, double t, std::span<const double> x,
              std::span<double> out, std::span<double> masked,
              kernels::Exec exec = kernels::Exec::Auto);

// Fixed-step RK4 from t0 to t0 + horizon. Sample k is taken at step
// k * sample_every and the final instant is always recorded; a horizon that
// is not a whole number of steps ends with one shortened step.
Trajectory integrate(const MaskedSystem& sys, std::span<const double> x0,
                     const IntegrationSettings& settings,
                     kernels::Exec exec = kernels::Exec::Auto);

double consensus_value(std::span<const double> x0);

// max_k |1'x(t_k) - 1'x(t_0)|
double conservation_residual(const Trajectory& traj);
// max_k |1'y(t_k)/n - eta|; the masked outputs carry no conservation law.
double public_average_drift(const Trajectory& traj);

}  // namespace dynpriv
