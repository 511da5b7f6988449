#include "dynpriv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dynpriv/rk4.hpp"

namespace dynpriv {

MaskedSystem::MaskedSystem(BalancedLaplacian laplacian, MaskSpec mask)
    : laplacian_(std::move(laplacian)), mask_(std::move(mask)) {
  if (laplacian_.size() != mask_.size()) {
    throw DimensionMismatch("Laplacian has " + std::to_string(laplacian_.size()) +
                            " nodes but the mask has " + std::to_string(mask_.size()));
  }
  if (!is_irreducible(laplacian_)) {
    throw InvalidLaplacian("consensus requires an irreducible Laplacian");
  }
}

void SampleMatrix::push_back(std::span<const double> r) {
  if (r.size() != cols_) {
    throw DimensionMismatch("sample row has " + std::to_string(r.size()) + " entries, expected " +
                            std::to_string(cols_));
  }
  data_.insert(data_.end(), r.begin(), r.end());
}

std::vector<double> SampleMatrix::column(std::size_t j) const {
  std::vector<double> c(rows());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = (*this)(k, j);
  return c;
}

NonFiniteState::NonFiniteState(Trajectory partial, double t)
    : Error("state became non-finite at t = " + std::to_string(t)),
      partial_(std::move(partial)),
      t_(t) {}

void rhs_into(const MaskedSystem& sys, double t, std::span<const double> x,
              std::span<double> out, std::span<double> masked, kernels::Exec exec) {
  kernels::apply_mask(sys.mask(), t, x, masked, exec);
  kernels::neg_laplacian_apply(sys.laplacian().sparse(), masked, out, exec);
}

std::vector<double> rhs(const MaskedSystem& sys, double t, std::span<const double> x) {
  if (x.size() != sys.size()) {
    throw DimensionMismatch("state has " + std::to_string(x.size()) + " entries, system has " +
                            std::to_string(sys.size()));
  }
  std::vector<double> out(x.size()), masked(x.size());
  rhs_into(sys, t, x, out, masked);
  return out;
}

namespace {

std::size_t step_count(double horizon, double step) {
  const double q = horizon / step;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(q));
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

}  // namespace

Trajectory integrate(const MaskedSystem& sys, std::span<const double> x0,
                     const IntegrationSettings& s, kernels::Exec exec) {
  if (!(s.step > 0.0)) throw std::invalid_argument("integration step must be positive");
  if (!(s.horizon > 0.0)) throw std::invalid_argument("integration horizon must be positive");
  if (s.sample_every < 1) throw std::invalid_argument("sample_every must be at least 1");
  if (!(s.t0 >= 0.0)) throw std::invalid_argument("initial time must be nonnegative");
  const std::size_t n = sys.size();
  if (x0.size() != n) {
    throw DimensionMismatch("initial state has " + std::to_string(x0.size()) +
                            " entries, system has " + std::to_string(n));
  }

  const std::size_t steps = std::max<std::size_t>(1, step_count(s.horizon, s.step));
  const double t_end = s.t0 + s.horizon;

  Trajectory traj;
  traj.x = SampleMatrix(n);
  traj.y = SampleMatrix(n);
  traj.eta = consensus_value(x0);
  const std::size_t expected = steps / s.sample_every + 2;
  traj.times.reserve(expected);
  traj.x.reserve_rows(expected);
  traj.y.reserve_rows(expected);

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> masked(n);
  auto record = [&](double t) {
    kernels::apply_mask(sys.mask(), t, x, masked, exec);
    traj.times.push_back(t);
    traj.x.push_back(x);
    traj.y.push_back(masked);
  };
  record(s.t0);

  std::vector<double> scratch(n);
  auto f = [&](double t, std::span<const double> state, std::span<double> out) {
    rhs_into(sys, t, state, out, scratch, exec);
  };
  Rk4 stepper(n);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = s.t0 + static_cast<double>(k) * s.step;
    const bool last = k + 1 == steps;
    const double h = last ? t_end - t : s.step;
    stepper.step(f, t, x, h);
    const double t_next = last ? t_end : s.t0 + static_cast<double>(k + 1) * s.step;
    if (!all_finite(x)) throw NonFiniteState(std::move(traj), t_next);
    if (last || (k + 1) % s.sample_every == 0) record(t_next);
  }
  return traj;
}

double consensus_value(std::span<const double> x0) {
  if (x0.empty()) throw std::invalid_argument("consensus value of an empty state");
  double s = 0.0;
  for (double v : x0) s += v;
  return s / static_cast<double>(x0.size());
}

double conservation_residual(const Trajectory& traj) {
  if (traj.size() == 0) return 0.0;
  auto total = [&](std::size_t k) {
    double s = 0.0;
    for (double v : traj.x.row(k)) s += v;
    return s;
  };
  const double initial = total(0);
  double worst = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) worst = std::max(worst, std::abs(total(k) - initial));
  return worst;
}

double public_average_drift(const Trajectory& traj) {
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    double s = 0.0;
    for (double v : traj.y.row(k)) s += v;
    worst = std::max(worst, std::abs(s / static_cast<double>(traj.dim()) - traj.eta));
  }
  return worst;
}

}  // namespace dynpriv
