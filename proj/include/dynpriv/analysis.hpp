#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dynpriv/dynamics.hpp"

namespace dynpriv {

// V(t, x) = (x - eta 1)' (I + Phi e^{-Sigma t}) (x - eta 1)
double lyapunov_v(double t, std::span<const double> x, double eta, std::span<const double> phi,
                  std::span<const double> sigma);

// max_i x_i - min_i x_i
double lyapunov_vmm(std::span<const double> x);

// dV/dt along a vanishing-affine trajectory, split into the four terms of
// the expansion with e = x - eta 1, G = I + Phi e^{-Sigma t},
// a = e^{-Delta t} gamma:
//   quadratic   -e' G (L + L') G e
//   consensus   -2 eta e' G L G 1
//   offset      -2 e' G L G a
//   gain decay  -e' Sigma Phi e^{-Sigma t} e
// The cross terms are bilinear (e against G 1 or a), so they carry 2L rather
// than the symmetric part L + L'; the two agree only when L is symmetric.
struct VdotSeries {
  std::vector<double> times;
  std::vector<double> v;
  std::vector<std::array<double, 4>> terms;
  std::vector<double> analytic;           // sum of the four terms
  std::vector<double> finite_difference;  // second-order differences of v
};

VdotSeries vdot_along_trajectory(const Trajectory& traj, const MaskedSystem& sys);

// v' = -a v^2 + b v e^{-delta1 t} + c e^{-delta2 t}
struct ComparisonParams {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double delta1 = 1.0;
  double delta2 = 1.0;
  double v0 = 0.0;
  double t0 = 0.0;
};

struct ScalarTrajectory {
  std::vector<double> times;
  std::vector<double> values;
};

// RK4 on the comparison ODE; the solution is never clamped. Throws
// NonnegativityBreach if v drops below -1e-12 and std::invalid_argument on
// invalid parameters.
ScalarTrajectory solve_comparison_ode(const ComparisonParams& p, double horizon, double step);

// Bound from the boundedness argument, plus one unit of slack for the
// transient of a start below the threshold:
// max(1, v0, (b e^{-delta1 t0} + c e^{-delta2 t0}) / a) + 1.
double comparison_bound(const ComparisonParams& p);

// max over sample_count uniform x in [-r, r]^n of ||L (h(t, x) - x)||_inf,
// the gap between the masked and limit vector fields. The sample set
// depends only on (n, r, sample_count, seed), so a fixed seed gives a
// curve in t over one common set.
double limit_system_deviation(const MaskedSystem& sys, double t, double box_radius,
                              std::size_t sample_count, std::uint64_t seed,
                              kernels::Exec exec = kernels::Exec::Auto);

// max_i sum_j |L_ij| (|g_j - 1| r + g_j |a_j|) with h_j = g_j (x + a_j):
// an upper bound of limit_system_deviation over the whole box.
double deviation_envelope(const MaskedSystem& sys, double t, double box_radius);

// First sample time after which ||x - eta 1||_inf < nu holds for every
// remaining sample; nullopt when the last sample is still outside.
std::optional<double> convergence_time(const Trajectory& traj, double nu);

// Sample instants t_{k+1} where V_mm strictly increased from t_k, with a
// relative rounding allowance of 1e-12.
std::vector<double> vmm_violation_instants(const Trajectory& traj);

// Smallest eigenvalue of (L + L') / 2 restricted to the complement of 1.
double algebraic_connectivity(const BalancedLaplacian& L);

struct AnalysisSettings {
  double nu = 1e-3;
  std::vector<double> deviation_times{0, 1, 2, 4, 8, 16, 32, 64};
  double box_radius = 10.0;
  std::size_t deviation_samples = 256;
  std::uint64_t deviation_seed = 0;
};

struct AnalysisReport {
  double eta = 0.0;
  double conservation_residual = 0.0;
  double public_average_drift = 0.0;
  std::optional<double> convergence_time;
  bool vmm_monotone = true;
  std::vector<double> vmm_violation_instants;
  std::vector<std::pair<double, double>> deviation_curve;
};

AnalysisReport analyze(const Trajectory& traj, const MaskedSystem& sys,
                       const AnalysisSettings& settings);

}  // namespace dynpriv
