#include "dynpriv/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "dynpriv/errors.hpp"
#include "dynpriv/rk4.hpp"

namespace dynpriv {

double lyapunov_v(double t, std::span<const double> x, double eta, std::span<const double> phi,
                  std::span<const double> sigma) {
  if (phi.size() != x.size() || sigma.size() != x.size()) {
    throw DimensionMismatch("lyapunov_v: x, phi and sigma must have the same length");
  }
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = x[i] - eta;
    v += (1.0 + phi[i] * std::exp(-sigma[i] * t)) * e * e;
  }
  return v;
}

double lyapunov_vmm(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("lyapunov_vmm of an empty state");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

namespace {

// Three-point Lagrange derivative at the middle (or end) node of a possibly
// non-uniform stencil.
double lagrange_derivative(double t0, double t1, double t2, double f0, double f1, double f2,
                           double at) {
  const double d0 = ((at - t1) + (at - t2)) / ((t0 - t1) * (t0 - t2));
  const double d1 = ((at - t0) + (at - t2)) / ((t1 - t0) * (t1 - t2));
  const double d2 = ((at - t0) + (at - t1)) / ((t2 - t0) * (t2 - t1));
  return d0 * f0 + d1 * f1 + d2 * f2;
}

}  // namespace

VdotSeries vdot_along_trajectory(const Trajectory& traj, const MaskedSystem& sys) {
  const MaskSpec& mask = sys.mask();
  if (mask.family() != MaskFamily::VanishingAffine) {
    throw WrongMaskFamily("the dV/dt expansion applies to the VanishingAffine mask only, got " +
                          std::string(to_string(mask.family())));
  }
  const std::size_t n = sys.size();
  if (traj.dim() != n) throw DimensionMismatch("trajectory and system dimensions differ");
  if (traj.size() < 3) throw TooFewSamples("dV/dt needs at least 3 samples");

  std::vector<double> phi(n), sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = mask.params(i).phi;
    sigma[i] = mask.params(i).sigma;
  }
  const CsrMatrix& L = sys.laplacian().sparse();
  const double eta = traj.eta;

  VdotSeries out;
  out.times = traj.times;
  out.v.resize(traj.size());
  out.terms.resize(traj.size());
  out.analytic.resize(traj.size());

  std::vector<double> e(n), g(n), ge(n), a(n), ge_vec(n), lg(n), tmp(n);
  auto apply_L = [&](std::span<const double> v, std::span<double> res) {
    kernels::neg_laplacian_apply_serial(L, v, res);
    for (auto& r : res) r = -r;
  };
  auto dot = [](std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  };

  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    const auto x = traj.x.row(k);
    for (std::size_t i = 0; i < n; ++i) {
      const MaskTerms m = mask_terms(mask, i, t);
      e[i] = x[i] - eta;
      g[i] = m.gain;
      a[i] = m.offset;
      ge[i] = g[i] * e[i];  // G e, the left factor of every bilinear term
    }
    // quadratic: -(Ge)' (L + L') (Ge) = -2 (Ge)' L (Ge)
    apply_L(ge, lg);
    const double quadratic = -2.0 * dot(ge, lg);
    // consensus: -2 eta (Ge)' L (G 1)
    apply_L(g, lg);
    const double consensus = -2.0 * eta * dot(ge, lg);
    // offset: -2 (Ge)' L (G a)
    for (std::size_t i = 0; i < n; ++i) tmp[i] = g[i] * a[i];
    apply_L(tmp, lg);
    const double offset = -2.0 * dot(ge, lg);
    double decay = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      decay -= sigma[i] * phi[i] * std::exp(-sigma[i] * t) * e[i] * e[i];
    }
    out.terms[k] = {quadratic, consensus, offset, decay};
    out.analytic[k] = quadratic + consensus + offset + decay;
    out.v[k] = lyapunov_v(t, x, eta, phi, sigma);
  }

  const std::size_t m = traj.size();
  out.finite_difference.resize(m);
  const auto& T = out.times;
  const auto& V = out.v;
  out.finite_difference[0] = lagrange_derivative(T[0], T[1], T[2], V[0], V[1], V[2], T[0]);
  for (std::size_t k = 1; k + 1 < m; ++k) {
    out.finite_difference[k] =
        lagrange_derivative(T[k - 1], T[k], T[k + 1], V[k - 1], V[k], V[k + 1], T[k]);
  }
  out.finite_difference[m - 1] = lagrange_derivative(T[m - 3], T[m - 2], T[m - 1], V[m - 3],
                                                     V[m - 2], V[m - 1], T[m - 1]);
  return out;
}

ScalarTrajectory solve_comparison_ode(const ComparisonParams& p, double horizon, double step) {
  if (!(p.a > 0 && p.b > 0 && p.c > 0 && p.delta1 > 0 && p.delta2 > 0)) {
    throw std::invalid_argument("comparison ODE coefficients and rates must be positive");
  }
  if (!(p.v0 >= 0 && p.t0 >= 0)) {
    throw std::invalid_argument("comparison ODE needs v0 >= 0 and t0 >= 0");
  }
  if (!(horizon > 0 && step > 0)) {
    throw std::invalid_argument("comparison ODE needs positive horizon and step");
  }
  auto f = [&](double t, std::span<const double> v, std::span<double> dv) {
    dv[0] = -p.a * v[0] * v[0] + p.b * v[0] * std::exp(-p.delta1 * t) +
            p.c * std::exp(-p.delta2 * t);
  };
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  ScalarTrajectory out;
  out.times.reserve(steps + 1);
  out.values.reserve(steps + 1);
  std::vector<double> v{p.v0};
  out.times.push_back(p.t0);
  out.values.push_back(p.v0);
  Rk4 stepper(1);
  const double t_end = p.t0 + horizon;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = p.t0 + static_cast<double>(k) * step;
    const bool last = k + 1 == steps;
    stepper.step(f, t, v, last ? t_end - t : step);
    const double t_next = last ? t_end : p.t0 + static_cast<double>(k + 1) * step;
    if (v[0] < -1e-12 || !std::isfinite(v[0])) {
      throw NonnegativityBreach("comparison solution reached " + std::to_string(v[0]) +
                                " at t = " + std::to_string(t_next) + "; step too large");
    }
    out.times.push_back(t_next);
    out.values.push_back(v[0]);
  }
  return out;
}

double comparison_bound(const ComparisonParams& p) {
  const double forcing = p.b * std::exp(-p.delta1 * p.t0) + p.c * std::exp(-p.delta2 * p.t0);
  return std::max({1.0, p.v0, forcing / p.a}) + 1.0;
}

double limit_system_deviation(const MaskedSystem& sys, double t, double box_radius,
                              std::size_t sample_count, std::uint64_t seed,
                              kernels::Exec exec) {
  if (sample_count < 1) throw std::invalid_argument("limit_system_deviation needs samples");
  const std::size_t n = sys.size();
  std::vector<double> points(sample_count * n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box_radius, box_radius);
  for (auto& p : points) p = u(rng);

  if (exec == kernels::Exec::Auto) {
    exec = sample_count * n >= (1u << 16) ? kernels::Exec::Parallel : kernels::Exec::Serial;
  }
  std::vector<MaskTerms> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = mask_terms(sys.mask(), i, t);
  std::vector<double> per_sample(sample_count);
  const CsrMatrix& L = sys.laplacian().sparse();
  kernels::for_each_index(sample_count, exec, 0, [&](std::size_t s) {
    std::span<const double> x(points.data() + s * n, n);
    std::vector<double> gap(n), lg(n);
    // (g - 1) x + g a rather than h(x) - x: no cancellation once the mask
    // has nearly vanished.
    for (std::size_t i = 0; i < n; ++i) gap[i] = (terms[i].gain - 1.0) * x[i] + terms[i].gain * terms[i].offset;
    kernels::neg_laplacian_apply_serial(L, gap, lg);
    per_sample[s] = kernels::max_abs_serial(lg);
  });
  return *std::max_element(per_sample.begin(), per_sample.end());
}

double deviation_envelope(const MaskedSystem& sys, double t, double box_radius) {
  const std::size_t n = sys.size();
  std::vector<double> bound(n);
  for (std::size_t j = 0; j < n; ++j) {
    const MaskTerms m = mask_terms(sys.mask(), j, t);
    bound[j] = std::abs(m.gain - 1.0) * box_radius + m.gain * std::abs(m.offset);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(sys.laplacian()(i, j)) * bound[j];
    worst = std::max(worst, s);
  }
  return worst;
}

std::optional<double> convergence_time(const Trajectory& traj, double nu) {
  if (!(nu > 0)) throw std::invalid_argument("convergence tolerance must be positive");
  if (traj.size() == 0) return std::nullopt;
  auto outside = [&](std::size_t k) {
    for (double v : traj.x.row(k)) {
      if (!(std::abs(v - traj.eta) < nu)) return true;
    }
    return false;
  };
  for (std::size_t k = traj.size(); k-- > 0;) {
    if (outside(k)) {
      if (k + 1 == traj.size()) return std::nullopt;
      return traj.times[k + 1];
    }
  }
  return traj.times.front();
}

std::vector<double> vmm_violation_instants(const Trajectory& traj) {
  std::vector<double> instants;
  if (traj.size() == 0) return instants;
  double previous = lyapunov_vmm(traj.x.row(0));
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double current = lyapunov_vmm(traj.x.row(k));
    if (current > previous + 1e-12 * std::max(1.0, previous)) instants.push_back(traj.times[k]);
    previous = current;
  }
  return instants;
}

double algebraic_connectivity(const BalancedLaplacian& L) {
  const auto n = static_cast<Eigen::Index>(L.size());
  if (n < 2) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXd S(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      S(i, j) = 0.5 * (L(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +
                       L(static_cast<std::size_t>(j), static_cast<std::size_t>(i)));
    }
  }
  // 1 is an eigenvector of S with eigenvalue 0; lift it above the spectrum so
  // the smallest remaining eigenvalue is the one on the complement of 1.
  const double lift = S.trace() + 1.0;
  S.array() += lift / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

AnalysisReport analyze(const Trajectory& traj, const MaskedSystem& sys,
                       const AnalysisSettings& settings) {
  AnalysisReport r;
  r.eta = traj.eta;
  r.conservation_residual = conservation_residual(traj);
  r.public_average_drift = public_average_drift(traj);
  r.convergence_time = convergence_time(traj, settings.nu);
  r.vmm_violation_instants = vmm_violation_instants(traj);
  r.vmm_monotone = r.vmm_violation_instants.empty();
  for (double t : settings.deviation_times) {
    r.deviation_curve.emplace_back(
        t, limit_system_deviation(sys, t, settings.box_radius, settings.deviation_samples,
                                  settings.deviation_seed));
  }
  return r;
}

}  // namespace dynpriv
