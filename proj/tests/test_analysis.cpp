#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dynpriv/analysis.hpp"
#include "dynpriv/errors.hpp"
#include "support.hpp"

using namespace dynpriv;

namespace {

struct Setup {
  MaskedSystem sys;
  std::vector<double> x0;
};

Setup vanishing(const WeightedDigraph& g, std::uint64_t seed) {
  const std::size_t n = g.size();
  std::vector<double> x0(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5, 5);
  for (double& v : x0) v = u(rng);
  return {MaskedSystem(build_laplacian(g), random_mask_spec(MaskFamily::VanishingAffine, n, seed)),
          x0};
}

// e' M e for a dense row-major M
double quad(const std::vector<double>& M, const std::vector<double>& u, const std::vector<double>& v) {
  const std::size_t n = u.size();
  double s = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += u[i] * M[i * n + j] * v[j];
  return s;
}

// dV/dt with the symmetric part L + L' in all three Laplacian terms.
double vdot_symmetric_form(const MaskedSystem& sys, double t, std::span<const double> x, double eta) {
  const std::size_t n = sys.size();
  std::vector<double> S(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) S[i * n + j] = sys.laplacian()(i, j) + sys.laplacian()(j, i);
  std::vector<double> ge(n), g1(n), ga(n);
  double decay = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const MaskTerms m = mask_terms(sys.mask(), i, t);
    const double e = x[i] - eta;
    ge[i] = m.gain * e;
    g1[i] = m.gain;
    ga[i] = m.gain * m.offset;
    decay += m.gain_rate * e * e;  // gain_rate = -sigma phi e^{-sigma t}
  }
  return -quad(S, ge, ge) - eta * quad(S, ge, g1) - quad(S, ge, ga) + decay;
}

}  // namespace

TEST_CASE("V and V_mm basics") {
  const std::vector<double> phi{1, 2, 0.5}, sigma{1, 1, 2};
  const std::vector<double> flat{2, 2, 2};
  CHECK(lyapunov_v(0.0, flat, 2.0, phi, sigma) == 0.0);
  const std::vector<double> x{1, 3, 2};
  CHECK(lyapunov_v(0.0, x, 2.0, phi, sigma) == doctest::Approx(2 * 1 + 3 * 1));
  CHECK(lyapunov_v(1e3, x, 2.0, phi, sigma) == doctest::Approx(2.0));
  CHECK_THROWS_AS(lyapunov_v(0.0, x, 2.0, std::vector<double>{1}, sigma), DimensionMismatch);
  CHECK(lyapunov_vmm(flat) == 0.0);
  CHECK(lyapunov_vmm(std::vector<double>{0, 1}) == 1.0);
}

TEST_CASE("V is sandwiched between r^2 and (1 + max phi) r^2") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<double> x(n), phi(n), sigma(n);
    double max_phi = 0, r2 = 0;
    const double eta = 10 * u(rng) - 5;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 20 * u(rng) - 10;
      phi[i] = 5 * u(rng);
      sigma[i] = 0.1 + 2 * u(rng);
      max_phi = std::max(max_phi, phi[i]);
      r2 += (x[i] - eta) * (x[i] - eta);
    }
    const double v = lyapunov_v(10 * u(rng), x, eta, phi, sigma);
    CHECK(v >= r2 * (1 - 1e-14));
    CHECK(v <= (1 + max_phi) * r2 * (1 + 1e-14));
  }
}

TEST_CASE("analytic dV/dt agrees with finite differences on a directed graph") {
  const auto [sys, x0] = vanishing(random_balanced_digraph(8, 3, 2), 2);
  auto gap = [&](std::size_t every, double* scale) {
    const Trajectory tr = integrate(sys, x0, {0, 6, 1e-3, every});
    const VdotSeries s = vdot_along_trajectory(tr, sys);
    REQUIRE(s.analytic.size() == tr.size());
    double worst = 0;
    for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
      worst = std::max(worst, std::abs(s.analytic[k] - s.finite_difference[k]));
      *scale = std::max(*scale, std::abs(s.analytic[k]));
      const auto& t = s.terms[k];
      CHECK(s.analytic[k] == doctest::Approx(t[0] + t[1] + t[2] + t[3]));
    }
    return worst;
  };
  double scale = 0;
  const double fine = gap(1, &scale), coarse = gap(2, &scale);
  CHECK(fine < 1e-3 * scale);
  // second-order differences: halving the spacing quarters the gap
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));

  // Putting L + L' into the bilinear terms breaks the agreement on this
  // nonsymmetric Laplacian.
  const Trajectory tr = integrate(sys, x0, {0, 6, 1e-3, 1});
  const VdotSeries s = vdot_along_trajectory(tr, sys);
  double sym_gap = 0;
  for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
    sym_gap = std::max(sym_gap, std::abs(vdot_symmetric_form(sys, tr.times[k], tr.x.row(k), tr.eta) -
                                         s.finite_difference[k]));
  }
  CHECK(sym_gap > 100 * fine);
}

TEST_CASE("the symmetric form is exact on an undirected graph") {
  const WeightedDigraph sym(4, {{0, 1, 1}, {1, 0, 1}, {1, 2, 2}, {2, 1, 2}, {2, 3, 1}, {3, 2, 1}, {3, 0, 1}, {0, 3, 1}});
  const auto [sys, x0] = vanishing(sym, 7);
  const Trajectory tr = integrate(sys, x0, {0, 2, 1e-3, 10});
  const VdotSeries s = vdot_along_trajectory(tr, sys);
  for (std::size_t k = 0; k < tr.size(); k += 7) {
    CHECK(vdot_symmetric_form(sys, tr.times[k], tr.x.row(k), tr.eta) ==
          doctest::Approx(s.analytic[k]).epsilon(1e-10));
  }
}

TEST_CASE("dV/dt at consensus and in the limit") {
  const auto [sys, x0] = vanishing(random_balanced_digraph(5, 2, 3), 3);
  Trajectory at_eta;
  at_eta.x = SampleMatrix(5);
  at_eta.y = SampleMatrix(5);
  at_eta.eta = 1.5;
  for (double t : {0.0, 0.5, 1.0}) {
    at_eta.times.push_back(t);
    at_eta.x.push_back(std::vector<double>(5, 1.5));
    at_eta.y.push_back(std::vector<double>(5, 0.0));
  }
  const VdotSeries s = vdot_along_trajectory(at_eta, sys);
  for (const auto& t : s.terms) {
    CHECK(t[0] == 0.0);
    CHECK(t[3] == 0.0);
  }

  // late in time the expansion reduces to -e'(L + L')e
  double slowest = 1e9;
  for (const auto& p : sys.mask().params()) slowest = std::min({slowest, p.sigma, p.delta});
  const double t_late = 50 / slowest;
  Trajectory late;
  late.x = SampleMatrix(5);
  late.y = SampleMatrix(5);
  late.eta = 0.0;
  const std::vector<double> e{1, -2, 0.5, 0.25, 0.25};
  for (int k = 0; k < 3; ++k) {
    late.times.push_back(t_late + k);
    late.x.push_back(e);
    late.y.push_back(e);
  }
  const VdotSeries ls = vdot_along_trajectory(late, sys);
  std::vector<double> S(25);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) S[i * 5 + j] = sys.laplacian()(i, j) + sys.laplacian()(j, i);
  CHECK(std::abs(ls.analytic[0] + quad(S, e, e)) < 1e-6);

  const MaskedSystem plain(sys.laplacian(), MaskSpec::identity(5));
  CHECK_THROWS_AS(vdot_along_trajectory(at_eta, plain), WrongMaskFamily);
}

TEST_CASE("comparison ODE") {
  // with negligible forcing the solution is v0 / (1 + a v0 t)
  const ComparisonParams quiet{2, 1e-15, 1e-15, 1, 1, 3, 0};
  const ScalarTrajectory q = solve_comparison_ode(quiet, 5, 1e-3);
  for (std::size_t k = 0; k < q.times.size(); k += 500) {
    CHECK(q.values[k] == doctest::Approx(3 / (1 + 6 * q.times[k])).epsilon(1e-9));
  }
  // starting at zero the forcing lifts v, then it decays back
  const ComparisonParams lift{1, 1, 1, 1, 1, 0, 0};
  const ScalarTrajectory l = solve_comparison_ode(lift, 50, 1e-2);
  const double peak = *std::max_element(l.values.begin(), l.values.end());
  CHECK(peak > 0.1);
  CHECK(l.values.back() < 0.1 * peak);
  for (double v : l.values) {
    CHECK(v >= -1e-12);
    CHECK(v <= comparison_bound(lift));
  }
  CHECK(comparison_bound(ComparisonParams{0.5, 1, 1, 1, 1, 0, 0}) == 5.0);
  CHECK_THROWS_AS(solve_comparison_ode({0, 1, 1, 1, 1, 0, 0}, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(solve_comparison_ode(lift, 1, 0), std::invalid_argument);
  // a step far past the stability limit drives v negative
  CHECK_THROWS_AS(solve_comparison_ode({2, 1, 1, 1, 1, 10, 0}, 10, 1.0), NonnegativityBreach);
}

TEST_CASE("limit-system deviation") {
  const WeightedDigraph g = random_balanced_digraph(6, 3, 4);
  const MaskedSystem plain(build_laplacian(g), MaskSpec::identity(6));
  CHECK(limit_system_deviation(plain, 0.0, 10, 64, 1) == 0.0);

  const MaskedSystem sys(build_laplacian(g), random_mask_spec(MaskFamily::VanishingAffine, 6, 4));
  double previous = 1e300;
  for (double t : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
    const double d = limit_system_deviation(sys, t, 10, 256, 0);
    CHECK(d <= previous);
    CHECK(d <= deviation_envelope(sys, t, 10) * (1 + 1e-12));
    previous = d;
  }
  CHECK(limit_system_deviation(sys, 3.0, 10, 256, 5, kernels::Exec::Serial) ==
        limit_system_deviation(sys, 3.0, 10, 256, 5, kernels::Exec::Parallel));

  double slowest = 1e9, max_gamma = 0;
  for (const auto& p : sys.mask().params()) {
    slowest = std::min({slowest, p.sigma, p.delta});
    max_gamma = std::max(max_gamma, std::abs(p.gamma));
  }
  const double late = limit_system_deviation(sys, 50 / slowest, 10, 256, 0);
  CHECK(late < 1e-9 * (10 + max_gamma) * sys.laplacian().inf_norm());
}

TEST_CASE("convergence time and V_mm violations") {
  const MaskedSystem plain(build_laplacian(testing::directed_cycle(4)), MaskSpec::identity(4));
  const std::vector<double> flat(4, 2.0);
  const Trajectory still = integrate(plain, flat, {3.0, 1, 0.1, 1});
  CHECK(convergence_time(still, 1e-3) == 3.0);
  const std::vector<double> x0{1, 2, 3, 4};
  const Trajectory tr = integrate(plain, x0, {0, 30, 1e-2, 1});
  CHECK(convergence_time(tr, 10.0) == 0.0);
  const auto tc = convergence_time(tr, 1e-3);
  REQUIRE(tc);
  CHECK(*tc > 0);
  CHECK_FALSE(convergence_time(integrate(plain, x0, {0, 0.5, 1e-2, 1}), 1e-3));
  CHECK(vmm_violation_instants(tr).empty());

  Trajectory bump;
  bump.x = SampleMatrix(2);
  bump.y = SampleMatrix(2);
  const double rows[][2] = {{0, 1}, {0, 0.5}, {0, 0.7}, {0, 0.7}, {0, 0.2}};
  for (int k = 0; k < 5; ++k) {
    bump.times.push_back(k);
    bump.x.push_back(std::vector<double>{rows[k][0], rows[k][1]});
    bump.y.push_back(std::vector<double>{0, 0});
  }
  CHECK(vmm_violation_instants(bump) == std::vector<double>{2.0});
}

TEST_CASE("algebraic connectivity") {
  CHECK(algebraic_connectivity(build_laplacian(testing::complete_graph(5))) == doctest::Approx(5.0));
  for (std::size_t n : {3u, 5u, 8u}) {
    const double expected = 1 - std::cos(2 * M_PI / static_cast<double>(n));
    CHECK(algebraic_connectivity(build_laplacian(testing::directed_cycle(n))) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("convergence time barely depends on the starting instant for fast masks") {
  const WeightedDigraph g = random_balanced_digraph(8, 8, 3);
  MaskSpec mask = with_uniform_rates(random_mask_spec(MaskFamily::VanishingAffine, 8, 3), 5.0, 5.0);
  const MaskedSystem sys(build_laplacian(g), mask);
  const std::vector<double> x0{3, -1, 4, 1, -5, 9, -2, 6};
  std::vector<double> spans;
  for (double t0 : {0.0, 5.0, 20.0}) {
    const Trajectory tr = integrate(sys, x0, {t0, 60, 1e-2, 1});
    const auto tc = convergence_time(tr, 1e-3);
    REQUIRE(tc);
    spans.push_back(*tc - t0);
  }
  const auto [lo, hi] = std::minmax_element(spans.begin(), spans.end());
  CHECK((*hi - *lo) < 0.2 * *hi);
}
