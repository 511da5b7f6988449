#include "dynpriv/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dynpriv/errors.hpp"
#include "dynpriv/kernels.hpp"

namespace dynpriv {

std::vector<std::size_t> ObservationLog::targets() const {
  if (!target_nodes.empty()) return target_nodes;
  std::vector<std::size_t> all(dim());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

ObservationLog public_log(const Trajectory& traj, const BalancedLaplacian& L,
                          std::optional<MaskFamily> assumed_family) {
  ObservationLog log;
  log.times = traj.times;
  log.y = traj.y;
  log.laplacian = L;
  log.known_family = assumed_family;
  return log;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Recovered: return "recovered";
    case Outcome::Ambiguous: return "ambiguous";
    case Outcome::Failed: return "failed";
  }
  return "?";
}

double uniform_spacing(std::span<const double> times) {
  if (times.size() < 5) {
    throw TooFewSamples("need at least 5 samples, got " + std::to_string(times.size()));
  }
  const double h = times[1] - times[0];
  if (!(h > 0)) throw NonUniformGrid("sample times must increase");
  for (std::size_t k = 1; k + 1 < times.size(); ++k) {
    const double d = times[k + 1] - times[k];
    if (std::abs(d - h) > 1e-6 * h) {
      throw NonUniformGrid("spacing " + std::to_string(d) + " at sample " + std::to_string(k) +
                           " differs from " + std::to_string(h));
    }
  }
  return h;
}

SampleMatrix estimate_ydot(const ObservationLog& log) {
  const double h = uniform_spacing(log.times);
  const std::size_t m = log.size();
  const std::size_t n = log.dim();
  const double inv = 1.0 / (12.0 * h);
  SampleMatrix out(n);
  out.reserve_rows(m);
  std::vector<double> row(n);
  const SampleMatrix& y = log.y;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      double d = 0.0;
      if (k >= 2 && k + 2 < m) {
        d = -y(k + 2, j) + 8.0 * y(k + 1, j) - 8.0 * y(k - 1, j) + y(k - 2, j);
      } else if (k == 0) {
        d = -25.0 * y(0, j) + 48.0 * y(1, j) - 36.0 * y(2, j) + 16.0 * y(3, j) - 3.0 * y(4, j);
      } else if (k == 1) {
        d = -3.0 * y(0, j) - 10.0 * y(1, j) + 18.0 * y(2, j) - 6.0 * y(3, j) + y(4, j);
      } else if (k == m - 1) {
        d = 25.0 * y(k, j) - 48.0 * y(k - 1, j) + 36.0 * y(k - 2, j) - 16.0 * y(k - 3, j) +
            3.0 * y(k - 4, j);
      } else {  // k == m - 2
        d = 3.0 * y(k + 1, j) + 10.0 * y(k, j) - 18.0 * y(k - 1, j) + 6.0 * y(k - 2, j) -
            y(k - 3, j);
      }
      row[j] = d * inv;
    }
    out.push_back(row);
  }
  return out;
}

std::optional<ExponentialFit> fit_exponential(std::span<const double> times,
                                              std::span<const double> signal, double floor) {
  double st = 0, sl = 0, stt = 0, stl = 0;
  std::size_t used = 0;
  int sign = 0;
  bool mixed = false;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double r = signal[k];
    if (!(std::abs(r) > floor)) continue;
    const int s = r > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) mixed = true;
    const double l = std::log(std::abs(r));
    st += times[k];
    sl += l;
    stt += times[k] * times[k];
    stl += times[k] * l;
    ++used;
  }
  if (used < 2) return std::nullopt;
  const double u = static_cast<double>(used);
  const double denom = u * stt - st * st;
  if (!(std::abs(denom) > 0)) return std::nullopt;
  const double slope = (u * stl - st * sl) / denom;
  const double intercept = (sl - slope * st) / u;

  double sq = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double r = signal[k];
    if (!(std::abs(r) > floor)) continue;
    const double miss = std::log(std::abs(r)) - (intercept + slope * times[k]);
    sq += miss * miss;
  }
  ExponentialFit fit;
  fit.delta = -slope;
  fit.amplitude = sign * std::exp(intercept);
  fit.residual = std::sqrt(sq / u);
  fit.used = used;
  // A sign change cannot come from a single exponential.
  if (mixed) fit.residual = std::max(fit.residual, std::numeric_limits<double>::max());
  return fit;
}

void score_against_truth(AttackReport& report, std::span<const double> x0_truth) {
  for (NodeVerdict& v : report.nodes) {
    if (!v.x0_estimate || v.node >= x0_truth.size()) continue;
    const double truth = x0_truth[v.node];
    v.relative_error = std::abs(*v.x0_estimate - truth) / std::max(std::abs(truth), 1.0);
  }
}

bool breached(const NodeVerdict& v) {
  return v.outcome == Outcome::Recovered && v.relative_error &&
         *v.relative_error < kRecoveryTolerance;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

struct ResidualSignals {
  SampleMatrix flow;   // f(y) = -L y
  SampleMatrix ydot;
};

ResidualSignals residual_signals(const ObservationLog& log) {
  if (log.laplacian.size() != log.dim()) {
    throw DimensionMismatch("log has " + std::to_string(log.dim()) +
                            " outputs but the Laplacian is " +
                            std::to_string(log.laplacian.size()) + "-dimensional");
  }
  ResidualSignals s{SampleMatrix(log.dim()), estimate_ydot(log)};
  s.flow.reserve_rows(log.size());
  std::vector<double> row(log.dim());
  for (std::size_t k = 0; k < log.size(); ++k) {
    kernels::neg_laplacian_apply_serial(log.laplacian.sparse(), log.y.row(k), row);
    s.flow.push_back(row);
  }
  return s;
}

// One candidate gain c: r = f - ydot / c, fitted as delta gamma e^{-delta t}.
std::optional<Candidate> fit_candidate(const ObservationLog& log, const ResidualSignals& sig,
                                       std::size_t node, double c, bool* below_floor) {
  std::vector<double> r(log.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = sig.flow(k, node) - sig.ydot(k, node) / c;
  const double t0 = log.times.front();
  const double y0 = log.y(0, node);
  const auto fit = fit_exponential(log.times, r);
  if (!fit) {
    *below_floor = true;
    return Candidate{c, 0.0, 0.0, y0 / c, 0.0};
  }
  *below_floor = false;
  if (!(fit->delta > 0) || fit->residual == std::numeric_limits<double>::max()) {
    return std::nullopt;
  }
  Candidate cand;
  cand.c = c;
  cand.delta = fit->delta;
  cand.gamma = r.front() * std::exp(fit->delta * t0) / fit->delta;
  cand.x0 = y0 / c - cand.gamma * std::exp(-fit->delta * t0);
  cand.residual = fit->residual;
  return cand;
}

void require_family(const ObservationLog& log, MaskFamily expected, const char* attack) {
  if (log.known_family != expected) {
    throw PreconditionUnmet(std::string(attack) + " attack needs the log tagged with the " +
                            std::string(to_string(expected)) + " structure");
  }
}

}  // namespace

AttackReport attack_additive(const ObservationLog& log) {
  require_family(log, MaskFamily::Additive, "additive");
  const ResidualSignals sig = residual_signals(log);
  AttackReport report{"additive", std::nullopt, {}};
  for (std::size_t node : log.targets()) {
    NodeVerdict v;
    v.node = node;
    bool below = false;
    const auto cand = fit_candidate(log, sig, node, 1.0, &below);
    if (!cand) {
      v.outcome = Outcome::Failed;
      v.reason = "residual signal is not a single decaying exponential";
      v.residual = std::numeric_limits<double>::max();
    } else {
      v.x0_estimate = cand->x0;
      v.residual = cand->residual;
      v.below_floor = below;
      v.candidates = {*cand};
      if (below) {
        v.outcome = Outcome::Recovered;
        v.reason = "residual below the noise floor: y(t0) taken as x(t0)";
      } else if (cand->residual < kFitResidualThreshold) {
        v.outcome = Outcome::Recovered;
        v.reason = "delta = " + fmt(cand->delta) + ", gamma = " + fmt(cand->gamma);
      } else {
        v.outcome = Outcome::Failed;
        v.reason = "model mismatch: log-space residual " + fmt(cand->residual);
      }
    }
    report.nodes.push_back(std::move(v));
  }
  return report;
}

AttackReport attack_affine(const ObservationLog& log, std::span<const double> c_grid) {
  require_family(log, MaskFamily::Affine, "affine");
  if (c_grid.empty()) throw std::invalid_argument("affine attack needs at least one gain");
  for (double c : c_grid) {
    if (!(c > 0)) throw std::invalid_argument("candidate gains must be positive");
  }
  const ResidualSignals sig = residual_signals(log);
  double scale = 1.0;
  for (double v : log.y.row(0)) scale = std::max(scale, std::abs(v));

  AttackReport report{"affine", std::nullopt, {}};
  for (std::size_t node : log.targets()) {
    NodeVerdict v;
    v.node = node;
    std::vector<Candidate> fits;
    for (double c : c_grid) {
      bool below = false;
      if (auto cand = fit_candidate(log, sig, node, c, &below)) fits.push_back(*cand);
    }
    if (fits.empty()) {
      v.outcome = Outcome::Failed;
      v.reason = "no candidate gain leaves a single decaying exponential";
      v.residual = std::numeric_limits<double>::max();
      report.nodes.push_back(std::move(v));
      continue;
    }
    const auto best = *std::min_element(fits.begin(), fits.end(), [](const auto& a, const auto& b) {
      return a.residual < b.residual;
    });
    std::vector<Candidate> survivors;
    for (const Candidate& c : fits) {
      if (c.residual <= best.residual * (1.0 + kAmbiguityBand)) survivors.push_back(c);
    }
    const auto [lo, hi] = std::minmax_element(
        survivors.begin(), survivors.end(),
        [](const Candidate& a, const Candidate& b) { return a.x0 < b.x0; });
    const double spread = hi->x0 - lo->x0;
    v.residual = best.residual;
    v.candidates = survivors;

    if (best.residual >= kFitResidualThreshold) {
      v.outcome = Outcome::Failed;
      v.reason = "best candidate c = " + fmt(best.c) + " leaves log-space residual " +
                 fmt(best.residual);
    } else if (survivors.size() >= 2 && spread > kRecoveryTolerance * scale) {
      v.outcome = Outcome::Ambiguous;
      v.reason = std::to_string(survivors.size()) + " gains fit within 10%; implied x0 spread " +
                 fmt(spread);
    } else {
      v.outcome = Outcome::Recovered;
      v.x0_estimate = best.x0;
      v.reason = "c = " + fmt(best.c) + " identified (" + std::to_string(fits.size()) +
                 " candidates, " + std::to_string(survivors.size()) + " within 10%)";
    }
    report.nodes.push_back(std::move(v));
  }
  return report;
}

double simpson(std::span<const double> f, double h) {
  const std::size_t m = f.size();
  if (m < 2) return 0.0;
  const std::size_t intervals = m - 1;
  if (intervals == 1) return 0.5 * h * (f[0] + f[1]);
  std::size_t even_end = intervals % 2 == 0 ? intervals : intervals - 3;
  double s = 0.0;
  for (std::size_t k = 0; k + 2 <= even_end; k += 2) {
    s += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
  }
  if (even_end != intervals) {
    const std::size_t k = even_end;
    s += 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
  }
  return s;
}

AttackReport attack_integral(const ObservationLog& log, std::size_t victim, std::size_t attacker,
                             const WeightedDigraph& graph) {
  const std::size_t n = log.dim();
  if (graph.size() != n || log.laplacian.size() != n) {
    throw DimensionMismatch("graph, Laplacian and log disagree on the number of nodes");
  }
  if (victim >= n || attacker >= n || victim == attacker) {
    throw std::invalid_argument("victim and attacker must be distinct nodes of the graph");
  }
  const auto nested = check_assumption1(graph);
  if (std::find(nested.begin(), nested.end(), std::pair{victim, attacker}) == nested.end()) {
    throw PreconditionUnmet("node " + std::to_string(attacker) + " does not see every input of node " +
                            std::to_string(victim));
  }
  const double h = uniform_spacing(log.times);

  // Attacker-local view: only the outputs the attacker receives.
  auto visible = graph.in_neighborhoods()[attacker];
  visible.insert(std::lower_bound(visible.begin(), visible.end(), attacker), attacker);
  std::vector<std::size_t> local_index(n, n);
  for (std::size_t k = 0; k < visible.size(); ++k) local_index[visible[k]] = k;
  SampleMatrix local(visible.size());
  local.reserve_rows(log.size());
  std::vector<double> row(visible.size());
  for (std::size_t k = 0; k < log.size(); ++k) {
    for (std::size_t m = 0; m < visible.size(); ++m) row[m] = log.y(k, visible[m]);
    local.push_back(row);
  }
  std::vector<std::pair<std::size_t, double>> victim_row;  // (local column, L entry)
  for (std::size_t j = 0; j < n; ++j) {
    const double l = log.laplacian(victim, j);
    if (l == 0.0) continue;
    if (local_index[j] == n) {
      throw PreconditionUnmet("Laplacian row of node " + std::to_string(victim) +
                              " reads an output the attacker cannot see");
    }
    victim_row.emplace_back(local_index[j], l);
  }

  const std::size_t m = log.size();
  const auto last = local.row(m - 1);
  const auto [lo, hi] = std::minmax_element(last.begin(), last.end());
  if (*hi - *lo >= 1e-6) {
    throw HorizonTooShort("visible outputs still spread by " + fmt(*hi - *lo) + " at t = " +
                          fmt(log.times.back()));
  }

  std::vector<double> flow(m);
  for (std::size_t k = 0; k < m; ++k) {
    double s = 0.0;
    for (const auto& [col, l] : victim_row) s -= l * local(k, col);
    flow[k] = s;
  }
  const double integral = simpson(flow, h);
  const double estimate = local(m - 1, local_index[victim]) - integral;

  // Tail of the integral beyond T from the decay over the last decade.
  const std::size_t decade = std::max<std::size_t>(1, m / 10);
  const double f_end = std::abs(flow[m - 1]);
  const double f_start = std::abs(flow[m - 1 - decade]);
  double tail = 0.0;
  if (f_end > 0.0) {
    const double span = log.times[m - 1] - log.times[m - 1 - decade];
    tail = f_end < f_start ? f_end * span / std::log(f_start / f_end)
                           : std::numeric_limits<double>::infinity();
  }

  NodeVerdict v;
  v.node = victim;
  v.x0_estimate = estimate;
  v.residual = std::isfinite(tail) ? tail : std::numeric_limits<double>::max();
  if (tail < 1e-6 * std::max(1.0, std::abs(estimate))) {
    v.outcome = Outcome::Recovered;
    v.reason = "flow integral " + fmt(integral) + ", tail bound " + fmt(tail);
  } else {
    v.outcome = Outcome::Failed;
    v.reason = "flow integral has not converged: tail bound " + fmt(tail);
  }
  return AttackReport{"integral", attacker, {std::move(v)}};
}

std::vector<AttackReport> run_attack_suite(const ObservationLog& log, const WeightedDigraph& graph,
                                           const AttackSuite& suite) {
  std::vector<AttackReport> reports;
  if (suite.additive) {
    ObservationLog tagged = log;
    tagged.known_family = MaskFamily::Additive;
    reports.push_back(attack_additive(tagged));
  }
  if (!suite.affine_c_grid.empty()) {
    ObservationLog tagged = log;
    tagged.known_family = MaskFamily::Affine;
    reports.push_back(attack_affine(tagged, suite.affine_c_grid));
  }
  if (suite.integral) {
    for (const auto& [victim, attacker] : check_assumption1(graph)) {
      try {
        reports.push_back(attack_integral(log, victim, attacker, graph));
      } catch (const HorizonTooShort& e) {
        NodeVerdict v;
        v.node = victim;
        v.outcome = Outcome::Failed;
        v.reason = e.what();
        reports.push_back(AttackReport{"integral", attacker, {std::move(v)}});
      }
    }
  }
  return reports;
}

DiscernibilitySummary discernibility_report(const Scenario& scenario) {
  const BalancedLaplacian L = build_laplacian(scenario.graph);
  const MaskedSystem sys(L, scenario.mask);
  const Trajectory traj = integrate(sys, scenario.x0, scenario.integration);
  const ObservationLog log = public_log(traj, L);

  DiscernibilitySummary out;
  out.assumption1_holds = check_assumption1(scenario.graph).empty();
  out.reports = run_attack_suite(log, scenario.graph, scenario.attacks);
  for (AttackReport& report : out.reports) {
    score_against_truth(report, scenario.x0);
    for (const NodeVerdict& v : report.nodes) {
      DiscernibilityRow row;
      row.family = scenario.mask.family();
      row.attack = report.attack;
      row.attacker = report.attacker;
      row.assumption1_holds = out.assumption1_holds;
      row.node = v.node;
      row.outcome = v.outcome;
      row.relative_error = v.relative_error;
      row.breached = breached(v);
      if (row.breached) out.breached_nodes.push_back(v.node);
      out.rows.push_back(row);
    }
  }
  std::sort(out.breached_nodes.begin(), out.breached_nodes.end());
  out.breached_nodes.erase(std::unique(out.breached_nodes.begin(), out.breached_nodes.end()),
                           out.breached_nodes.end());
  out.dynamically_private_empirical = out.breached_nodes.empty();
  if (out.dynamically_private_empirical) {
    out.label =
        "dynamically private (empirically): no node recovered within 1% by the additive, "
        "affine or integral attacks; this is not a proof against other reconstructions";
  } else {
    std::ostringstream os;
    os << "not private: " << out.breached_nodes.size() << " node(s) recovered within 1%";
    out.label = os.str();
  }
  return out;
}

}  // namespace dynpriv
