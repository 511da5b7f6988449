#include "dynpriv/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "dynpriv/errors.hpp"
#include "dynpriv/svg.hpp"

namespace dynpriv {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
T get(const Json& j, const char* key, const char* where) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const char* where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

fs::path existing_file(const Json& j, const fs::path& base, const char* where) {
  fs::path p = get<std::string>(j, "file", where);
  if (p.is_relative()) p = base / p;
  if (!fs::exists(p)) throw ConfigError(std::string(where) + ": file not found: " + p.string());
  return p;
}

std::array<double, 2> range(const Json& j, const char* key, std::array<double, 2> fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = get<std::vector<double>>(j, key, "mask.ranges");
  if (v.size() != 2 || !(v[0] <= v[1])) {
    throw ConfigError(std::string("mask.ranges.") + key + " must be [lo, hi] with lo <= hi");
  }
  return {v[0], v[1]};
}

std::vector<double> read_x0_file(const fs::path& path) {
  const Json j = read_json_file(path);
  const Json& arr = j.is_object() && j.contains("x0") ? j.at("x0") : j;
  try {
    return arr.get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": expected an array of initial states: " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const Json& j, const fs::path& base) {
  reject_unknown(j, {"seed", "graph", "mask", "x0", "integrator", "analysis", "attacks", "plots",
                     "sweep", "description"},
                 "config");
  ExperimentConfig cfg;
  if (!j.contains("seed")) throw ConfigError("config: 'seed' is required");
  cfg.seed = get<std::uint64_t>(j, "seed", "config");

  if (!j.contains("graph")) throw ConfigError("config: 'graph' is required");
  const Json& g = j.at("graph");
  reject_unknown(g, {"file", "generate"}, "graph");
  if (g.contains("file")) {
    cfg.graph.file = existing_file(g, base, "graph");
  } else if (g.contains("generate")) {
    const Json& gen = g.at("generate");
    reject_unknown(gen, {"n", "extra_cycles"}, "graph.generate");
    cfg.graph.n = get<std::size_t>(gen, "n", "graph.generate");
    cfg.graph.extra_cycles = get_or<std::size_t>(gen, "extra_cycles", 0, "graph.generate");
    if (cfg.graph.n < 3) throw ConfigError("graph.generate.n must be at least 3");
  } else {
    throw ConfigError("graph: need 'file' or 'generate'");
  }

  if (j.contains("mask")) {
    const Json& m = j.at("mask");
    reject_unknown(m, {"file", "family", "ranges", "sigma", "delta"}, "mask");
    if (m.contains("file")) {
      cfg.mask.file = existing_file(m, base, "mask");
    } else {
      try {
        cfg.mask.family = parse_mask_family(get<std::string>(m, "family", "mask"));
      } catch (const InvalidParams& e) {
        throw ConfigError(std::string("mask: ") + e.what());
      }
    }
    if (m.contains("ranges")) {
      const Json& r = m.at("ranges");
      reject_unknown(r, {"c", "phi", "sigma", "gamma", "delta"}, "mask.ranges");
      cfg.mask.ranges.c = range(r, "c", cfg.mask.ranges.c);
      cfg.mask.ranges.phi = range(r, "phi", cfg.mask.ranges.phi);
      cfg.mask.ranges.sigma = range(r, "sigma", cfg.mask.ranges.sigma);
      cfg.mask.ranges.gamma = range(r, "gamma", cfg.mask.ranges.gamma);
      cfg.mask.ranges.delta = range(r, "delta", cfg.mask.ranges.delta);
    }
    if (m.contains("sigma")) cfg.mask.sigma = get<double>(m, "sigma", "mask");
    if (m.contains("delta")) cfg.mask.delta = get<double>(m, "delta", "mask");
  }

  if (j.contains("x0")) {
    const Json& x = j.at("x0");
    reject_unknown(x, {"file", "uniform"}, "x0");
    if (x.contains("file")) {
      cfg.x0.file = existing_file(x, base, "x0");
    } else {
      const auto u = get<std::vector<double>>(x, "uniform", "x0");
      if (u.size() != 2 || !(u[0] <= u[1])) throw ConfigError("x0.uniform must be [lo, hi]");
      cfg.x0.lo = u[0];
      cfg.x0.hi = u[1];
    }
  }

  if (j.contains("integrator")) {
    const Json& s = j.at("integrator");
    reject_unknown(s, {"step", "horizon", "sample_every"}, "integrator");
    cfg.integration.step = get_or(s, "step", cfg.integration.step, "integrator");
    cfg.integration.horizon = get_or(s, "horizon", cfg.integration.horizon, "integrator");
    cfg.integration.sample_every =
        get_or<std::size_t>(s, "sample_every", cfg.integration.sample_every, "integrator");
  }
  if (!(cfg.integration.step > 0) || !(cfg.integration.horizon > 0)) {
    throw ConfigError("integrator: step and horizon must be positive");
  }
  if (cfg.integration.sample_every < 1) throw ConfigError("integrator.sample_every must be >= 1");

  if (j.contains("analysis")) {
    const Json& a = j.at("analysis");
    reject_unknown(a, {"nu", "deviation_times", "box_radius", "deviation_samples", "deviation_seed"},
                   "analysis");
    AnalysisSettings& s = cfg.analysis;
    s.nu = get_or(a, "nu", s.nu, "analysis");
    s.deviation_times = get_or(a, "deviation_times", s.deviation_times, "analysis");
    s.box_radius = get_or(a, "box_radius", s.box_radius, "analysis");
    s.deviation_samples = get_or(a, "deviation_samples", s.deviation_samples, "analysis");
    s.deviation_seed = get_or(a, "deviation_seed", s.deviation_seed, "analysis");
  }

  if (j.contains("attacks")) {
    const Json& a = j.at("attacks");
    reject_unknown(a, {"additive", "affine_c_grid", "integral"}, "attacks");
    cfg.run_attacks = true;
    cfg.attacks.additive = get_or(a, "additive", cfg.attacks.additive, "attacks");
    cfg.attacks.affine_c_grid = get_or(a, "affine_c_grid", cfg.attacks.affine_c_grid, "attacks");
    cfg.attacks.integral = get_or(a, "integral", cfg.attacks.integral, "attacks");
    for (double c : cfg.attacks.affine_c_grid) {
      if (!(c > 0)) throw ConfigError("attacks.affine_c_grid entries must be positive");
    }
  }
  cfg.plots = get_or(j, "plots", cfg.plots, "config");

  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    reject_unknown(s, {"seeds", "sigma", "delta"}, "sweep");
    SweepGrid grid;
    grid.seeds = get_or(s, "seeds", std::vector<std::uint64_t>{cfg.seed}, "sweep");
    grid.sigma = get<std::vector<double>>(s, "sigma", "sweep");
    grid.delta = get<std::vector<double>>(s, "delta", "sweep");
    auto check = [](const std::vector<double>& v, const char* what) {
      if (v.empty()) throw ConfigError(std::string("sweep.") + what + " must be nonempty");
      for (double x : v) {
        if (!(x > 0)) throw ConfigError(std::string("sweep.") + what + " entries must be positive");
      }
    };
    if (grid.seeds.empty()) throw ConfigError("sweep.seeds must be nonempty");
    check(grid.sigma, "sigma");
    check(grid.delta, "delta");
    cfg.sweep = std::move(grid);
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(read_json_file(path), path.parent_path());
}

WeightedDigraph instantiate_graph(const ExperimentConfig& cfg) {
  if (cfg.graph.file) return graph_from_json(read_json_file(*cfg.graph.file));
  return random_balanced_digraph(cfg.graph.n, cfg.graph.extra_cycles, cfg.seed);
}

Instance instantiate(const ExperimentConfig& cfg) {
  Instance inst;
  inst.graph = instantiate_graph(cfg);
  const std::size_t n = inst.graph.size();
  if (cfg.mask.file) {
    inst.mask = mask_from_json(read_json_file(*cfg.mask.file));
  } else {
    inst.mask = random_mask_spec(cfg.mask.family, n, cfg.seed + 1, cfg.mask.ranges);
  }
  if (cfg.mask.sigma || cfg.mask.delta) {
    inst.mask = with_uniform_rates(inst.mask, cfg.mask.sigma, cfg.mask.delta);
  }
  if (cfg.x0.file) {
    inst.x0 = read_x0_file(*cfg.x0.file);
  } else {
    std::mt19937_64 rng(cfg.seed + 2);
    std::uniform_real_distribution<double> u(cfg.x0.lo, cfg.x0.hi);
    inst.x0.resize(n);
    for (double& v : inst.x0) v = u(rng);
  }
  if (inst.mask.size() != n || inst.x0.size() != n) {
    throw DimensionMismatch("graph has " + std::to_string(n) + " nodes, mask " +
                            std::to_string(inst.mask.size()) + ", x0 " +
                            std::to_string(inst.x0.size()));
  }
  return inst;
}

RunResult run_experiment(const ExperimentConfig& cfg, kernels::Exec exec) {
  RunResult r;
  r.instance = instantiate(cfg);
  const BalancedLaplacian L = build_laplacian(r.instance.graph);
  const MaskedSystem sys(L, r.instance.mask);
  r.trajectory = integrate(sys, r.instance.x0, cfg.integration, exec);
  r.analysis = analyze(r.trajectory, sys, cfg.analysis);
  r.algebraic_connectivity = algebraic_connectivity(L);
  if (cfg.run_attacks) {
    try {
      r.attacks = run_attack_suite(public_log(r.trajectory, L), r.instance.graph, cfg.attacks);
      for (AttackReport& a : r.attacks) score_against_truth(a, r.instance.x0);
    } catch (const Error& e) {
      r.attack_error = e.what();
    }
  }
  return r;
}

namespace {

Json attacks_json(const RunResult& r) {
  Json reports = Json::array();
  for (const AttackReport& a : r.attacks) reports.push_back(attack_report_to_json(a));
  Json out{{"reports", reports}};
  out["error"] = r.attack_error.empty() ? Json(nullptr) : Json(r.attack_error);
  return out;
}

std::vector<double> running_average(const SampleMatrix& m) {
  std::vector<double> avg(m.rows());
  for (std::size_t k = 0; k < m.rows(); ++k) {
    double s = 0;
    for (double v : m.row(k)) s += v;
    avg[k] = s / static_cast<double>(m.cols());
  }
  return avg;
}

std::string state_plot(const Trajectory& traj, const SampleMatrix& m, const std::string& title,
                       const std::string& ylabel) {
  std::vector<svg::Series> series;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    series.push_back({traj.times, m.column(j), svg::palette(j), false, 0.8});
  }
  series.push_back({traj.times, running_average(m), "black", true, 2.0});
  return svg::line_plot({title, "t", ylabel}, series);
}

}  // namespace

void write_run_outputs(const RunResult& r, const ExperimentConfig& cfg, const fs::path& out,
                       bool emit_private) {
  fs::create_directories(out);
  const Trajectory& traj = r.trajectory;
  write_if_changed(out / "trajectory.csv", trajectory_csv(traj, emit_private));
  write_if_changed(out / "analysis.json",
                   analysis_to_json(r.analysis, r.algebraic_connectivity).dump(2) + "\n");
  write_if_changed(out / "graph.json", graph_to_json(r.instance.graph).dump(2) + "\n");
  if (cfg.run_attacks) write_if_changed(out / "attacks.json", attacks_json(r).dump(2) + "\n");

  if (cfg.plots) {
    write_if_changed(out / "y.svg", state_plot(traj, traj.y, "public outputs y(t)", "y"));
  }
  if (!emit_private) return;
  const fs::path priv = out / "private";
  fs::create_directories(priv);
  write_if_changed(priv / "mask.json", mask_to_json(r.instance.mask).dump(2) + "\n");
  write_if_changed(priv / "x0.json", Json{{"x0", r.instance.x0}}.dump(2) + "\n");
  if (!cfg.plots) return;
  write_if_changed(priv / "x.svg", state_plot(traj, traj.x, "private states x(t)", "x"));
  std::vector<double> vmm(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) vmm[k] = lyapunov_vmm(traj.x.row(k));
  write_if_changed(priv / "vmm.svg",
                   svg::line_plot({"V_mm(t) = max x - min x", "t", "V_mm"}, {{traj.times, vmm}}));
  const auto y0 = traj.y.row(0);
  write_if_changed(priv / "scatter.svg",
                   svg::scatter_plot({"initial state vs initial output", "x(0)", "y(0)"},
                                     r.instance.x0, std::vector<double>(y0.begin(), y0.end()),
                                     true));
}

std::string sweep_point_name(std::uint64_t seed, double sigma, double delta) {
  return "seed" + std::to_string(seed) + "_sigma" + format_double(sigma) + "_delta" +
         format_double(delta) + ".json";
}

namespace {

std::string verdict_summary(const RunResult& r) {
  if (!r.attack_error.empty()) return "error";
  // attack -> outcome -> count, integral pairs pooled
  std::map<std::string, std::map<std::string, int>> counts;
  for (const AttackReport& a : r.attacks) {
    auto& c = counts[a.attack];
    for (const NodeVerdict& v : a.nodes) ++c[std::string(to_string(v.outcome))];
  }
  std::string out;
  for (const auto& [attack, c] : counts) {
    if (!out.empty()) out += ' ';
    out += attack;
    for (const auto& [k, count] : c) out += ':' + k + '=' + std::to_string(count);
  }
  return out;
}

std::string csv_number(const Json& v) {
  return v.is_null() ? "" : format_double(v.get<double>());
}

}  // namespace

SweepStats run_sweep(const ExperimentConfig& cfg, const fs::path& out, int jobs) {
  if (!cfg.sweep) throw ConfigError("config has no 'sweep' grid");
  struct Point {
    std::uint64_t seed;
    double sigma, delta;
  };
  std::vector<Point> grid;
  {
    std::set<std::uint64_t> seeds(cfg.sweep->seeds.begin(), cfg.sweep->seeds.end());
    std::set<double> sigmas(cfg.sweep->sigma.begin(), cfg.sweep->sigma.end());
    std::set<double> deltas(cfg.sweep->delta.begin(), cfg.sweep->delta.end());
    for (auto s : seeds)
      for (double a : sigmas)
        for (double b : deltas) grid.push_back({s, a, b});
  }
  const fs::path points = out / "points";
  fs::create_directories(points);

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!fs::exists(points / sweep_point_name(grid[i].seed, grid[i].sigma, grid[i].delta))) {
      todo.push_back(i);
    }
  }
  kernels::for_each_index(todo.size(), kernels::Exec::Parallel, jobs, [&](std::size_t k) {
    const Point& p = grid[todo[k]];
    ExperimentConfig point = cfg;
    point.seed = p.seed;
    point.mask.sigma = p.sigma;
    point.mask.delta = p.delta;
    const RunResult r = run_experiment(point, kernels::Exec::Serial);
    std::size_t breached_count = 0;
    for (const AttackReport& a : r.attacks) {
      for (const NodeVerdict& v : a.nodes) breached_count += breached(v);
    }
    Json j{{"seed", p.seed},
           {"sigma", p.sigma},
           {"delta", p.delta},
           {"analysis", analysis_to_json(r.analysis, r.algebraic_connectivity)},
           {"breached", breached_count},
           {"verdicts", verdict_summary(r)}};
    write_if_changed(points / sweep_point_name(p.seed, p.sigma, p.delta), j.dump(2) + "\n");
  });

  std::string csv =
      "seed,sigma,delta,convergence_time,conservation_residual,public_average_drift,"
      "vmm_monotone,breached,verdicts\n";
  for (const Point& p : grid) {
    const Json j = read_json_file(points / sweep_point_name(p.seed, p.sigma, p.delta));
    const Json& a = j.at("analysis");
    csv += std::to_string(p.seed) + ',' + format_double(p.sigma) + ',' + format_double(p.delta) +
           ',' + csv_number(a.at("convergence_time")) + ',' +
           csv_number(a.at("conservation_residual")) + ',' +
           csv_number(a.at("public_average_drift")) + ',' +
           (a.at("vmm_monotone").get<bool>() ? "1" : "0") + ',' +
           std::to_string(j.at("breached").get<std::size_t>()) + ',' +
           j.at("verdicts").get<std::string>() + '\n';
  }
  SweepStats stats;
  stats.points = grid.size();
  stats.computed = todo.size();
  stats.aggregate_changed = write_if_changed(out / "sweep.csv", csv);
  return stats;
}

}  // namespace dynpriv
