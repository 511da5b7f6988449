#include "dynpriv/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "dynpriv/errors.hpp"
#include "dynpriv/experiment.hpp"

namespace dynpriv {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string log;
  std::string truth;
  std::string check_path;
  bool emit_private = false;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::size_t samples = 2000;
};

std::string cell(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + ' ' : s + std::string(width - s.size(), ' ');
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ExperimentConfig config_from(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  if (!fs::exists(o.config)) throw ConfigError("config not found: " + o.config);
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

int cmd_run(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = config_from(o);
  if (o.out.empty()) throw ConfigError("--out is required");
  const RunResult r = run_experiment(cfg);
  write_run_outputs(r, cfg, o.out, o.emit_private);
  out << "eta " << short_num(r.analysis.eta) << ", conservation residual "
      << short_num(r.analysis.conservation_residual) << ", convergence time "
      << (r.analysis.convergence_time ? short_num(*r.analysis.convergence_time) : "not reached")
      << ", V_mm " << (r.analysis.vmm_monotone ? "monotone" : "increases") << "\n";
  out << "wrote " << o.out << "\n";
  return kExitOk;
}

std::string verdict_table(const std::vector<AttackReport>& reports) {
  std::ostringstream os;
  os << cell("attack", 14) << cell("node", 6) << cell("verdict", 11) << cell("x0 estimate", 16)
     << cell("rel error", 12) << "reason\n";
  for (const AttackReport& a : reports) {
    const std::string name = a.attacker ? a.attack + "@" + std::to_string(*a.attacker) : a.attack;
    for (const NodeVerdict& v : a.nodes) {
      os << cell(name, 14) << cell(std::to_string(v.node), 6)
         << cell(std::string(to_string(v.outcome)), 11)
         << cell(v.x0_estimate ? short_num(*v.x0_estimate) : "-", 16)
         << cell(v.relative_error ? short_num(*v.relative_error) : "-", 12) << v.reason << "\n";
    }
  }
  return os.str();
}

int cmd_attack(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = config_from(o);
  if (o.log.empty()) throw ConfigError("--log is required");
  if (!fs::exists(o.log)) throw ConfigError("log not found: " + o.log);
  const WeightedDigraph graph = instantiate_graph(cfg);
  PublicSamples samples = read_public_csv(o.log);
  if (samples.y.cols() != graph.size()) {
    throw ConfigError(o.log + ": log has " + std::to_string(samples.y.cols()) +
                      " outputs but the graph has " + std::to_string(graph.size()) + " nodes");
  }
  ObservationLog log;
  log.times = std::move(samples.times);
  log.y = std::move(samples.y);
  log.laplacian = build_laplacian(graph);

  std::vector<AttackReport> reports = run_attack_suite(log, graph, cfg.attacks);
  if (!o.truth.empty()) {
    const Json t = read_json_file(o.truth);
    const Json& arr = t.is_object() && t.contains("x0") ? t.at("x0") : t;
    std::vector<double> x0;
    try {
      x0 = arr.get<std::vector<double>>();
    } catch (const Json::exception&) {
      throw ConfigError(o.truth + ": expected an array of initial states");
    }
    if (x0.size() != graph.size()) throw ConfigError(o.truth + ": wrong number of states");
    for (AttackReport& r : reports) score_against_truth(r, x0);
  }
  Json j = Json::array();
  for (const AttackReport& r : reports) j.push_back(attack_report_to_json(r));
  if (o.out.empty()) {
    out << j.dump(2) << "\n";
  } else {
    write_if_changed(fs::path(o.out) / "attack_report.json", j.dump(2) + "\n");
    out << verdict_table(reports);
  }
  return kExitOk;
}

struct CheckLine {
  std::string name;
  std::optional<bool> pass;  // nullopt: reported, not checked
  std::string detail;
};

int report_checks(const std::vector<CheckLine>& lines, Json j, const Options& o,
                  std::ostream& out) {
  bool all = true;
  out << cell("check", 31) << cell("result", 8) << "detail\n";
  for (const CheckLine& l : lines) {
    out << cell(l.name, 31) << cell(!l.pass ? "-" : *l.pass ? "pass" : "FAIL", 8) << l.detail
        << "\n";
    all = all && l.pass.value_or(true);
  }
  j["pass"] = all;
  if (!o.out.empty()) write_if_changed(fs::path(o.out) / "check.json", j.dump(2) + "\n");
  return all ? kExitOk : kExitCheckFailed;
}

int check_graph(const Json& doc, const Options& o, std::ostream& out) {
  const WeightedDigraph g = graph_from_json(doc);
  std::vector<CheckLine> lines;
  Json j{{"kind", "graph"}, {"n", g.size()}};
  std::optional<BalancedLaplacian> L;
  try {
    L = build_laplacian(g);
    lines.push_back({"weight balance", true, "in-weight equals out-weight at every node"});
    j["weight_balanced"] = true;
  } catch (const UnbalancedGraph& e) {
    lines.push_back({"weight balance", false, e.what()});
    j["weight_balanced"] = false;
  }
  std::vector<std::vector<std::size_t>> in = g.in_neighborhoods();
  const bool strong = scc_count(g.size(), in) == 1;
  lines.push_back({"strongly connected", strong,
                   std::to_string(scc_count(g.size(), in)) + " strongly connected component(s)"});
  j["irreducible"] = strong;

  const auto nested = check_assumption1(g);
  std::string detail = nested.empty() ? "no closed in-neighbourhood nests in another"
                                      : std::to_string(nested.size()) + " nested pair(s):";
  Json pairs = Json::array();
  for (std::size_t k = 0; k < nested.size(); ++k) {
    pairs.push_back(Json{{"victim", nested[k].first}, {"observer", nested[k].second}});
    if (k < 8) {
      detail += " " + std::to_string(nested[k].second) + " sees all inputs of " +
                std::to_string(nested[k].first) + ";";
    }
  }
  if (nested.size() > 8) detail += " ...";
  lines.push_back({"no overlapping neighbourhoods", nested.empty(), detail});
  j["assumption1_violations"] = pairs;
  return report_checks(lines, std::move(j), o, out);
}

int check_mask(const Json& doc, const Options& o, std::ostream& out) {
  const MaskSpec spec = mask_from_json(doc);
  const PropertyReport report = audit_properties(spec, o.samples, o.seed.value_or(0));
  std::vector<CheckLine> lines;
  static const char* names[] = {"P1 local", "P2 masks every state", "P3 indiscernible",
                                "P4 escapes neighbourhoods", "P5 monotone in x",
                                "P6 vanishing"};
  for (int p = 1; p <= 6; ++p) {
    const PropertyVerdict& v = report[p];
    if (v.verdict == Verdict::NotAudited) {
      lines.push_back({names[p - 1], std::nullopt, v.note});
      continue;
    }
    std::string detail = v.counterexample ? v.counterexample->detail : v.note;
    lines.push_back({names[p - 1], v.verdict == Verdict::Holds, detail});
  }
  Json j = property_report_to_json(report);
  j["kind"] = "mask";
  return report_checks(lines, std::move(j), o, out);
}

int cmd_check(const Options& o, std::ostream& out) {
  if (!fs::exists(o.check_path)) throw ConfigError("file not found: " + o.check_path);
  const Json doc = read_json_file(o.check_path);
  if (doc.is_object() && doc.contains("edges")) return check_graph(doc, o, out);
  if (doc.is_object() && doc.contains("family")) return check_mask(doc, o, out);
  throw ConfigError(o.check_path + ": neither a graph ('edges') nor a mask ('family') document");
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = config_from(o);
  if (o.out.empty()) throw ConfigError("--out is required");
  const SweepStats s = run_sweep(cfg, o.out, o.jobs);
  out << s.points << " grid points, " << s.computed << " computed, aggregate "
      << (s.aggregate_changed ? "written" : "unchanged") << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Masked average consensus: simulation, analysis and reconstruction attacks",
               "dynpriv"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;

  auto add_seed = [&](CLI::App* sub) {
    return sub->add_option("--seed", seed, "override the config seed");
  };

  CLI::App* run = app.add_subcommand("run", "integrate, analyse and write artifacts");
  run->add_option("--config", o.config, "experiment config (JSON)")->required();
  run->add_option("--out", o.out, "output directory")->required();
  run->add_flag("--emit-private", o.emit_private, "also write private states and mask parameters");
  auto* run_seed = add_seed(run);

  CLI::App* attack = app.add_subcommand("attack", "run reconstruction attacks on a public log");
  attack->add_option("--config", o.config, "config providing the graph and attack suite")
      ->required();
  attack->add_option("--log", o.log, "trajectory CSV with t and y_* columns")->required();
  attack->add_option("--out", o.out, "write attack_report.json here instead of stdout");
  attack->add_option("--truth", o.truth, "true x0 (JSON array) for scoring");
  auto* attack_seed = add_seed(attack);

  CLI::App* check = app.add_subcommand("check", "audit a graph or a mask spec");
  check->add_option("path", o.check_path, "graph or mask JSON")->required();
  check->add_option("--out", o.out, "write check.json here");
  check->add_option("--samples", o.samples, "sample count for the mask audit (>= 100)");
  auto* check_seed = add_seed(check);

  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid");
  sweep->add_option("--config", o.config, "config with a 'sweep' grid")->required();
  sweep->add_option("--out", o.out, "output directory")->required();
  sweep->add_option("--jobs", o.jobs, "worker threads (0 = all cores)");
  auto* sweep_seed = add_seed(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dynpriv: " << e.what() << "\n";
    return kExitUsage;
  }
  for (auto* opt : {run_seed, attack_seed, check_seed, sweep_seed}) {
    if (opt->count() > 0) o.seed = seed;
  }

  try {
    if (run->parsed()) return cmd_run(o, out);
    if (attack->parsed()) return cmd_attack(o, out);
    if (check->parsed()) return cmd_check(o, out);
    return cmd_sweep(o, out);
  } catch (const NonFiniteState& e) {
    err << "dynpriv: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "dynpriv: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidGraph& e) {
    err << "dynpriv: invalid graph: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidParams& e) {
    err << "dynpriv: invalid mask: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    // Remaining library errors are input problems (sizes, balance, grids).
    err << "dynpriv: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "dynpriv: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "dynpriv: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace dynpriv
