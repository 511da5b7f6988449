#pragma once

// File-driven experiments: config parsing, single runs and parameter sweeps.
// The config schema is documented in README.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynpriv/adversary.hpp"
#include "dynpriv/analysis.hpp"
#include "dynpriv/io.hpp"
#include "dynpriv/kernels.hpp"

namespace dynpriv {

struct GraphSource {
  std::optional<std::filesystem::path> file;
  std::size_t n = 0;
  std::size_t extra_cycles = 0;
};

struct MaskSource {
  std::optional<std::filesystem::path> file;
  MaskFamily family = MaskFamily::Identity;
  ParamRanges ranges;
  std::optional<double> sigma;
  std::optional<double> delta;
};

struct X0Source {
  std::optional<std::filesystem::path> file;
  double lo = -10.0;
  double hi = 10.0;
};

struct SweepGrid {
  std::vector<std::uint64_t> seeds;
  std::vector<double> sigma;
  std::vector<double> delta;
};

// Every random draw derives from `seed`: the graph uses seed, the mask
// seed + 1 and x0 seed + 2.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  GraphSource graph;
  MaskSource mask;
  X0Source x0;
  IntegrationSettings integration;
  AnalysisSettings analysis;
  bool run_attacks = false;
  AttackSuite attacks;
  bool plots = true;
  std::optional<SweepGrid> sweep;
};

// Relative file paths resolve against base_dir. Throws ConfigError.
ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Instance {
  WeightedDigraph graph;
  MaskSpec mask;
  std::vector<double> x0;
};

WeightedDigraph instantiate_graph(const ExperimentConfig& cfg);
Instance instantiate(const ExperimentConfig& cfg);

struct RunResult {
  Instance instance;
  Trajectory trajectory;
  AnalysisReport analysis;
  double algebraic_connectivity = 0.0;
  std::vector<AttackReport> attacks;
  std::string attack_error;  // set when the log could not be attacked
};

RunResult run_experiment(const ExperimentConfig& cfg, kernels::Exec exec = kernels::Exec::Auto);

// Writes trajectory.csv, analysis.json, graph.json, attacks.json (when
// attacks ran) and public plots into out_dir. With emit_private the CSV
// gains x columns and out_dir/private receives mask.json, x0.json and the
// plots built from x.
void write_run_outputs(const RunResult& r, const ExperimentConfig& cfg,
                       const std::filesystem::path& out_dir, bool emit_private);

struct SweepStats {
  std::size_t points = 0;
  std::size_t computed = 0;  // points run in this call; the rest were on disk
  bool aggregate_changed = false;
};

// One JSON file per grid point under out_dir/points, then sweep.csv in
// lexicographic (seed, sigma, delta) order. Points whose file already exists
// are not recomputed. Throws ConfigError when the grid is missing or empty.
SweepStats run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int jobs);

std::string sweep_point_name(std::uint64_t seed, double sigma, double delta);

}  // namespace dynpriv
