#pragma once

// JSON and CSV encodings of graphs, masks, trajectories and reports.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynpriv/adversary.hpp"
#include "dynpriv/analysis.hpp"
#include "dynpriv/graph.hpp"
#include "dynpriv/masks.hpp"

namespace dynpriv {

using Json = nlohmann::ordered_json;

// Throws ConfigError naming the path when the file is missing or malformed.
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// Writes only when the content differs; returns true if the file changed.
bool write_if_changed(const std::filesystem::path& path, const std::string& content);

// Shortest representation that round-trips
std::string format_double(double v);

// {"n": 3, "edges": [[src, dst, weight], ...]}
Json graph_to_json(const WeightedDigraph& g);
WeightedDigraph graph_from_json(const Json& j);

// {"family": "VanishingAffine", "params": [{"c":..,"phi":..,...}, ...]}
Json mask_to_json(const MaskSpec& m);
MaskSpec mask_from_json(const Json& j);

// Header t,y_0..y_{n-1}; with include_private the x columns come first:
// t,x_0..,y_0..
std::string trajectory_csv(const Trajectory& traj, bool include_private);

// Reads the t and y_* columns of a trajectory CSV; x_* columns are skipped.
// Throws ConfigError on malformed input.
struct PublicSamples {
  std::vector<double> times;
  SampleMatrix y;
};
PublicSamples read_public_csv(const std::filesystem::path& path);

Json analysis_to_json(const AnalysisReport& r, double lambda2);
Json attack_report_to_json(const AttackReport& r);
Json property_report_to_json(const PropertyReport& r);
Json summary_to_json(const DiscernibilitySummary& s);

}  // namespace dynpriv
