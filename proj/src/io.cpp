#include "dynpriv/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dynpriv/errors.hpp"

namespace dynpriv {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

bool write_if_changed(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (fs::exists(path, ec)) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    if (os.str() == content) return false;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  // Write then rename, so an interrupted run never leaves a truncated file.
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
  return true;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json graph_to_json(const WeightedDigraph& g) {
  Json edges = Json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.src, e.dst, e.weight});
  return Json{{"n", g.size()}, {"edges", edges}};
}

namespace {

template <typename T>
T field(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string(what) + ": missing '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(what) + ": bad '" + key + "': " + e.what());
  }
}

}  // namespace

WeightedDigraph graph_from_json(const Json& j) {
  const auto n = field<std::size_t>(j, "n", "graph");
  const auto raw = field<std::vector<Json>>(j, "edges", "graph");
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const Json& e : raw) {
    if (!e.is_array() || e.size() != 3) {
      throw ConfigError("graph: each edge must be [src, dst, weight]");
    }
    try {
      edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()});
    } catch (const Json::exception& ex) {
      throw ConfigError(std::string("graph: bad edge: ") + ex.what());
    }
  }
  return WeightedDigraph(n, std::move(edges));
}

Json mask_to_json(const MaskSpec& m) {
  Json params = Json::array();
  for (const NodeMaskParams& p : m.params()) {
    params.push_back(Json{{"c", p.c}, {"phi", p.phi}, {"sigma", p.sigma}, {"gamma", p.gamma},
                          {"delta", p.delta}});
  }
  return Json{{"family", std::string(to_string(m.family()))}, {"params", params}};
}

MaskSpec mask_from_json(const Json& j) {
  const MaskFamily family = parse_mask_family(field<std::string>(j, "family", "mask"));
  const auto raw = field<std::vector<Json>>(j, "params", "mask");
  std::vector<NodeMaskParams> params;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    NodeMaskParams p;
    p.node = i;
    p.c = raw[i].value("c", p.c);
    p.phi = raw[i].value("phi", p.phi);
    p.sigma = raw[i].value("sigma", p.sigma);
    p.gamma = raw[i].value("gamma", p.gamma);
    p.delta = raw[i].value("delta", p.delta);
    params.push_back(p);
  }
  return MaskSpec(family, std::move(params));
}

std::string trajectory_csv(const Trajectory& traj, bool include_private) {
  const std::size_t n = traj.dim();
  std::string out = "t";
  if (include_private) {
    for (std::size_t j = 0; j < n; ++j) out += ",x_" + std::to_string(j);
  }
  for (std::size_t j = 0; j < n; ++j) out += ",y_" + std::to_string(j);
  out += '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += format_double(traj.times[k]);
    if (include_private) {
      for (double v : traj.x.row(k)) out += ',' + format_double(v);
    }
    for (double v : traj.y.row(k)) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

PublicSamples read_public_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty log");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "t") {
    throw ConfigError(path.string() + ": first column must be 't'");
  }
  std::vector<std::size_t> y_cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].rfind("y_", 0) == 0) {
      if (header[c] != "y_" + std::to_string(y_cols.size())) {
        throw ConfigError(path.string() + ": y columns must be y_0, y_1, ... in order");
      }
      y_cols.push_back(c);
    }
  }
  if (y_cols.empty()) throw ConfigError(path.string() + ": no y_* columns");

  PublicSamples s{{}, SampleMatrix(y_cols.size())};
  std::vector<double> cells, row(y_cols.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    cells.clear();
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                          cell + "'");
      }
    }
    if (cells.size() != header.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns");
    }
    s.times.push_back(cells[0]);
    for (std::size_t j = 0; j < y_cols.size(); ++j) row[j] = cells[y_cols[j]];
    s.y.push_back(row);
  }
  return s;
}

namespace {

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json analysis_to_json(const AnalysisReport& r, double lambda2) {
  Json curve = Json::array();
  for (const auto& [t, d] : r.deviation_curve) curve.push_back({t, d});
  return Json{{"eta", r.eta},
              {"conservation_residual", r.conservation_residual},
              {"public_average_drift", r.public_average_drift},
              {"convergence_time", optional_number(r.convergence_time)},
              {"vmm_monotone", r.vmm_monotone},
              {"vmm_violation_instants", r.vmm_violation_instants},
              {"deviation_curve", curve},
              {"algebraic_connectivity", lambda2}};
}

Json attack_report_to_json(const AttackReport& r) {
  Json nodes = Json::array();
  for (const NodeVerdict& v : r.nodes) {
    Json cands = Json::array();
    for (const Candidate& c : v.candidates) {
      cands.push_back(Json{{"c", c.c},
                           {"delta", c.delta},
                           {"gamma", c.gamma},
                           {"x0", c.x0},
                           {"residual", c.residual}});
    }
    nodes.push_back(Json{{"node", v.node},
                         {"verdict", std::string(to_string(v.outcome))},
                         {"x0_estimate", optional_number(v.x0_estimate)},
                         {"relative_error", optional_number(v.relative_error)},
                         {"candidates", cands},
                         {"residual", v.residual},
                         {"below_floor", v.below_floor},
                         {"reason", v.reason}});
  }
  Json out{{"attack", r.attack}};
  out["attacker"] = r.attacker ? Json(*r.attacker) : Json(nullptr);
  out["nodes"] = nodes;
  return out;
}

Json property_report_to_json(const PropertyReport& r) {
  Json props = Json::array();
  for (const PropertyVerdict& p : r.properties) {
    Json entry{{"property", p.name}, {"verdict", std::string(to_string(p.verdict))},
               {"note", p.note}};
    if (p.counterexample) {
      const Counterexample& c = *p.counterexample;
      entry["counterexample"] =
          Json{{"node", c.node}, {"t", c.t}, {"x", c.x}, {"value", c.value}, {"detail", c.detail}};
    } else {
      entry["counterexample"] = nullptr;
    }
    props.push_back(entry);
  }
  return Json{{"family", std::string(to_string(r.family))},
              {"sample_count", r.sample_count},
              {"properties", props},
              {"pass", r.all_audited_hold()}};
}

Json summary_to_json(const DiscernibilitySummary& s) {
  Json rows = Json::array();
  for (const DiscernibilityRow& r : s.rows) {
    rows.push_back(Json{{"family", std::string(to_string(r.family))},
                        {"attack", r.attack},
                        {"attacker", r.attacker ? Json(*r.attacker) : Json(nullptr)},
                        {"assumption1_holds", r.assumption1_holds},
                        {"node", r.node},
                        {"verdict", std::string(to_string(r.outcome))},
                        {"relative_error", optional_number(r.relative_error)},
                        {"breached", r.breached}});
  }
  Json reports = Json::array();
  for (const AttackReport& r : s.reports) reports.push_back(attack_report_to_json(r));
  return Json{{"assumption1_holds", s.assumption1_holds},
              {"breached_nodes", s.breached_nodes},
              {"dynamically_private_empirical", s.dynamically_private_empirical},
              {"label", s.label},
              {"rows", rows},
              {"reports", reports}};
}

}  // namespace dynpriv
