#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "dynpriv/graph.hpp"

namespace testing {

inline dynpriv::WeightedDigraph directed_cycle(std::size_t n, double w = 1.0) {
  std::vector<dynpriv::Edge> e;
  for (std::size_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, w});
  return {n, e};
}

inline dynpriv::WeightedDigraph complete_graph(std::size_t n) {
  std::vector<dynpriv::Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) e.push_back({i, j, 1.0});
  return {n, e};
}

// Ring 0->1->2->3->0 plus 0<->1: node 0 sees every input of node 1 and
// that is the only nested pair.
inline dynpriv::WeightedDigraph ring_with_chord() {
  return {4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}, {1, 0, 1}, {0, 1, 1}}};
}

// Fresh directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dynpriv_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
