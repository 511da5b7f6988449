#include "dynpriv/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "dynpriv/errors.hpp"

namespace dynpriv {

WeightedDigraph::WeightedDigraph(std::size_t n, std::vector<Edge> edges) : n_(n) {
  std::map<std::pair<std::size_t, std::size_t>, double> merged;
  for (const Edge& e : edges) {
    if (e.src >= n || e.dst >= n) {
      throw InvalidGraph("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                         ") references a node outside [0, " + std::to_string(n) + ")");
    }
    if (e.src == e.dst) {
      throw InvalidGraph("self-loop at node " + std::to_string(e.src));
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw InvalidGraph("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                         ") has non-positive weight");
    }
    merged[{e.src, e.dst}] += e.weight;
  }
  edges_.reserve(merged.size());
  for (const auto& [key, w] : merged) {
    edges_.push_back({key.first, key.second, w});
  }
}

double WeightedDigraph::in_weight(std::size_t node) const {
  double s = 0.0;
  for (const Edge& e : edges_) {
    if (e.dst == node) s += e.weight;
  }
  return s;
}

double WeightedDigraph::out_weight(std::size_t node) const {
  double s = 0.0;
  for (const Edge& e : edges_) {
    if (e.src == node) s += e.weight;
  }
  return s;
}

std::vector<std::vector<std::size_t>> WeightedDigraph::in_neighborhoods() const {
  std::vector<std::vector<std::size_t>> nbrs(n_);
  for (const Edge& e : edges_) nbrs[e.dst].push_back(e.src);
  for (auto& v : nbrs) std::sort(v.begin(), v.end());
  return nbrs;
}

BalancedLaplacian::BalancedLaplacian(std::size_t n, std::vector<double> entries)
    : n_(n), dense_(std::move(entries)) {
  csr_.n = n;
  csr_.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = dense_[i * n + j];
      if (v != 0.0) {
        csr_.col.push_back(j);
        csr_.val.push_back(v);
      }
    }
    csr_.row_ptr[i + 1] = csr_.col.size();
  }
}

BalancedLaplacian BalancedLaplacian::from_dense(std::size_t n, std::vector<double> entries) {
  if (n == 0) throw EmptyGraph("Laplacian of an empty graph");
  if (entries.size() != n * n) {
    throw InvalidLaplacian("expected " + std::to_string(n * n) + " entries, got " +
                           std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = entries[i * n + j];
      if (!std::isfinite(v)) throw InvalidLaplacian("non-finite entry");
      if (i == j && v < 0.0) {
        throw InvalidLaplacian("negative diagonal at row " + std::to_string(i));
      }
      if (i != j && v > 0.0) {
        throw InvalidLaplacian("positive off-diagonal at (" + std::to_string(i) + ", " +
                               std::to_string(j) + ")");
      }
    }
  }
  BalancedLaplacian L(n, std::move(entries));
  if (L.max_abs_row_sum() > kBalanceTolerance) {
    throw InvalidLaplacian("row sums do not vanish");
  }
  if (L.max_abs_col_sum() > kBalanceTolerance) {
    throw InvalidLaplacian("column sums do not vanish (not weight-balanced)");
  }
  return L;
}

double BalancedLaplacian::max_abs_row_sum() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += dense_[i * n_ + j];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double BalancedLaplacian::max_abs_col_sum() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += dense_[i * n_ + j];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double BalancedLaplacian::inf_norm() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += std::abs(dense_[i * n_ + j]);
    worst = std::max(worst, s);
  }
  return worst;
}

BalancedLaplacian build_laplacian(const WeightedDigraph& g) {
  const std::size_t n = g.size();
  if (n == 0) throw EmptyGraph("cannot build the Laplacian of a graph with no nodes");

  std::vector<double> in(n, 0.0), out(n, 0.0);
  for (const Edge& e : g.edges()) {
    in[e.dst] += e.weight;
    out[e.src] += e.weight;
  }
  std::size_t worst = 0;
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = in[i] - out[i];
    if (std::abs(gap) > std::abs(worst_gap)) {
      worst_gap = gap;
      worst = i;
    }
  }
  if (std::abs(worst_gap) > kBalanceTolerance) throw UnbalancedGraph(worst, worst_gap);

  std::vector<double> dense(n * n, 0.0);
  for (const Edge& e : g.edges()) {
    dense[e.dst * n + e.src] -= e.weight;
    dense[e.dst * n + e.dst] += e.weight;
  }
  return BalancedLaplacian::from_dense(n, std::move(dense));
}

std::size_t scc_count(std::size_t n, const std::vector<std::vector<std::size_t>>& in_adjacency) {
  // Tarjan over the reversed orientation; SCCs are invariant under reversal.
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next child position)
  std::size_t counter = 0;
  std::size_t components = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;

    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos < in_adjacency[v].size()) {
        const std::size_t w = in_adjacency[v][pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        ++components;
        std::size_t w = 0;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
        } while (w != done);
      }
    }
  }
  return components;
}

bool is_irreducible(const BalancedLaplacian& L) {
  const std::size_t n = L.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && L(i, j) != 0.0) adj[i].push_back(j);
    }
  }
  return scc_count(n, adj) == 1;
}

std::vector<std::pair<std::size_t, std::size_t>> check_assumption1(const WeightedDigraph& g) {
  auto closed = g.in_neighborhoods();
  for (std::size_t i = 0; i < closed.size(); ++i) {
    auto& v = closed[i];
    v.insert(std::lower_bound(v.begin(), v.end(), i), i);
  }
  std::vector<std::pair<std::size_t, std::size_t>> violations;
  for (std::size_t i = 0; i < closed.size(); ++i) {
    for (std::size_t j = 0; j < closed.size(); ++j) {
      if (i == j || closed[i].size() > closed[j].size()) continue;
      if (std::includes(closed[j].begin(), closed[j].end(), closed[i].begin(), closed[i].end())) {
        violations.emplace_back(i, j);
      }
    }
  }
  return violations;
}

WeightedDigraph random_balanced_digraph(std::size_t n, std::size_t extra_cycle_count,
                                        std::uint64_t seed) {
  if (n < 3) throw InvalidSize("random balanced digraphs need n >= 3, got " + std::to_string(n));

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(2, n);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  std::vector<std::size_t> nodes(n);
  for (std::size_t c = 0; c < extra_cycle_count; ++c) {
    std::iota(nodes.begin(), nodes.end(), std::size_t{0});
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const std::size_t k = length(rng);
    const double w = weight(rng);
    for (std::size_t m = 0; m < k; ++m) edges.push_back({nodes[m], nodes[(m + 1) % k], w});
  }
  return WeightedDigraph(n, std::move(edges));
}

}  // namespace dynpriv
