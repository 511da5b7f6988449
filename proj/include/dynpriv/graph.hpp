#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dynpriv {

// Absolute tolerance for weight balance and Laplacian row/column sums.
inline constexpr double kBalanceTolerance = 1e-12;

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// A directed graph with strictly positive edge weights and no self-loops.
// An edge src -> dst makes src an in-neighbour of dst: dst listens to src.
// Parallel edges are merged (weights summed) and edges are kept sorted by
// (src, dst), so two graphs with the same weighted adjacency compare equal.
class WeightedDigraph {
 public:
  WeightedDigraph() = default;
  WeightedDigraph(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  double in_weight(std::size_t node) const;
  double out_weight(std::size_t node) const;

  // Open in-neighbourhoods, each sorted ascending.
  std::vector<std::vector<std::size_t>> in_neighborhoods() const;

  friend bool operator==(const WeightedDigraph&, const WeightedDigraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

// Compressed-row view of a square matrix; used by the Laplacian kernels.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;
};

// L = D - A for a weight-balanced digraph: L[i][j] = -w(j -> i) and
// L[i][i] = sum of in-weights of i. Row and column sums vanish to
// kBalanceTolerance; off-diagonals are <= 0 and the diagonal is >= 0.
class BalancedLaplacian {
 public:
  BalancedLaplacian() = default;

  // Validates the invariants on an arbitrary dense row-major matrix.
  static BalancedLaplacian from_dense(std::size_t n, std::vector<double> entries);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return dense_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(dense_).subspan(i * n_, n_);
  }
  std::span<const double> dense() const noexcept { return dense_; }
  const CsrMatrix& sparse() const noexcept { return csr_; }

  double max_abs_row_sum() const;
  double max_abs_col_sum() const;
  // max_i sum_j |L[i][j]|
  double inf_norm() const;

 private:
  BalancedLaplacian(std::size_t n, std::vector<double> entries);

  std::size_t n_ = 0;
  std::vector<double> dense_;
  CsrMatrix csr_;
};

BalancedLaplacian build_laplacian(const WeightedDigraph& g);

// Number of strongly connected components of the digraph with an edge
// j -> i whenever adjacency[i] contains j (iterative Tarjan).
std::size_t scc_count(std::size_t n, const std::vector<std::vector<std::size_t>>& in_adjacency);

bool is_irreducible(const BalancedLaplacian& L);

// Ordered pairs (i, j), i != j, whose closed in-neighbourhoods nest:
// N_i + {i} is a subset of N_j + {j}. Empty means no agent's inputs are
// fully visible to another agent.
std::vector<std::pair<std::size_t, std::size_t>> check_assumption1(const WeightedDigraph& g);

// Unit-weight Hamiltonian cycle 0 -> 1 -> ... -> n-1 -> 0 plus
// extra_cycle_count directed cycles over random node subsets, each cycle
// carrying one random weight in [0.5, 2]. Every superposed cycle adds the
// same weight in and out of each node it visits, so balance is exact.
WeightedDigraph random_balanced_digraph(std::size_t n, std::size_t extra_cycle_count,
                                        std::uint64_t seed);

}  // namespace dynpriv
