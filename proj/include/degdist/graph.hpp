#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "degdist/common.hpp"

namespace degdist {

struct Edge {
  int u = 0;
  int v = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Undirected simple graph on vertices 0..n-1.
///
/// Edges are stored normalized (u < v) and sorted; adjacency lists are sorted.
/// Construction rejects self-loops, duplicates and out-of-range endpoints.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int vertex_count);
  Graph(int vertex_count, std::span<const Edge> edges);

  int vertex_count() const { return static_cast<int>(adjacency_.size()); }
  std::int64_t edge_count() const { return static_cast<std::int64_t>(edges_.size()); }
  int degree(int v) const { return static_cast<int>(adjacency_[v].size()); }
  const std::vector<int>& neighbors(int v) const { return adjacency_[v]; }
  const std::vector<Edge>& edges() const { return edges_; }
  int max_degree() const;
  bool has_edge(int u, int v) const;

  bool operator==(const Graph& other) const { return edges_ == other.edges_ && adjacency_.size() == other.adjacency_.size(); }

 private:
  std::vector<std::vector<int>> adjacency_;
  std::vector<Edge> edges_;
};

/// Counts N_0..N_M of vertices by degree. Entries are reals so the same type
/// carries raw counts and estimates.
class DegreeCounts {
 public:
  DegreeCounts() = default;
  explicit DegreeCounts(Vector counts);

  int bound() const { return static_cast<int>(counts_.size()) - 1; }
  Eigen::Index size() const { return counts_.size(); }
  double operator[](Eigen::Index k) const { return counts_[k]; }
  const Vector& values() const { return counts_; }
  double total() const { return counts_.sum(); }
  /// Largest index with a nonzero entry, or -1 if all zero.
  int max_occupied() const;

  /// Pads with zeros or truncates to length bound+1. Truncation only drops
  /// zero entries; a nonzero entry beyond the new bound is an error.
  DegreeCounts resized(int bound) const;

 private:
  Vector counts_;
};

/// N_k = |{v : d_v = k}| for k = 0..max_degree. Throws if some degree exceeds
/// max_degree.
DegreeCounts degree_counts(const Graph& g, int max_degree);
/// Same with max_degree = g.max_degree().
DegreeCounts degree_counts(const Graph& g);

/// Uniform simple graph with exactly `edge_count` edges (G(n, m)).
Graph generate_er(int vertex_count, std::int64_t edge_count, std::uint64_t seed);
/// Bernoulli graph, each pair independently with probability p (G(n, p)).
Graph generate_gnp(int vertex_count, double p, std::uint64_t seed);

struct BlockRatio {
  double within_first = 6.0;
  double within_second = 2.0;
  double between = 1.0;
};

struct BlockProbabilities {
  double within_first = 0.0;
  double within_second = 0.0;
  double between = 0.0;
};

/// Edge probabilities proportional to `ratio` such that the expected number of
/// edges of the two-block model equals `target_edges`. Block 1 is [0, n/2).
BlockProbabilities two_block_probabilities(int vertex_count, double target_edges, const BlockRatio& ratio);
Graph generate_two_block(int vertex_count, double target_edges, const BlockRatio& ratio, std::uint64_t seed);

/// Edge count giving the requested mean degree: round(n * mean / 2).
std::int64_t edges_for_mean_degree(int vertex_count, double mean_degree);

Graph complete_graph(int n);
Graph star_graph(int n);
Graph path_graph(int n);
Graph cycle_graph(int n);

bool is_connected(const Graph& g);
bool is_bipartite(const Graph& g);

}  // namespace degdist
