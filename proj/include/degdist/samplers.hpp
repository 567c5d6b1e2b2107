#pragma once

#include <cstdint>
#include <vector>

#include "degdist/graph.hpp"

namespace degdist {

struct SampleParams {
  /// Bernoulli rate p for ego, snowball1, induced (vertices) and incident (edges).
  double rate = 0.0;
  /// Number of distinct edges n*_e collected by the random walk.
  std::int64_t edge_budget = 0;
};

/// The observed subgraph G* = (V*, E*).
///
/// `sampled_graph` lives on the parent graph's vertex indices and holds E*.
/// `included` is V* in increasing order and `observed_degree[i]` is the
/// observed degree of `included[i]`.
struct SampleResult {
  Design design = Design::ego;
  SampleParams params;
  std::uint64_t seed = 0;
  int parent_vertex_count = 0;
  Graph sampled_graph;
  std::vector<int> included;
  std::vector<int> observed_degree;
  DegreeCounts observed_counts;

  int included_count() const { return static_cast<int>(included.size()); }
  /// Observed counts padded to length bound+1.
  DegreeCounts counts(int bound) const { return observed_counts.resized(bound); }
};

/// Draws one sample under `design`. Rates must lie in (0, 1]; the random
/// walk needs a connected, non-bipartite graph and 1 <= edge_budget <= n_e.
SampleResult sample(Design design, const Graph& g, const SampleParams& params, std::uint64_t seed);

/// Over `trials` independent samples, the fraction of (trial, degree-k vertex)
/// pairs in which the vertex is included with observed degree i, for
/// i = 0..k. Estimates column k of the sampling operator.
std::vector<double> empirical_inclusion(Design design, const Graph& g, const SampleParams& params, int k, int trials,
                                        std::uint64_t seed);

/// Expected |V*| / n_v under one-wave snowball sampling with seed rate p.
double snowball_expected_fraction(const Graph& g, double p);
/// Seed rate p at which the expected snowball coverage equals `fraction`
/// (bisection). Fails if the fraction is not reachable.
double calibrate_snowball_rate(const Graph& g, double fraction);

}  // namespace degdist
