#pragma once

#include <optional>

#include "degdist/graph.hpp"

namespace degdist {

/// Kolmogorov-Smirnov D between two nonnegative vectors, each normalized to
/// sum 1 and zero-padded to a common length.
double ks_d_statistic(const Vector& f1, const Vector& f2);

/// Epidemic-threshold reference values. Thresholds are reciprocals of the
/// moments; an empty graph (M1 = 0) reports them as +inf with `degenerate`.
struct BoundsReport {
  double m1 = 0.0;
  double m2 = 0.0;
  double u = 0.0;
  double edge_count = 0.0;
  double vertex_count = 0.0;
  double inv_m1 = 0.0;
  double inv_sqrt_m2 = 0.0;
  double inv_u = 0.0;
  std::optional<double> lambda1;
  std::optional<double> inv_lambda1;
  bool degenerate = false;
};

/// Counts may be real-valued (an estimate). Without `edge_count` the
/// degree-sum identity sum(k N_k) / 2 is used.
BoundsReport epidemic_bounds(const Vector& counts, std::optional<double> edge_count = std::nullopt);
BoundsReport epidemic_bounds(const Graph& g, double tolerance = 1e-12);

/// Largest adjacency eigenvalue by power iteration on A + I (the shift keeps
/// bipartite graphs from oscillating). Throws NumericalError past the cap.
double largest_adjacency_eigenvalue(const Graph& g, double tolerance = 1e-12, int max_iterations = 100000);

}  // namespace degdist
