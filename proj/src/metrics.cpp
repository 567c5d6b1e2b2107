#include "degdist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace degdist {

double ks_d_statistic(const Vector& f1, const Vector& f2) {
  if (f1.size() == 0 || f2.size() == 0) throw InvalidArgument("K-S statistic needs nonempty vectors");
  if ((f1.array() < 0.0).any() || (f2.array() < 0.0).any()) throw InvalidArgument("K-S inputs must be nonnegative");
  const double s1 = f1.sum();
  const double s2 = f2.sum();
  if (!(s1 > 0.0) || !(s2 > 0.0)) throw InvalidArgument("K-S inputs must have positive mass");
  const Eigen::Index n = std::max(f1.size(), f2.size());
  double c1 = 0.0;
  double c2 = 0.0;
  double d = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i < f1.size()) c1 += f1[i] / s1;
    if (i < f2.size()) c2 += f2[i] / s2;
    d = std::max(d, std::abs(c1 - c2));
  }
  return std::min(d, 1.0);
}

BoundsReport epidemic_bounds(const Vector& counts, std::optional<double> edge_count) {
  if ((counts.array() < 0.0).any()) throw InvalidArgument("degree counts must be nonnegative");
  const double nv = counts.sum();
  if (!(nv > 0.0)) throw InvalidArgument("degree counts must have positive total");
  BoundsReport r;
  r.vertex_count = nv;
  double sum_k = 0.0;
  double sum_k2 = 0.0;
  for (Eigen::Index k = 0; k < counts.size(); ++k) {
    const double kd = static_cast<double>(k);
    sum_k += kd * counts[k];
    sum_k2 += kd * kd * counts[k];
  }
  r.m1 = sum_k / nv;
  r.m2 = sum_k2 / nv;
  r.edge_count = edge_count ? *edge_count : 0.5 * sum_k;
  if (r.edge_count < 0.0) throw InvalidArgument("edge count must be nonnegative");
  r.u = std::sqrt(2.0 * r.edge_count * (nv - 1.0) / nv);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (r.m1 <= 0.0) {
    r.degenerate = true;
    r.inv_m1 = r.inv_sqrt_m2 = r.inv_u = inf;
    return r;
  }
  r.inv_m1 = 1.0 / r.m1;
  r.inv_sqrt_m2 = 1.0 / std::sqrt(r.m2);
  r.inv_u = r.u > 0.0 ? 1.0 / r.u : inf;
  return r;
}

BoundsReport epidemic_bounds(const Graph& g, double tolerance) {
  const DegreeCounts counts = degree_counts(g);
  BoundsReport r = epidemic_bounds(counts.values(), static_cast<double>(g.edge_count()));
  if (g.edge_count() > 0) {
    r.lambda1 = largest_adjacency_eigenvalue(g, tolerance);
    r.inv_lambda1 = 1.0 / *r.lambda1;
  } else {
    r.lambda1 = 0.0;
    r.inv_lambda1 = std::numeric_limits<double>::infinity();
  }
  return r;
}

double largest_adjacency_eigenvalue(const Graph& g, double tolerance, int max_iterations) {
  const int n = g.vertex_count();
  if (n == 0) throw InvalidArgument("graph has no vertices");
  if (g.edge_count() == 0) return 0.0;
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 + 1e-6 * static_cast<double>(i) / n;
  x.normalize();
  Vector y(n);
  double previous = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    for (int v = 0; v < n; ++v) {
      double s = x[v];
      for (int w : g.neighbors(v)) s += x[w];
      y[v] = s;
    }
    const double rayleigh = x.dot(y);  // eigenvalue of A + I
    const double norm = y.norm();
    x = y / norm;
    if (it > 0 && std::abs(rayleigh - previous) <= tolerance * std::abs(rayleigh)) {
      // Residual check guards against a stalled Rayleigh quotient.
      Vector ax(n);
      for (int v = 0; v < n; ++v) {
        double s = x[v];
        for (int w : g.neighbors(v)) s += x[w];
        ax[v] = s;
      }
      const double lam = x.dot(ax);
      if ((ax - lam * x).norm() <= std::sqrt(tolerance) * lam) return lam - 1.0;
    }
    previous = rayleigh;
  }
  throw NumericalError("power iteration did not converge");
}

}  // namespace degdist
