#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "degdist/graph.hpp"

namespace degdist {

// Exact second-moment formulas for observed degree counts under one-wave
// snowball and induced-subgraph sampling, plus Poisson-approximation
// diagnostics. All of these enumerate vertex pairs and are meant for small
// graphs (a few hundred vertices).

/// n0(k, l, t) / n1(k, l, t): ordered pairs of distinct nonadjacent / adjacent
/// vertices with degrees k and l sharing exactly t common neighbours.
class CommonNeighborTensor {
 public:
  explicit CommonNeighborTensor(int bound);

  int bound() const { return bound_; }
  double nonadjacent(int k, int l, int t) const { return n0_[index(k, l, t)]; }
  double adjacent(int k, int l, int t) const { return n1_[index(k, l, t)]; }
  void add(bool adjacent_pair, int k, int l, int t) { (adjacent_pair ? n1_ : n0_)[index(k, l, t)] += 1.0; }

 private:
  std::size_t index(int k, int l, int t) const {
    const auto s = static_cast<std::size_t>(bound_ + 1);
    return (static_cast<std::size_t>(k) * s + static_cast<std::size_t>(l)) * s + static_cast<std::size_t>(t);
  }
  int bound_;
  std::vector<double> n0_;
  std::vector<double> n1_;
};

CommonNeighborTensor common_neighbor_tensor(const Graph& g);

/// Cov(N*_k, N*_l) under one-wave snowball sampling with seed rate p; the
/// variance when k == l.
double snowball_cov(const Graph& g, double p, int k, int l);
double snowball_cov(const CommonNeighborTensor& tensor, const DegreeCounts& counts, double p, int k, int l);

/// Var(N*_k) under induced-subgraph sampling with rate p.
double induced_var(const Graph& g, double p, int k);
double induced_var(const CommonNeighborTensor& tensor, const DegreeCounts& counts, double p, int k);

/// P(v in S, observed degree >= k) for a vertex of true degree d under
/// induced sampling: p * P(Binomial(d, p) >= k).
double induced_tail_inclusion(int degree, double p, int k);

/// Poisson pmf on 0..max_count, plus the tail mass as a final entry.
std::vector<double> poisson_pmf_with_tail(double mean, int max_count);

/// Total-variation distance between an empirical histogram (counts indexed by
/// value) and Poisson(mean), including the Poisson mass beyond the histogram.
double tv_to_poisson(const std::vector<double>& histogram, double mean);

/// Chen-Stein diagnostics for the cumulative observed count
/// Ntilde*_k = #{v in S : observed degree >= k} under induced sampling.
struct PoissonDiagnostics {
  int k = 0;
  int trials = 0;
  double lambda = 0.0;               ///< sum_v pi_{k,v}
  double sum_pi_squared = 0.0;
  double mc_mean = 0.0;
  double mc_variance = 0.0;
  double chen_stein_bound = 0.0;     ///< (1 - e^-lambda)/lambda [Var - lambda + 2 sum pi^2]
  double tv_distance = 0.0;          ///< empirical histogram vs Poisson(lambda)
  double mc_margin = 0.0;            ///< allowance for histogram noise in tv_distance
  std::vector<std::pair<double, double>> qq;  ///< (empirical quantile, Poisson quantile)
};

PoissonDiagnostics poisson_diagnostics(const Graph& g, double p, int k, int trials, std::uint64_t seed);

/// Marginal distribution of N*_k across repeated induced samples compared
/// with Poisson((P N)_k).
struct MarginalFit {
  int k = 0;
  double expected = 0.0;  ///< (P_ind N)_k
  double mc_mean = 0.0;
  double mc_variance = 0.0;
  double tv_distance = 0.0;
  std::vector<double> histogram;  ///< empirical frequencies of N*_k = 0, 1, ...
  std::vector<std::pair<double, double>> qq;
};

std::vector<MarginalFit> induced_marginal_fits(const Graph& g, double p, const std::vector<int>& degrees, int trials,
                                               std::uint64_t seed);

}  // namespace degdist
