#pragma once

#include <cstdint>

#include "degdist/common.hpp"

namespace degdist {

/// The (M+1)x(M+1) matrix P with P(i, j) = probability that a vertex of true
/// degree j is sampled and observed with degree i. Rows and columns are
/// indexed by degree starting at 0.
class SamplingOperator {
 public:
  SamplingOperator(Matrix matrix, Design design, double rate, std::int64_t total_edges, std::int64_t sampled_edges);

  const Matrix& matrix() const { return matrix_; }
  Design design() const { return design_; }
  /// Sampling rate p; for the random walk the edge fraction n*_e / n_e.
  double rate() const { return rate_; }
  std::int64_t total_edges() const { return total_edges_; }
  std::int64_t sampled_edges() const { return sampled_edges_; }
  int bound() const { return static_cast<int>(matrix_.rows()) - 1; }

 private:
  Matrix matrix_;
  Design design_;
  double rate_;
  std::int64_t total_edges_;
  std::int64_t sampled_edges_;
};

/// log C(n, k) via lgamma; -inf when k < 0 or k > n.
double log_binomial(double n, double k);

/// Operator for ego, snowball1, induced and incident sampling at rate p.
SamplingOperator build_operator(Design design, double rate, int bound);
/// Random-walk operator: hypergeometric C(j,i) C(n_e-j, n*_e-i) / C(n_e, n*_e)
/// for 1 <= i <= j.
SamplingOperator build_random_walk_operator(std::int64_t total_edges, std::int64_t sampled_edges, int bound);

struct SpectralDiagnostics {
  Vector singular_values;  ///< nonincreasing
  Matrix left;             ///< U, columns u_i
  Matrix right;            ///< V, columns v_i
  /// d_max / d_min; +inf when d_min is zero to working precision.
  double condition_number = 0.0;
};

SpectralDiagnostics spectral(const Matrix& p);
inline SpectralDiagnostics spectral(const SamplingOperator& op) { return spectral(op.matrix()); }

/// Ratio of largest to smallest eigenvalue magnitude of a triangular matrix
/// (read off its diagonal).
double triangular_eigenvalue_ratio(const Matrix& p);

/// sum_i (u_i' N* / d_i) v_i over singular triplets with d_i > cutoff * d_max.
/// Entries may be negative.
Vector naive_estimate(const Matrix& p, const Vector& observed, double relative_cutoff = 1e-12);
inline Vector naive_estimate(const SamplingOperator& op, const Vector& observed, double relative_cutoff = 1e-12) {
  return naive_estimate(op.matrix(), observed, relative_cutoff);
}

struct InducedEigensystem {
  Vector eigenvalues;   ///< eigenvalues(k) = p^(k+1)
  Matrix eigenvectors;  ///< column k: (-1)^(k-j) C(k, j) for j <= k (0-indexed)
};

/// Closed-form eigen-decomposition of the induced-subgraph operator. Column k
/// (0-indexed) is the eigenvector for eigenvalue p^(k+1).
InducedEigensystem induced_eigen_closed_form(double rate, int bound);

}  // namespace degdist
