#pragma once

#include <optional>

#include "degdist/common.hpp"

namespace degdist {

// Discrete Epanechnikov smoothing on the degree grid 0..M. Kernel weights are
// K(d) = 1 - (d / (h + 1))^2 for |d| <= h. Mass falling outside [0, M] is
// folded back by mirror reflection about -1/2 and M + 1/2, which makes the
// smoothing matrix symmetric and doubly stochastic: totals and constant
// vectors are both preserved.

/// W(k, j): weight carried from cell j to cell k.
Matrix smoothing_matrix(int size, int bandwidth);

Vector smooth_counts(const Vector& counts, int bandwidth);

/// Least-squares cross-validation score
///   sum_k fhat(k)^2 - (2 / n) sum_k N_k fhat^{(-k)}(k)
/// with fhat = W N / n and the leave-one-observation-out estimate
/// fhat^{(-k)}(k) = ((W N)(k) - W(k, k)) / (n - 1).
double lscv_score(const Vector& counts, int bandwidth);

/// argmin of lscv_score over 0..max_bandwidth; ties go to the smaller h.
int select_bandwidth(const Vector& counts, int max_bandwidth);

/// ceil((M + 1) / 4).
int default_max_bandwidth(int bound);

/// Diagonal approximation C_hat = diag(N*_smooth) + delta * I.
struct CovarianceApprox {
  Vector smoothed;
  Vector diagonal;
  double delta = 0.0;
  int bandwidth = 0;

  double condition_number() const { return diagonal.maxCoeff() / diagonal.minCoeff(); }
  Vector inverse_diagonal() const { return diagonal.cwiseInverse(); }
};

/// Smooths with the LSCV bandwidth, then picks delta so that
/// (max + delta) / (min + delta) = target_condition, floored at
/// 1e-6 * max(smoothed) when that would make delta non-positive.
CovarianceApprox build_covariance(const Vector& observed, double target_condition,
                                  std::optional<int> max_bandwidth = std::nullopt);

/// Covariance built around an already-smoothed vector (no bandwidth search).
CovarianceApprox covariance_from_smoothed(Vector smoothed, double target_condition, int bandwidth = 0);

}  // namespace degdist
