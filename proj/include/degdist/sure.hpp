#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "degdist/estimator.hpp"

namespace degdist {

/// Monte Carlo settings for generalized SURE.
struct SureConfig {
  double epsilon = 0.1;
  int replicates = 100;
  std::vector<double> lambda_grid;  ///< strictly increasing, positive; empty selects the default grid
  std::uint64_t seed = 0;
};

struct SurePoint {
  double lambda = 0.0;
  double wmse_hat = 0.0;
  double divergence = 0.0;
  double div_std_error = 0.0;
  bool converged = true;
};

struct SureCurve {
  std::vector<SurePoint> points;
  double argmin_lambda = 0.0;
  std::size_t argmin_index = 0;
};

/// N* -> N_hat at a fixed lambda.
using EstimateFn = std::function<Vector(const Vector&)>;

struct DivergenceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Standard normal perturbations b_1..b_K as the columns of a dim x K matrix.
/// Column i depends only on (seed, i).
Matrix perturbation_draws(Eigen::Index dim, int replicates, std::uint64_t seed);

/// (1/K) sum_i (1/eps) b_i' P (f(N* + eps b_i) - f(N*)) and its standard error.
DivergenceEstimate mc_divergence(const EstimateFn& estimate, const Matrix& op, const Vector& observed, double epsilon,
                                 const Matrix& draws);
DivergenceEstimate mc_divergence(const EstimateFn& estimate, const Matrix& op, const Vector& observed,
                                 const SureConfig& config);

/// (P Nhat)' W (P Nhat) + 2 div - 2 (P Nhat)' W N*, with W = C_hat^{-1}.
/// The lambda-free term (P N)' W (P N) is omitted.
double wmse_hat(const Matrix& op, const Vector& observed, const Vector& covariance_diagonal, const Vector& estimate,
                double divergence);

/// 13 points, half a decade apart, centred on trace(P' W P) / trace(Omega).
std::vector<double> default_lambda_grid(const PwlsProblem& problem);

/// Evaluates wmse_hat over the grid (same perturbations at every lambda) and
/// returns the curve with its argmin over converged points.
SureCurve select_lambda(const PwlsProblem& problem, const Vector& observed, const SureConfig& config,
                        const SolverOptions& options = {});

}  // namespace degdist
