#include "degdist/sure.hpp"

#include <cmath>
#include <limits>

namespace degdist {

Matrix perturbation_draws(Eigen::Index dim, int replicates, std::uint64_t seed) {
  if (replicates < 1) throw InvalidArgument("SURE needs K >= 1 replicates");
  Matrix draws(dim, replicates);
  for (int i = 0; i < replicates; ++i) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index r = 0; r < dim; ++r) draws(r, i) = normal(rng);
  }
  return draws;
}

DivergenceEstimate mc_divergence(const EstimateFn& estimate, const Matrix& op, const Vector& observed, double epsilon,
                                 const Matrix& draws) {
  if (!(epsilon > 0.0)) throw InvalidArgument("SURE perturbation scale must be positive");
  if (draws.rows() != observed.size()) throw InvalidArgument("perturbation dimension mismatch");
  const int k = static_cast<int>(draws.cols());
  if (k < 1) throw InvalidArgument("SURE needs K >= 1 replicates");
  const Vector base = estimate(observed);
  std::vector<double> terms(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const Vector shifted = estimate(observed + epsilon * draws.col(i));
    terms[i] = draws.col(i).dot(op * (shifted - base)) / epsilon;
  }
  double mean = 0.0;
  for (double t : terms) mean += t;
  mean /= k;
  double ss = 0.0;
  for (double t : terms) ss += (t - mean) * (t - mean);
  const double se = k > 1 ? std::sqrt(ss / (k - 1) / k) : 0.0;
  return {mean, se};
}

DivergenceEstimate mc_divergence(const EstimateFn& estimate, const Matrix& op, const Vector& observed,
                                 const SureConfig& config) {
  return mc_divergence(estimate, op, observed, config.epsilon,
                       perturbation_draws(observed.size(), config.replicates, config.seed));
}

double wmse_hat(const Matrix& op, const Vector& observed, const Vector& covariance_diagonal, const Vector& estimate,
                double divergence) {
  const Vector fitted = op * estimate;
  const Vector weighted = fitted.cwiseQuotient(covariance_diagonal);
  return fitted.dot(weighted) + 2.0 * divergence - 2.0 * weighted.dot(observed);
}

std::vector<double> default_lambda_grid(const PwlsProblem& problem) {
  const double omega_trace = problem.omega().trace();
  const double fit_trace = problem.fit_gram().trace();
  const double centre = omega_trace > 0.0 && fit_trace > 0.0 ? fit_trace / omega_trace : 1.0;
  std::vector<double> grid;
  for (int i = -6; i <= 6; ++i) grid.push_back(centre * std::pow(10.0, 0.5 * i));
  return grid;
}

SureCurve select_lambda(const PwlsProblem& problem, const Vector& observed, const SureConfig& config,
                        const SolverOptions& options) {
  const std::vector<double> grid = config.lambda_grid.empty() ? default_lambda_grid(problem) : config.lambda_grid;
  if (grid.empty()) throw InvalidArgument("lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw InvalidArgument("lambda grid values must be non-negative");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("lambda grid must be strictly increasing");
  }
  if (!(config.epsilon > 0.0)) throw InvalidArgument("SURE perturbation scale must be positive");

  const Matrix draws = perturbation_draws(observed.size(), config.replicates, config.seed);
  const Vector covariance = problem.weights().cwiseInverse();
  SureCurve curve;
  QPSolution previous;
  bool have_previous = false;
  for (double lambda : grid) {
    SurePoint point;
    point.lambda = lambda;
    const QPSolution base = problem.solve(observed, lambda, options, have_previous ? &previous : nullptr);
    bool all_converged = base.converged;
    const EstimateFn estimate = [&](const Vector& y) -> Vector {
      if (&y == &observed) return base.n_hat;
      const QPSolution s = problem.solve(y, lambda, options, &base);
      all_converged = all_converged && s.converged;
      return s.n_hat;
    };
    const DivergenceEstimate div = mc_divergence(estimate, problem.op(), observed, config.epsilon, draws);
    point.divergence = div.value;
    point.div_std_error = div.std_error;
    point.wmse_hat = wmse_hat(problem.op(), observed, covariance, base.n_hat, div.value);
    point.converged = all_converged && std::isfinite(point.wmse_hat);
    curve.points.push_back(point);
    previous = base;
    have_previous = true;
  }

  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const SurePoint& pt = curve.points[i];
    if (!pt.converged) continue;
    if (!found || pt.wmse_hat < best) {
      best = pt.wmse_hat;
      curve.argmin_index = i;
      found = true;
    }
  }
  if (!found) throw NumericalError("no lambda on the grid produced a converged SURE evaluation");
  curve.argmin_lambda = curve.points[curve.argmin_index].lambda;
  return curve;
}

}  // namespace degdist
