#pragma once

#include <vector>

#include "degdist/common.hpp"

namespace degdist {

/// (M-1)x(M+1) second-difference operator D with rows (.., 1, -2, 1, ..).
struct PenaltyMatrix {
  Matrix difference;

  /// Omega = D' D.
  Matrix gram() const { return difference.transpose() * difference; }
};

/// Rejects M < 2.
PenaltyMatrix build_penalty(int bound);

struct SolverOptions {
  /// Relative KKT residual accepted as converged.
  double kkt_tolerance = 1e-8;
  /// 0 selects 50 * (M + 1).
  int max_iterations = 0;
};

struct QPSolution {
  Vector n_hat;
  double objective = 0.0;
  std::vector<int> active_set;  ///< indices held at zero
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

/// Affine form N_hat = matrix * N* + offset of the equality-only estimator.
struct AffineMap {
  Matrix matrix;
  Vector offset;
};

/// Penalized weighted least squares for degree counts:
///
///   minimize   (P N - N*)' W (P N - N*) + lambda * ||D N||^2
///   subject to N >= 0,  sum(N) = n_v
///
/// with W = C_hat^{-1} diagonal. The fixed parts (P' W P, Omega) are built
/// once; solves at different lambda or N* reuse them.
class PwlsProblem {
 public:
  PwlsProblem(Matrix op, Vector inverse_variance, double vertex_count);

  const Matrix& op() const { return op_; }
  const Vector& weights() const { return weights_; }
  double vertex_count() const { return vertex_count_; }
  int dimension() const { return static_cast<int>(op_.cols()); }
  const Matrix& omega() const { return omega_; }
  const Matrix& fit_gram() const { return fit_gram_; }

  /// Primal active-set solve. `warm` (a previous solution of this problem)
  /// seeds the iterate and working set.
  QPSolution solve(const Vector& observed, double lambda, const SolverOptions& options = {},
                   const QPSolution* warm = nullptr) const;

  /// Minimizer with only the sum constraint; entries may be negative.
  Vector solve_equality_only(const Vector& observed, double lambda) const;
  AffineMap estimator_map(double lambda) const;

  double fit_term(const Vector& n, const Vector& observed) const;
  double penalty_term(const Vector& n) const;
  double objective(const Vector& n, const Vector& observed, double lambda) const {
    return fit_term(n, observed) + lambda * penalty_term(n);
  }

 private:
  Eigen::FullPivLU<Matrix> kkt_factor(double lambda) const;

  Matrix op_;
  Vector weights_;
  double vertex_count_;
  Matrix omega_;
  Matrix fit_gram_;  ///< P' W P
};

/// One-shot helpers mirroring the class methods.
QPSolution solve_pwls(const Matrix& op, const Vector& observed, const Vector& covariance_diagonal, double lambda,
                      double vertex_count, const SolverOptions& options = {});
Vector solve_equality_only(const Matrix& op, const Vector& observed, const Vector& covariance_diagonal, double lambda,
                           double vertex_count);
AffineMap estimator_map(const Matrix& op, const Vector& covariance_diagonal, double lambda, double vertex_count);

}  // namespace degdist
