#include "degdist/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace degdist {

PenaltyMatrix build_penalty(int bound) {
  if (bound < 2) throw InvalidArgument("second differences need M >= 2, got M=" + std::to_string(bound));
  Matrix d = Matrix::Zero(bound - 1, bound + 1);
  for (int r = 0; r < bound - 1; ++r) {
    d(r, r) = 1.0;
    d(r, r + 1) = -2.0;
    d(r, r + 2) = 1.0;
  }
  return {std::move(d)};
}

PwlsProblem::PwlsProblem(Matrix op, Vector inverse_variance, double vertex_count)
    : op_(std::move(op)), weights_(std::move(inverse_variance)), vertex_count_(vertex_count) {
  if (op_.rows() != weights_.size()) throw InvalidArgument("covariance diagonal and operator rows differ in size");
  if (op_.cols() == 0) throw InvalidArgument("empty operator");
  if (!(weights_.array() > 0.0).all()) throw InvalidArgument("inverse covariance weights must be positive");
  if (!(vertex_count_ > 0.0)) throw InvalidArgument("vertex count must be positive");
  const int bound = static_cast<int>(op_.cols()) - 1;
  omega_ = bound >= 2 ? build_penalty(bound).gram() : Matrix::Zero(op_.cols(), op_.cols());
  fit_gram_ = op_.transpose() * weights_.asDiagonal() * op_;
}

double PwlsProblem::fit_term(const Vector& n, const Vector& observed) const {
  const Vector resid = op_ * n - observed;
  return resid.dot(weights_.cwiseProduct(resid));
}

double PwlsProblem::penalty_term(const Vector& n) const { return n.dot(omega_ * n); }

Eigen::FullPivLU<Matrix> PwlsProblem::kkt_factor(double lambda) const {
  const Eigen::Index d = op_.cols();
  Matrix b = Matrix::Zero(d + 1, d + 1);
  b.topLeftCorner(d, d) = fit_gram_ + lambda * omega_;
  b.topRightCorner(d, 1).setConstant(0.5);
  b.bottomLeftCorner(1, d).setConstant(1.0);
  Eigen::FullPivLU<Matrix> lu(b);
  if (!lu.isInvertible()) throw NumericalError("KKT matrix of the equality-constrained problem is singular");
  return lu;
}

Vector PwlsProblem::solve_equality_only(const Vector& observed, double lambda) const {
  if (observed.size() != op_.rows()) throw InvalidArgument("observed counts and operator differ in dimension");
  const Eigen::Index d = op_.cols();
  Vector rhs(d + 1);
  rhs.head(d) = op_.transpose() * weights_.cwiseProduct(observed);
  rhs[d] = vertex_count_;
  return kkt_factor(lambda).solve(rhs).head(d);
}

AffineMap PwlsProblem::estimator_map(double lambda) const {
  const Eigen::Index d = op_.cols();
  const auto lu = kkt_factor(lambda);
  Matrix rhs = Matrix::Zero(d + 1, op_.rows());
  rhs.topRows(d) = op_.transpose() * weights_.asDiagonal();
  Vector unit = Vector::Zero(d + 1);
  unit[d] = vertex_count_;
  return {lu.solve(rhs).topRows(d), lu.solve(unit).head(d)};
}

QPSolution PwlsProblem::solve(const Vector& observed, double lambda, const SolverOptions& options,
                              const QPSolution* warm) const {
  if (observed.size() != op_.rows()) throw InvalidArgument("observed counts and operator differ in dimension");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  const Eigen::Index dim = op_.cols();
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : 50 * static_cast<int>(dim);

  const Matrix hessian = 2.0 * (fit_gram_ + lambda * omega_);
  const Vector linear = 2.0 * (op_.transpose() * weights_.cwiseProduct(observed));
  std::vector<char> fixed(static_cast<std::size_t>(dim), 0);
  Vector x;

  if (warm != nullptr && warm->n_hat.size() == dim && (warm->n_hat.array() >= 0.0).all() &&
      std::abs(warm->n_hat.sum() - vertex_count_) <= 1e-9 * vertex_count_) {
    x = warm->n_hat;
    for (int i : warm->active_set) {
      fixed[i] = 1;
      x[i] = 0.0;
    }
  } else {
    // Strictly interior start near the equality-only solution.
    Vector start;
    try {
      start = solve_equality_only(observed, lambda).cwiseMax(0.0);
    } catch (const NumericalError&) {
      start = Vector::Zero(dim);
    }
    start.array() += 1e-3 * vertex_count_ / static_cast<double>(dim);
    x = start * (vertex_count_ / start.sum());
  }

  QPSolution out;
  double scale = 1.0;
  double nu = 0.0;
  bool converged = false;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const Vector grad = hessian * x - linear;
    scale = std::max({1.0, linear.cwiseAbs().maxCoeff(), grad.cwiseAbs().maxCoeff()});

    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < dim; ++i)
      if (!fixed[i]) free.push_back(i);
    const auto nf = static_cast<Eigen::Index>(free.size());

    Matrix kkt = Matrix::Zero(nf + 1, nf + 1);
    Vector rhs = Vector::Zero(nf + 1);
    for (Eigen::Index a = 0; a < nf; ++a) {
      for (Eigen::Index b = 0; b < nf; ++b) kkt(a, b) = hessian(free[a], free[b]);
      kkt(a, nf) = 1.0;
      kkt(nf, a) = 1.0;
      rhs[a] = -grad[free[a]];
    }
    Vector sol;
    Eigen::FullPivLU<Matrix> lu(kkt);
    if (lu.isInvertible()) {
      sol = lu.solve(rhs);
    } else {
      sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    }
    nu = sol[nf];

    double step_norm = 0.0;
    for (Eigen::Index a = 0; a < nf; ++a) step_norm = std::max(step_norm, std::abs(sol[a]));
    if (step_norm > 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
      double alpha = 1.0;
      Eigen::Index blocking = -1;
      for (Eigen::Index a = 0; a < nf; ++a) {
        const double di = sol[a];
        if (di >= 0.0) continue;
        const double ratio = std::max(0.0, -x[free[a]] / di);
        if (ratio < alpha) {
          alpha = ratio;
          blocking = free[a];
        }
      }
      for (Eigen::Index a = 0; a < nf; ++a) x[free[a]] += alpha * sol[a];
      if (blocking >= 0) {
        x[blocking] = 0.0;
        fixed[blocking] = 1;
        continue;
      }
    }

    // At the minimizer of the current face: check the bound multipliers.
    const Vector g = hessian * x - linear;
    nu = 0.0;
    for (Eigen::Index i : free) nu -= g[i];
    nu /= static_cast<double>(nf);
    Eigen::Index worst = -1;
    double worst_z = -options.kkt_tolerance * scale;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (!fixed[i]) continue;
      const double z = g[i] + nu;
      if (z < worst_z) {
        worst_z = z;
        worst = i;
      }
    }
    if (worst < 0) {
      converged = true;
      break;
    }
    fixed[worst] = 0;
  }

  // Floating-point hygiene: clamp tiny negatives, restore the total.
  for (Eigen::Index i = 0; i < dim; ++i)
    if (x[i] < 0.0 && x[i] >= -1e-9 * std::max(1.0, vertex_count_)) x[i] = 0.0;
  if (x.sum() > 0.0) x *= vertex_count_ / x.sum();

  const Vector grad = hessian * x - linear;
  double residual = std::abs(x.sum() - vertex_count_);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (fixed[i]) {
      residual = std::max(residual, std::max(0.0, -(grad[i] + nu)));
      residual = std::max(residual, std::abs(x[i]) * std::max(0.0, grad[i] + nu) / std::max(1.0, vertex_count_));
    } else {
      residual = std::max(residual, std::abs(grad[i] + nu));
    }
    residual = std::max(residual, std::max(0.0, -x[i]));
  }

  out.n_hat = std::move(x);
  out.objective = objective(out.n_hat, observed, lambda);
  for (Eigen::Index i = 0; i < dim; ++i)
    if (fixed[i]) out.active_set.push_back(static_cast<int>(i));
  out.iterations = iter;
  out.kkt_residual = residual / scale;
  out.converged = converged && out.kkt_residual <= std::max(options.kkt_tolerance, 1e-6);
  return out;
}

QPSolution solve_pwls(const Matrix& op, const Vector& observed, const Vector& covariance_diagonal, double lambda,
                      double vertex_count, const SolverOptions& options) {
  return PwlsProblem(op, covariance_diagonal.cwiseInverse(), vertex_count).solve(observed, lambda, options);
}

Vector solve_equality_only(const Matrix& op, const Vector& observed, const Vector& covariance_diagonal, double lambda,
                           double vertex_count) {
  return PwlsProblem(op, covariance_diagonal.cwiseInverse(), vertex_count).solve_equality_only(observed, lambda);
}

AffineMap estimator_map(const Matrix& op, const Vector& covariance_diagonal, double lambda, double vertex_count) {
  return PwlsProblem(op, covariance_diagonal.cwiseInverse(), vertex_count).estimator_map(lambda);
}

}  // namespace degdist
