#include "degdist/operator.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace degdist {

namespace {

constexpr double kFlushBelow = 1e-300;

// n * log(x) with the convention 0 * log(0) = 0.
double log_power(double x, double n) { return n == 0.0 ? 0.0 : n * std::log(x); }

double flushed_exp(double log_value) {
  const double v = std::exp(log_value);
  return v < kFlushBelow ? 0.0 : v;
}

void check_common(double rate, int bound) {
  if (bound < 0) throw InvalidArgument("max-degree bound M must be >= 0");
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidArgument("sampling rate must lie in (0, 1], got " + std::to_string(rate));
}

}  // namespace

SamplingOperator::SamplingOperator(Matrix matrix, Design design, double rate, std::int64_t total_edges,
                                   std::int64_t sampled_edges)
    : matrix_(std::move(matrix)), design_(design), rate_(rate), total_edges_(total_edges), sampled_edges_(sampled_edges) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) throw InvalidArgument("sampling operator must be square and nonempty");
}

double log_binomial(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

SamplingOperator build_operator(Design design, double rate, int bound) {
  check_common(rate, bound);
  const int size = bound + 1;
  Matrix p = Matrix::Zero(size, size);
  const double q = 1.0 - rate;
  switch (design) {
    case Design::ego:
      p.diagonal().setConstant(rate);
      break;
    case Design::snowball1:
      for (int j = 0; j < size; ++j) p(j, j) = -std::expm1((j + 1) * std::log1p(-rate));
      break;
    case Design::induced:
      for (int j = 0; j < size; ++j)
        for (int i = 0; i <= j; ++i)
          p(i, j) = flushed_exp(log_binomial(j, i) + log_power(rate, i + 1) + log_power(q, j - i));
      break;
    case Design::incident:
      for (int j = 1; j < size; ++j)
        for (int i = 1; i <= j; ++i)
          p(i, j) = flushed_exp(log_binomial(j, i) + log_power(rate, i) + log_power(q, j - i));
      break;
    case Design::random_walk:
      throw InvalidArgument("random-walk operator needs (n_e, n*_e); use build_random_walk_operator");
  }
  return SamplingOperator(std::move(p), design, rate, 0, 0);
}

SamplingOperator build_random_walk_operator(std::int64_t total_edges, std::int64_t sampled_edges, int bound) {
  if (bound < 0) throw InvalidArgument("max-degree bound M must be >= 0");
  if (sampled_edges < 1 || sampled_edges > total_edges) throw InvalidArgument("random walk needs 1 <= n*_e <= n_e");
  const int size = bound + 1;
  const double ne = static_cast<double>(total_edges);
  const double ns = static_cast<double>(sampled_edges);
  // P(i | j) = C(j, i) C(n_e - j, n*_e - i) / C(n_e, n*_e). The ratio of the
  // last two is written as short falling-factorial products,
  //   [n*_e]_i [n_e - n*_e]_(j-i) / [n_e]_j,
  // kept as prefix sums of logs; differences of lgamma at n_e ~ 1e4 already
  // lose about four digits.
  std::vector<double> in_sample(size, 0.0);   // log [n*_e]_i, -inf once i > n*_e
  std::vector<double> out_sample(size, 0.0);  // log [n_e - n*_e]_m
  std::vector<double> all(size, 0.0);         // log [n_e]_j
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (int a = 1; a < size; ++a) {
    in_sample[a] = ns - (a - 1) > 0 ? in_sample[a - 1] + std::log(ns - (a - 1)) : neg_inf;
    out_sample[a] = ne - ns - (a - 1) > 0 ? out_sample[a - 1] + std::log(ne - ns - (a - 1)) : neg_inf;
    all[a] = ne - (a - 1) > 0 ? all[a - 1] + std::log(ne - (a - 1)) : neg_inf;
  }
  Matrix p = Matrix::Zero(size, size);
  for (int j = 1; j < size; ++j) {
    if (!std::isfinite(all[j])) break;  // no vertex has more than n_e edges
    for (int i = 1; i <= j; ++i) {
      const double log_ratio = in_sample[i] + out_sample[j - i] - all[j];
      if (!std::isfinite(log_ratio)) continue;
      p(i, j) = flushed_exp(log_binomial(j, i) + log_ratio);
    }
  }
  return SamplingOperator(std::move(p), Design::random_walk, ns / ne, total_edges, sampled_edges);
}

SpectralDiagnostics spectral(const Matrix& p) {
  Eigen::JacobiSVD<Matrix> svd(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SpectralDiagnostics out;
  out.singular_values = svd.singularValues();
  out.left = svd.matrixU();
  out.right = svd.matrixV();
  const double d_max = out.singular_values.size() ? out.singular_values[0] : 0.0;
  const double d_min = out.singular_values.size() ? out.singular_values[out.singular_values.size() - 1] : 0.0;
  if (d_max == 0.0 || d_min <= d_max * std::numeric_limits<double>::epsilon())
    out.condition_number = std::numeric_limits<double>::infinity();
  else
    out.condition_number = d_max / d_min;
  return out;
}

double triangular_eigenvalue_ratio(const Matrix& p) {
  const Vector mags = p.diagonal().cwiseAbs();
  const double lo = mags.minCoeff();
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : mags.maxCoeff() / lo;
}

Vector naive_estimate(const Matrix& p, const Vector& observed, double relative_cutoff) {
  if (p.cols() != observed.size()) throw InvalidArgument("operator and observed counts differ in dimension");
  const SpectralDiagnostics sd = spectral(p);
  Vector out = Vector::Zero(p.cols());
  if (sd.singular_values.size() == 0) return out;
  const double cutoff = relative_cutoff * sd.singular_values[0];
  for (Eigen::Index i = 0; i < sd.singular_values.size(); ++i) {
    const double d = sd.singular_values[i];
    if (d <= cutoff || d == 0.0) continue;
    out += (sd.left.col(i).dot(observed) / d) * sd.right.col(i);
  }
  return out;
}

InducedEigensystem induced_eigen_closed_form(double rate, int bound) {
  check_common(rate, bound);
  const int size = bound + 1;
  InducedEigensystem out{Vector(size), Matrix::Zero(size, size)};
  for (int k = 0; k < size; ++k) {
    out.eigenvalues[k] = std::pow(rate, k + 1);
    for (int j = 0; j <= k; ++j) {
      const double mag = std::round(std::exp(log_binomial(k, j)));
      out.eigenvectors(j, k) = ((k - j) % 2 == 0) ? mag : -mag;
    }
  }
  return out;
}

}  // namespace degdist
