#include "degdist/smoothing.hpp"

#include <cmath>
#include <limits>

namespace degdist {

namespace {

// Mirror index x into [0, size) with reflection about -1/2 and size - 1/2.
int fold(int x, int size) {
  const int period = 2 * size;
  int y = x % period;
  if (y < 0) y += period;
  return y < size ? y : period - 1 - y;
}

double kernel(int offset, int bandwidth) {
  const double u = static_cast<double>(offset) / (bandwidth + 1);
  return std::max(0.0, 1.0 - u * u);
}

double kernel_mass(int bandwidth) {
  double total = 0.0;
  for (int d = -bandwidth; d <= bandwidth; ++d) total += kernel(d, bandwidth);
  return total;
}

Vector self_weights(int size, int bandwidth) {
  Vector diag = Vector::Zero(size);
  const double mass = kernel_mass(bandwidth);
  for (int k = 0; k < size; ++k)
    for (int d = -bandwidth; d <= bandwidth; ++d)
      if (fold(k + d, size) == k) diag[k] += kernel(d, bandwidth) / mass;
  return diag;
}

}  // namespace

Matrix smoothing_matrix(int size, int bandwidth) {
  if (size < 1) throw InvalidArgument("smoothing grid must be nonempty");
  if (bandwidth < 0) throw InvalidArgument("bandwidth must be >= 0");
  Matrix w = Matrix::Zero(size, size);
  const double mass = kernel_mass(bandwidth);
  for (int j = 0; j < size; ++j)
    for (int d = -bandwidth; d <= bandwidth; ++d) w(fold(j + d, size), j) += kernel(d, bandwidth) / mass;
  return w;
}

Vector smooth_counts(const Vector& counts, int bandwidth) {
  if (bandwidth < 0) throw InvalidArgument("bandwidth must be >= 0");
  const int size = static_cast<int>(counts.size());
  if (bandwidth == 0 || size == 0) return counts;
  Vector out = Vector::Zero(size);
  const double mass = kernel_mass(bandwidth);
  for (int j = 0; j < size; ++j) {
    if (counts[j] == 0.0) continue;
    for (int d = -bandwidth; d <= bandwidth; ++d) out[fold(j + d, size)] += counts[j] * kernel(d, bandwidth) / mass;
  }
  return out;
}

double lscv_score(const Vector& counts, int bandwidth) {
  const double n = counts.sum();
  if (!(n >= 2.0)) throw InvalidArgument("cross-validation needs at least two observations");
  const Vector smoothed = smooth_counts(counts, bandwidth);
  const Vector self = bandwidth == 0 ? Vector::Ones(counts.size()) : self_weights(static_cast<int>(counts.size()), bandwidth);
  const double fit = (smoothed / n).squaredNorm();
  double loo = 0.0;
  for (Eigen::Index k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0.0) continue;
    loo += counts[k] * (smoothed[k] - self[k]) / (n - 1.0);
  }
  return fit - 2.0 * loo / n;
}

int select_bandwidth(const Vector& counts, int max_bandwidth) {
  if (max_bandwidth < 0) throw InvalidArgument("max bandwidth must be >= 0");
  if ((counts.array() != 0.0).count() <= 1 || max_bandwidth == 0) return 0;
  int best = 0;
  double best_score = lscv_score(counts, 0);
  for (int h = 1; h <= max_bandwidth; ++h) {
    const double score = lscv_score(counts, h);
    if (score < best_score) {
      best_score = score;
      best = h;
    }
  }
  return best;
}

int default_max_bandwidth(int bound) { return (bound + 1 + 3) / 4; }

CovarianceApprox covariance_from_smoothed(Vector smoothed, double target_condition, int bandwidth) {
  if (!(target_condition > 1.0)) throw InvalidArgument("target condition number must exceed 1");
  const double hi = smoothed.maxCoeff();
  const double lo = smoothed.minCoeff();
  if (!(hi > 0.0)) throw InvalidArgument("cannot build a covariance from an all-zero count vector");
  const double floor = 1e-6 * hi;
  const double solved = (hi - target_condition * lo) / (target_condition - 1.0);
  CovarianceApprox out;
  out.delta = solved > floor ? solved : floor;
  out.diagonal = smoothed.array() + out.delta;
  out.smoothed = std::move(smoothed);
  out.bandwidth = bandwidth;
  return out;
}

CovarianceApprox build_covariance(const Vector& observed, double target_condition, std::optional<int> max_bandwidth) {
  if (observed.size() == 0 || !(observed.sum() > 0.0))
    throw InvalidArgument("cannot build a covariance from an all-zero count vector");
  const int bound = static_cast<int>(observed.size()) - 1;
  const int h = observed.sum() >= 2.0 ? select_bandwidth(observed, max_bandwidth.value_or(default_max_bandwidth(bound))) : 0;
  return covariance_from_smoothed(smooth_counts(observed, h), target_condition, h);
}

}  // namespace degdist
