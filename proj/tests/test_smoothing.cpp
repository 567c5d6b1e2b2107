#include <map>

#include "degdist/smoothing.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace degdist;

namespace {

// LSCV written out from the definition, independent of the library's matrix.
double lscv_reference(const Vector& counts, const Matrix& w) {
  const double n = counts.sum();
  const Vector smoothed = w * counts;
  double score = 0.0;
  for (Eigen::Index k = 0; k < counts.size(); ++k) score += (smoothed[k] / n) * (smoothed[k] / n);
  for (Eigen::Index k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    const double loo = (smoothed[k] - w(k, k)) / (n - 1);
    score -= 2.0 / n * counts[k] * loo;
  }
  return score;
}

Vector poisson_counts(int bound, double mean, double total, Rng& rng) {
  Vector c = Vector::Zero(bound + 1);
  std::poisson_distribution<int> pois(mean);
  for (int i = 0; i < static_cast<int>(total); ++i) c[std::min(pois(rng), bound)] += 1;
  return c;
}

}  // namespace

TEST_SUITE("smoothing") {
  TEST_CASE("bandwidth zero is the identity") {
    const Vector x = (Vector(5) << 1, 0, 4, 2, 9).finished();
    CHECK((smooth_counts(x, 0) - x).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("constants and mass are preserved") {
    for (int h : {1, 2, 5, 12}) {
      const Vector c = Vector::Constant(9, 3.5);
      CHECK((smooth_counts(c, h) - c).cwiseAbs().maxCoeff() < 1e-12);
      Rng rng(h);
      const Vector x = poisson_counts(20, 6, 300, rng);
      CHECK(std::abs(smooth_counts(x, h).sum() - x.sum()) < 1e-10);
      CHECK(smooth_counts(x, h).minCoeff() >= 0.0);
    }
  }

  TEST_CASE("three-point spread") {
    const Vector s = smooth_counts((Vector(3) << 0, 10, 0).finished(), 1);
    CHECK(s[0] == doctest::Approx(3.0));
    CHECK(s[1] == doctest::Approx(4.0));
    CHECK(s[2] == doctest::Approx(3.0));
  }

  TEST_CASE("interior weights are Epanechnikov") {
    // A unit mass far from the boundary spreads as 1 - (d/(h+1))^2, normalized.
    const int h = 2;
    Vector x = Vector::Zero(11);
    x[5] = 1.0;
    const Vector s = smooth_counts(x, h);
    double z = 0.0;
    for (int d = -h; d <= h; ++d) z += 1.0 - (d / 3.0) * (d / 3.0);
    for (int d = -h; d <= h; ++d) CHECK(s[5 + d] == doctest::Approx((1.0 - (d / 3.0) * (d / 3.0)) / z));
    CHECK(s[2] == 0.0);
  }

  TEST_CASE("smoothing matrix is symmetric and doubly stochastic") {
    for (int size : {1, 2, 5, 17}) {
      for (int h : {0, 1, 3, 8, 40}) {
        const Matrix w = smoothing_matrix(size, h);
        CHECK((w - w.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((w.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK((w.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(w.minCoeff() >= 0.0);
      }
    }
  }

  TEST_CASE("smoothing is linear") {
    Rng rng(3);
    const Vector x = poisson_counts(15, 5, 100, rng);
    const Vector y = poisson_counts(15, 8, 100, rng);
    const Vector lhs = smooth_counts(2.5 * x - 0.5 * y, 3);
    const Vector rhs = 2.5 * smooth_counts(x, 3) - 0.5 * smooth_counts(y, 3);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("LSCV score matches the definition") {
    Rng rng(8);
    const Vector x = poisson_counts(20, 7, 250, rng);
    for (int h = 0; h <= 6; ++h)
      CHECK(lscv_score(x, h) == doctest::Approx(lscv_reference(x, smoothing_matrix(21, h))).epsilon(1e-12));
    CHECK_THROWS_AS(lscv_score((Vector(3) << 0, 1, 0).finished(), 1), InvalidArgument);
  }

  TEST_CASE("bandwidth selection") {
    CHECK(select_bandwidth((Vector(6) << 0, 0, 50, 0, 0, 0).finished(), 4) == 0);
    Rng rng(1);
    const Vector x = poisson_counts(20, 7, 250, rng);
    CHECK(select_bandwidth(x, 0) == 0);

    // Brute-force argmin with ties to the smaller bandwidth.
    int best = 0;
    for (int h = 1; h <= 5; ++h)
      if (lscv_score(x, h) < lscv_score(x, best)) best = h;
    CHECK(select_bandwidth(x, 5) == best);

    CHECK(default_max_bandwidth(10) == 3);
    CHECK(default_max_bandwidth(3) == 1);
  }

  TEST_CASE("bandwidth choice is stable across seeds") {
    std::map<int, int> freq;
    for (int s = 0; s < 100; ++s) {
      Rng rng(derive_seed(17, s));
      ++freq[select_bandwidth(poisson_counts(30, 10, 2000, rng), default_max_bandwidth(30))];
    }
    int mode = 0;
    for (const auto& [h, n] : freq) mode = std::max(mode, n);
    CHECK(mode >= 50);
  }

  TEST_CASE("covariance approximation") {
    const CovarianceApprox flat = covariance_from_smoothed(Vector::Constant(5, 4.0), 20.0);
    CHECK(flat.delta == doctest::Approx(4e-6));
    CHECK(flat.condition_number() == doctest::Approx(1.0));

    Vector s(4);
    s << 1, 100, 30, 7;
    const CovarianceApprox c = covariance_from_smoothed(s, 20.0);
    CHECK(c.delta == doctest::Approx((100 - 20 * 1) / 19.0));
    CHECK(c.condition_number() == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(c.diagonal.sum() == doctest::Approx(s.sum() + 4 * c.delta));

    Rng rng(4);
    const Vector obs = poisson_counts(25, 6, 300, rng);
    const CovarianceApprox built = build_covariance(obs, 20.0);
    CHECK(built.condition_number() <= 20.0 + 1e-6);
    CHECK(built.diagonal.minCoeff() >= built.delta);
    CHECK(built.delta > 0.0);
    CHECK(built.diagonal.sum() == doctest::Approx(obs.sum() + 26 * built.delta));

    CHECK_THROWS_AS(build_covariance(Vector::Zero(5), 20.0), InvalidArgument);
    CHECK_THROWS_AS(covariance_from_smoothed(s, 1.0), InvalidArgument);
  }
}
