#include "degdist/variance_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "degdist/operator.hpp"

namespace degdist {

namespace {

double binom(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  return std::exp(log_binomial(n, k));
}

int shared_neighbors(const Graph& g, int u, int v) {
  const auto& a = g.neighbors(u);
  const auto& b = g.neighbors(v);
  int t = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++t;
      ++ia;
      ++ib;
    }
  }
  return t;
}

void check_open_rate(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("rate must lie in (0, 1), got " + std::to_string(p));
}

// Observed degrees under induced sampling without materializing G*. Consumes
// the RNG exactly like sample(Design::induced, ...). Unselected vertices get -1.
void induced_observed(const Graph& g, double p, Rng& rng, std::vector<char>& member, std::vector<int>& observed) {
  const int n = g.vertex_count();
  std::bernoulli_distribution coin(p);
  member.assign(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) member[v] = coin(rng) ? 1 : 0;
  observed.assign(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    if (!member[v]) continue;
    int d = 0;
    for (int w : g.neighbors(v)) d += member[w];
    observed[v] = d;
  }
}

std::vector<double> to_frequencies(const std::vector<int>& samples) {
  const int top = samples.empty() ? 0 : *std::max_element(samples.begin(), samples.end());
  std::vector<double> hist(static_cast<std::size_t>(top) + 1, 0.0);
  for (int s : samples) hist[s] += 1.0;
  for (double& h : hist) h /= static_cast<double>(samples.size());
  return hist;
}

std::pair<double, double> mean_variance(const std::vector<int>& samples) {
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (int s : samples) mean += s;
  mean /= n;
  double ss = 0.0;
  for (int s : samples) ss += (s - mean) * (s - mean);
  return {mean, n > 1 ? ss / (n - 1) : 0.0};
}

int poisson_quantile(double mean, double prob) {
  if (mean <= 0.0) return 0;
  double pmf = std::exp(-mean);
  double cdf = pmf;
  int x = 0;
  while (cdf < prob && x < 100000000) {
    ++x;
    pmf *= mean / x;
    cdf += pmf;
  }
  return x;
}

std::vector<std::pair<double, double>> qq_pairs(std::vector<int> samples, double mean) {
  std::sort(samples.begin(), samples.end());
  std::vector<std::pair<double, double>> out;
  constexpr int kPoints = 99;
  for (int i = 1; i <= kPoints; ++i) {
    const double prob = static_cast<double>(i) / (kPoints + 1);
    const auto idx = static_cast<std::size_t>(std::floor(prob * static_cast<double>(samples.size() - 1)));
    out.emplace_back(samples[idx], poisson_quantile(mean, prob));
  }
  return out;
}

}  // namespace

CommonNeighborTensor::CommonNeighborTensor(int bound) : bound_(bound) {
  if (bound < 0) throw InvalidArgument("tensor bound must be >= 0");
  const auto s = static_cast<std::size_t>(bound + 1);
  n0_.assign(s * s * s, 0.0);
  n1_.assign(s * s * s, 0.0);
}

CommonNeighborTensor common_neighbor_tensor(const Graph& g) {
  CommonNeighborTensor tensor(g.max_degree());
  const int n = g.vertex_count();
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const bool adj = g.has_edge(u, v);
      const int t = shared_neighbors(g, u, v);
      tensor.add(adj, g.degree(u), g.degree(v), t);
      tensor.add(adj, g.degree(v), g.degree(u), t);
    }
  }
  return tensor;
}

double snowball_cov(const CommonNeighborTensor& tensor, const DegreeCounts& counts, double p, int k, int l) {
  check_open_rate(p);
  if (k < 0 || l < 0) throw InvalidArgument("degrees must be non-negative");
  if (k > tensor.bound() || l > tensor.bound() || k > counts.bound() || l > counts.bound()) return 0.0;
  // Written about the mean: each ordered pair (u, v) of distinct vertices
  // contributes P(both missed) - P(u missed) P(v missed), i.e.
  // q^(k+l-t) (1 - q^(t+2)) when adjacent and q^(k+l-t+2) (1 - q^t) when not,
  // where t counts common neighbours. Summing the raw moments instead loses
  // digits for p near 1.
  const double q = 1.0 - p;
  const double lq = std::log1p(-p);
  const auto one_minus_qpow = [lq](int m) { return -std::expm1(m * lq); };
  double cov = 0.0;
  for (int t = 0; t <= std::min(k, l); ++t) {
    cov += tensor.adjacent(k, l, t) * std::pow(q, k + l - t) * one_minus_qpow(t + 2);
    cov += tensor.nonadjacent(k, l, t) * std::pow(q, k + l - t + 2) * one_minus_qpow(t);
  }
  if (k != l) return cov;
  const double miss = std::pow(q, k + 1);
  return cov + counts[k] * miss * one_minus_qpow(k + 1);
}

double snowball_cov(const Graph& g, double p, int k, int l) {
  return snowball_cov(common_neighbor_tensor(g), degree_counts(g), p, k, l);
}

double induced_var(const CommonNeighborTensor& tensor, const DegreeCounts& counts, double p, int k) {
  check_open_rate(p);
  if (k < 0) throw InvalidArgument("degree must be non-negative");
  const double q = 1.0 - p;
  const int top = tensor.bound();
  // pi[r]: a degree-r vertex is sampled and keeps exactly k neighbours.
  std::vector<double> pi(static_cast<std::size_t>(std::max(top, counts.bound()) + 1), 0.0);
  for (int r = k; r < static_cast<int>(pi.size()); ++r) pi[r] = binom(r, k) * std::pow(p, k + 1) * std::pow(q, r - k);

  // Each vertex contributes pi (1 - pi); each ordered pair of distinct
  // vertices contributes P(both) - pi_u pi_v, summed per tensor cell so the
  // subtraction happens at the scale of a single pair.
  double var = 0.0;
  for (int r = k; r <= counts.bound(); ++r) var += counts[r] * pi[r] * (1.0 - pi[r]);
  for (int r = k; r <= top; ++r) {
    for (int s = k; s <= top; ++s) {
      for (int t = 0; t <= std::min(r, s); ++t) {
        const double n0 = tensor.nonadjacent(r, s, t);
        const double n1 = tensor.adjacent(r, s, t);
        if (n0 == 0.0 && n1 == 0.0) continue;
        double both0 = 0.0;
        double both1 = 0.0;
        for (int m = 0; m <= std::min(t, k); ++m) {
          const double qpow = std::pow(q, r + s - t - 2 * k + m);
          both0 += binom(t, m) * binom(r - t, k - m) * binom(s - t, k - m) * std::pow(p, 2 * k - m + 2) * qpow;
          if (k - m - 1 >= 0)
            both1 += binom(t, m) * binom(r - t - 1, k - m - 1) * binom(s - t - 1, k - m - 1) * std::pow(p, 2 * k - m) * qpow;
        }
        const double product = pi[r] * pi[s];
        var += n0 * (both0 - product) + n1 * (both1 - product);
      }
    }
  }
  return var;
}

double induced_var(const Graph& g, double p, int k) {
  return induced_var(common_neighbor_tensor(g), degree_counts(g), p, k);
}

double induced_tail_inclusion(int degree, double p, int k) {
  if (k > degree) return 0.0;
  double tail = 0.0;
  for (int i = std::max(k, 0); i <= degree; ++i) tail += binom(degree, i) * std::pow(p, i) * std::pow(1.0 - p, degree - i);
  return p * std::min(1.0, tail);
}

std::vector<double> poisson_pmf_with_tail(double mean, int max_count) {
  std::vector<double> pmf(static_cast<std::size_t>(max_count) + 2, 0.0);
  double total = 0.0;
  for (int x = 0; x <= max_count; ++x) {
    pmf[x] = mean == 0.0 ? (x == 0 ? 1.0 : 0.0) : std::exp(-mean + x * std::log(mean) - std::lgamma(x + 1.0));
    total += pmf[x];
  }
  pmf[static_cast<std::size_t>(max_count) + 1] = std::max(0.0, 1.0 - total);
  return pmf;
}

double tv_to_poisson(const std::vector<double>& histogram, double mean) {
  const int top = static_cast<int>(histogram.size()) - 1;
  const auto pmf = poisson_pmf_with_tail(mean, std::max(top, 0));
  double gap = 0.0;
  for (int x = 0; x <= top; ++x) gap += std::abs(histogram[x] - pmf[x]);
  gap += pmf.back();
  return 0.5 * gap;
}

PoissonDiagnostics poisson_diagnostics(const Graph& g, double p, int k, int trials, std::uint64_t seed) {
  check_open_rate(p);
  if (trials < 1000) throw InvalidArgument("Poisson diagnostics need at least 1000 trials");
  PoissonDiagnostics out;
  out.k = k;
  out.trials = trials;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) < k) continue;
    const double pi = induced_tail_inclusion(g.degree(v), p, k);
    out.lambda += pi;
    out.sum_pi_squared += pi * pi;
  }
  if (out.lambda == 0.0) return out;

  std::vector<int> samples;
  samples.reserve(static_cast<std::size_t>(trials));
  std::vector<char> member;
  std::vector<int> observed;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    induced_observed(g, p, rng, member, observed);
    int count = 0;
    for (int d : observed) count += d >= k ? 1 : 0;
    samples.push_back(count);
  }
  std::tie(out.mc_mean, out.mc_variance) = mean_variance(samples);
  out.chen_stein_bound =
      (1.0 - std::exp(-out.lambda)) / out.lambda * (out.mc_variance - out.lambda + 2.0 * out.sum_pi_squared);
  const auto hist = to_frequencies(samples);
  out.tv_distance = tv_to_poisson(hist, out.lambda);

  const int top = std::max(static_cast<int>(hist.size()) - 1, poisson_quantile(out.lambda, 1.0 - 1e-12));
  const auto pmf = poisson_pmf_with_tail(out.lambda, top);
  for (int x = 0; x <= top; ++x) out.mc_margin += 1.5 * std::sqrt(pmf[x] * (1.0 - pmf[x]) / trials);
  out.qq = qq_pairs(samples, out.lambda);
  return out;
}

std::vector<MarginalFit> induced_marginal_fits(const Graph& g, double p, const std::vector<int>& degrees, int trials,
                                               std::uint64_t seed) {
  check_open_rate(p);
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  const DegreeCounts truth = degree_counts(g);
  std::vector<std::vector<int>> samples(degrees.size());
  std::vector<char> member;
  std::vector<int> observed;
  std::vector<int> tally;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    induced_observed(g, p, rng, member, observed);
    tally.assign(static_cast<std::size_t>(truth.bound()) + 1, 0);
    for (int d : observed)
      if (d >= 0) ++tally[d];
    for (std::size_t i = 0; i < degrees.size(); ++i) {
      const int k = degrees[i];
      samples[i].push_back(k >= 0 && k <= truth.bound() ? tally[k] : 0);
    }
  }

  std::vector<MarginalFit> fits;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    MarginalFit fit;
    fit.k = degrees[i];
    for (int j = std::max(fit.k, 0); j <= truth.bound(); ++j)
      fit.expected += truth[j] * binom(j, fit.k) * std::pow(p, fit.k + 1) * std::pow(1.0 - p, j - fit.k);
    std::tie(fit.mc_mean, fit.mc_variance) = mean_variance(samples[i]);
    fit.histogram = to_frequencies(samples[i]);
    fit.tv_distance = tv_to_poisson(fit.histogram, fit.expected);
    fit.qq = qq_pairs(samples[i], fit.expected);
    fits.push_back(std::move(fit));
  }
  return fits;
}

}  // namespace degdist
