#include "degdist/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace degdist {

namespace {

void check_rate(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("sampling rate must lie in (0, 1], got " + std::to_string(p));
}

std::vector<char> bernoulli_vertices(int n, double p, Rng& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<char> selected(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) selected[v] = coin(rng) ? 1 : 0;
  return selected;
}

// Fills included/observed_degree/observed_counts from the sampled graph and a
// membership mask.
void finish(SampleResult& out, const std::vector<char>& member) {
  int max_obs = 0;
  for (int v = 0; v < static_cast<int>(member.size()); ++v) {
    if (!member[v]) continue;
    out.included.push_back(v);
    const int d = out.sampled_graph.degree(v);
    out.observed_degree.push_back(d);
    max_obs = std::max(max_obs, d);
  }
  Vector counts = Vector::Zero(max_obs + 1);
  for (int d : out.observed_degree) counts[d] += 1.0;
  out.observed_counts = DegreeCounts(std::move(counts));
}

void sample_ego(const Graph& g, double p, Rng& rng, SampleResult& out) {
  const auto seeds = bernoulli_vertices(g.vertex_count(), p, rng);
  std::vector<Edge> edges;
  for (const Edge& e : g.edges())
    if (seeds[e.u] || seeds[e.v]) edges.push_back(e);
  out.sampled_graph = Graph(g.vertex_count(), edges);
  finish(out, seeds);
}

void sample_snowball(const Graph& g, double p, Rng& rng, SampleResult& out) {
  const auto seeds = bernoulli_vertices(g.vertex_count(), p, rng);
  std::vector<char> member = seeds;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (!seeds[v]) continue;
    for (int w : g.neighbors(v)) member[w] = 1;
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges())
    if (member[e.u] || member[e.v]) edges.push_back(e);
  out.sampled_graph = Graph(g.vertex_count(), edges);
  finish(out, member);
}

void sample_induced(const Graph& g, double p, Rng& rng, SampleResult& out) {
  const auto member = bernoulli_vertices(g.vertex_count(), p, rng);
  std::vector<Edge> edges;
  for (const Edge& e : g.edges())
    if (member[e.u] && member[e.v]) edges.push_back(e);
  out.sampled_graph = Graph(g.vertex_count(), edges);
  finish(out, member);
}

void sample_incident(const Graph& g, double p, Rng& rng, SampleResult& out) {
  std::bernoulli_distribution coin(p);
  std::vector<char> member(static_cast<std::size_t>(g.vertex_count()), 0);
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    if (!coin(rng)) continue;
    edges.push_back(e);
    member[e.u] = member[e.v] = 1;
  }
  out.sampled_graph = Graph(g.vertex_count(), edges);
  finish(out, member);
}

void sample_random_walk(const Graph& g, std::int64_t budget, Rng& rng, SampleResult& out) {
  if (budget < 1 || budget > g.edge_count())
    throw InvalidArgument("random walk edge budget must lie in [1, n_e]");
  if (!is_connected(g)) throw InvalidArgument("random walk sampling needs a connected graph");
  if (is_bipartite(g)) throw InvalidArgument("random walk sampling needs a non-bipartite graph");

  const int n = g.vertex_count();
  // A uniform endpoint of a uniform edge is distributed proportionally to
  // degree, the walk's stationary law.
  std::uniform_int_distribution<std::int64_t> pick_edge(0, g.edge_count() - 1);
  std::bernoulli_distribution pick_side(0.5);
  const Edge& first = g.edges()[pick_edge(rng)];
  int current = pick_side(rng) ? first.u : first.v;

  std::vector<char> member(static_cast<std::size_t>(n), 0);
  member[current] = 1;
  std::unordered_set<std::int64_t> seen;
  std::vector<Edge> edges;
  while (static_cast<std::int64_t>(edges.size()) < budget) {
    const auto& nbrs = g.neighbors(current);
    std::uniform_int_distribution<std::size_t> step(0, nbrs.size() - 1);
    const int next = nbrs[step(rng)];
    const Edge e{std::min(current, next), std::max(current, next)};
    if (seen.insert(static_cast<std::int64_t>(e.u) * n + e.v).second) edges.push_back(e);
    member[next] = 1;
    current = next;
  }
  out.sampled_graph = Graph(n, edges);
  finish(out, member);
}

}  // namespace

SampleResult sample(Design design, const Graph& g, const SampleParams& params, std::uint64_t seed) {
  SampleResult out;
  out.design = design;
  out.params = params;
  out.seed = seed;
  out.parent_vertex_count = g.vertex_count();
  Rng rng = make_rng(seed);
  switch (design) {
    case Design::ego:
      check_rate(params.rate);
      sample_ego(g, params.rate, rng, out);
      break;
    case Design::snowball1:
      check_rate(params.rate);
      sample_snowball(g, params.rate, rng, out);
      break;
    case Design::induced:
      check_rate(params.rate);
      sample_induced(g, params.rate, rng, out);
      break;
    case Design::incident:
      check_rate(params.rate);
      sample_incident(g, params.rate, rng, out);
      break;
    case Design::random_walk:
      sample_random_walk(g, params.edge_budget, rng, out);
      break;
  }
  return out;
}

std::vector<double> empirical_inclusion(Design design, const Graph& g, const SampleParams& params, int k, int trials,
                                        std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  std::vector<int> cls;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.degree(v) == k) cls.push_back(v);
  if (cls.empty()) throw InvalidArgument("graph has no vertex of degree " + std::to_string(k));

  std::vector<double> freq(static_cast<std::size_t>(k) + 1, 0.0);
  std::vector<int> observed(static_cast<std::size_t>(g.vertex_count()));
  for (int t = 0; t < trials; ++t) {
    const SampleResult s = sample(design, g, params, derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::fill(observed.begin(), observed.end(), -1);
    for (std::size_t i = 0; i < s.included.size(); ++i) observed[s.included[i]] = s.observed_degree[i];
    for (int v : cls) {
      if (observed[v] >= 0) freq[observed[v]] += 1.0;
    }
  }
  const double denom = static_cast<double>(trials) * static_cast<double>(cls.size());
  for (double& f : freq) f /= denom;
  return freq;
}

double snowball_expected_fraction(const Graph& g, double p) {
  if (g.vertex_count() == 0) return 0.0;
  double total = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) total += 1.0 - std::pow(1.0 - p, g.degree(v) + 1);
  return total / g.vertex_count();
}

double calibrate_snowball_rate(const Graph& g, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("target coverage must lie in (0, 1]");
  if (fraction == 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (snowball_expected_fraction(g, mid) < fraction ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace degdist
