#include <algorithm>
#include <set>

#include "degdist/graph.hpp"
#include "degdist/operator.hpp"
#include "degdist/samplers.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace degdist;

namespace {

SampleParams rate(double p) {
  SampleParams s;
  s.rate = p;
  return s;
}

SampleParams budget(std::int64_t b) {
  SampleParams s;
  s.edge_budget = b;
  return s;
}

// Empirical column k against the operator column within `z` standard errors.
// `vertices` is the number of degree-k vertices contributing per trial.
void check_column(const std::vector<double>& freq, const Matrix& op, int k, int trials, int vertices, double z) {
  const double n = static_cast<double>(trials) * vertices;
  for (int i = 0; i <= k; ++i) {
    const double expect = op(i, k);
    // Vertices of one trial are dependent; the bound uses the independent-case
    // SE inflated by sqrt(vertices), which dominates the true dependence.
    const double se = std::sqrt(std::max(expect * (1 - expect), 1e-12) / n) * std::sqrt(static_cast<double>(vertices));
    CHECK_MESSAGE(std::abs(freq[i] - expect) <= z * se + 1e-12, "i=" << i << " k=" << k << " freq=" << freq[i]
                                                                      << " expected=" << expect);
  }
}

}  // namespace

TEST_SUITE("samplers") {
  TEST_CASE("ego census returns the graph") {
    const Graph g = generate_er(50, 120, 1);
    const SampleResult s = sample(Design::ego, g, rate(1.0), 9);
    CHECK(s.sampled_graph == g);
    CHECK(s.included_count() == 50);
    CHECK(s.counts(g.max_degree()).values() == degree_counts(g).values());
  }

  TEST_CASE("induced census of a triangle") {
    const SampleResult s = sample(Design::induced, complete_graph(3), rate(1.0), 1);
    CHECK(s.counts(2).values() == (Vector(3) << 0, 0, 3).finished());
  }

  TEST_CASE("snowball census of a star") {
    const SampleResult s = sample(Design::snowball1, star_graph(5), rate(1.0), 4);
    CHECK(s.included_count() == 5);
    CHECK(s.observed_degree[0] == 4);
  }

  TEST_CASE("snowball reaches all of a star whenever the centre is seeded") {
    const Graph star = star_graph(5);
    int centre_runs = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const SampleResult s = sample(Design::snowball1, star, rate(0.3), seed);
      const bool has_centre = std::find(s.included.begin(), s.included.end(), 0) != s.included.end();
      if (s.included_count() == 5) {
        ++centre_runs;
        CHECK(has_centre);
        CHECK(s.observed_degree[0] == 4);
      }
    }
    CHECK(centre_runs > 0);
  }

  TEST_CASE("naive inversion of an induced sample oscillates") {
    const Graph g = generate_er(100, 500, 2024);
    const int bound = g.max_degree();
    const SampleResult s = sample(Design::induced, g, rate(0.6), 5);
    const Vector naive = naive_estimate(build_operator(Design::induced, 0.6, bound), s.counts(bound).values());
    CHECK(naive.minCoeff() < 0.0);
    int sign_changes = 0;
    for (Eigen::Index i = 1; i < naive.size(); ++i)
      if (naive[i] * naive[i - 1] < 0) ++sign_changes;
    CHECK(sign_changes >= 3);
    CHECK(naive.cwiseAbs().maxCoeff() > 100.0);
  }

  TEST_CASE("observed degrees respect each design") {
    const Graph g = generate_er(120, 400, 3);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SampleResult ego = sample(Design::ego, g, rate(0.4), seed);
      const SampleResult snow = sample(Design::snowball1, g, rate(0.2), seed);
      const SampleResult ind = sample(Design::induced, g, rate(0.5), seed);
      const SampleResult inc = sample(Design::incident, g, rate(0.3), seed);
      const SampleResult rw = sample(Design::random_walk, g, budget(100), seed);
      for (std::size_t i = 0; i < ego.included.size(); ++i) CHECK(ego.observed_degree[i] == g.degree(ego.included[i]));
      for (std::size_t i = 0; i < snow.included.size(); ++i)
        CHECK(snow.observed_degree[i] == g.degree(snow.included[i]));
      for (std::size_t i = 0; i < ind.included.size(); ++i) CHECK(ind.observed_degree[i] <= g.degree(ind.included[i]));
      CHECK(inc.observed_counts[0] == 0.0);
      CHECK(rw.observed_counts[0] == 0.0);
      CHECK(rw.sampled_graph.edge_count() == 100);
      for (const auto* s : {&ego, &snow, &ind, &inc, &rw}) {
        for (const Edge& e : s->sampled_graph.edges()) CHECK(g.has_edge(e.u, e.v));
        CHECK(s->observed_counts.total() == doctest::Approx(s->included_count()));
      }
    }
  }

  TEST_CASE("induced sample keeps exactly the edges among selected vertices") {
    const Graph g = generate_er(60, 300, 8);
    const SampleResult s = sample(Design::induced, g, rate(0.5), 77);
    const std::set<int> in(s.included.begin(), s.included.end());
    std::int64_t expected = 0;
    for (const Edge& e : g.edges()) expected += (in.count(e.u) && in.count(e.v)) ? 1 : 0;
    CHECK(s.sampled_graph.edge_count() == expected);
  }

  TEST_CASE("sampling is deterministic in the seed") {
    const Graph g = generate_er(100, 600, 4);
    REQUIRE(is_connected(g));
    for (Design d : {Design::ego, Design::snowball1, Design::induced, Design::incident}) {
      const SampleResult a = sample(d, g, rate(0.3), 123);
      const SampleResult b = sample(d, g, rate(0.3), 123);
      CHECK(a.included == b.included);
      CHECK(a.sampled_graph == b.sampled_graph);
      CHECK(a.observed_counts.values() == b.observed_counts.values());
    }
    const SampleResult a = sample(Design::random_walk, g, budget(80), 5);
    const SampleResult b = sample(Design::random_walk, g, budget(80), 5);
    CHECK(a.sampled_graph == b.sampled_graph);
  }

  TEST_CASE("argument checks") {
    const Graph g = complete_graph(4);
    CHECK_THROWS_AS(sample(Design::ego, g, rate(0.0), 1), InvalidArgument);
    CHECK_THROWS_AS(sample(Design::induced, g, rate(1.2), 1), InvalidArgument);
    CHECK_THROWS_AS(sample(Design::random_walk, g, budget(0), 1), InvalidArgument);
    CHECK_THROWS_AS(sample(Design::random_walk, g, budget(7), 1), InvalidArgument);
    CHECK_THROWS_AS(sample(Design::random_walk, cycle_graph(6), budget(3), 1), InvalidArgument);
    const std::vector<Edge> two_triangles{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
    CHECK_THROWS_AS(sample(Design::random_walk, Graph(6, two_triangles), budget(3), 1), InvalidArgument);
  }

  TEST_CASE("empirical inclusion matches the operator examples") {
    const Graph star = star_graph(5);
    const int trials = 100000;
    const auto ego = empirical_inclusion(Design::ego, star, rate(0.3), 4, trials, 1);
    CHECK(std::abs(ego[4] - 0.3) < 3 * std::sqrt(0.21 / trials));
    for (int i = 0; i < 4; ++i) CHECK(ego[i] == 0.0);

    const auto ind = empirical_inclusion(Design::induced, star, rate(0.5), 4, trials, 2);
    for (int i = 0; i <= 4; ++i) {
      const double expect = oracle::binomial(4, i) * std::pow(0.5, 5);
      CHECK(std::abs(ind[i] - expect) < 3.5 * std::sqrt(expect * (1 - expect) / trials));
    }

    const auto iso = empirical_inclusion(Design::snowball1, Graph(1), rate(0.4), 0, trials, 3);
    CHECK(std::abs(iso[0] - 0.4) < 3 * std::sqrt(0.24 / trials));
  }

  TEST_CASE("empirical inclusion agrees with every Bernoulli-design column") {
    // Small graph with several degrees present.
    const std::vector<Edge> e{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {3, 4}, {4, 5}, {5, 6}, {0, 5}};
    const Graph g(7, e);
    const int bound = g.max_degree();
    const int trials = 40000;
    for (Design d : {Design::ego, Design::snowball1, Design::induced, Design::incident}) {
      const double p = 0.35;
      const Matrix op = build_operator(d, p, bound).matrix();
      for (int k = 0; k <= bound; ++k) {
        int vertices = 0;
        for (int v = 0; v < g.vertex_count(); ++v) vertices += g.degree(v) == k ? 1 : 0;
        if (vertices == 0) continue;
        check_column(empirical_inclusion(d, g, rate(p), k, trials, 10 + k), op, k, trials, vertices, 4.0);
      }
    }
  }

  TEST_CASE("random walk inclusion in its exact cases") {
    const Graph g = generate_er(30, 90, 12);
    REQUIRE(is_connected(g));
    REQUIRE_FALSE(is_bipartite(g));
    const int bound = g.max_degree();
    const int trials = 20000;
    // One edge: a degree-j vertex is seen with degree 1 with probability j/n_e.
    const Matrix one = build_random_walk_operator(g.edge_count(), 1, bound).matrix();
    for (int k = 1; k <= bound; ++k) {
      int vertices = 0;
      for (int v = 0; v < g.vertex_count(); ++v) vertices += g.degree(v) == k ? 1 : 0;
      if (vertices == 0) continue;
      CHECK(one(1, k) == doctest::Approx(static_cast<double>(k) / g.edge_count()));
      check_column(empirical_inclusion(Design::random_walk, g, budget(1), k, trials, 40 + k), one, k, trials, vertices,
                   4.0);
    }
    // Every edge: a census.
    const Matrix all = build_random_walk_operator(g.edge_count(), g.edge_count(), bound).matrix();
    for (int k = 1; k <= bound; ++k) {
      int vertices = 0;
      for (int v = 0; v < g.vertex_count(); ++v) vertices += g.degree(v) == k ? 1 : 0;
      if (vertices == 0) continue;
      CHECK(all(k, k) == doctest::Approx(1.0));
      const auto freq = empirical_inclusion(Design::random_walk, g, budget(g.edge_count()), k, 50, 60 + k);
      CHECK(freq[k] == 1.0);
    }
  }

  TEST_CASE("snowball coverage calibration") {
    const Graph g = generate_er(300, 1500, 6);
    for (double target : {0.1, 0.2, 0.3}) {
      const double p = calibrate_snowball_rate(g, target);
      CHECK(snowball_expected_fraction(g, p) == doctest::Approx(target).epsilon(1e-9));
      std::vector<double> fracs;
      for (int t = 0; t < 400; ++t)
        fracs.push_back(sample(Design::snowball1, g, rate(p), derive_seed(5, t)).included_count() / 300.0);
      const auto st = oracle::stats_of(fracs);
      CHECK(std::abs(st.mean - target) < 4 * st.se);
    }
    CHECK_THROWS_AS(calibrate_snowball_rate(Graph(10), 1.5), InvalidArgument);
  }

  TEST_CASE("snowball expected fraction has a closed form") {
    const Graph g = star_graph(5);
    const double p = 0.3;
    // Centre: 1 - q^5. Each leaf: 1 - q^2.
    const double q = 1 - p;
    const double expected = ((1 - std::pow(q, 5)) + 4 * (1 - q * q)) / 5;
    CHECK(snowball_expected_fraction(g, p) == doctest::Approx(expected).epsilon(1e-14));
  }
}
