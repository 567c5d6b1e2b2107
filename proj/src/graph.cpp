#include "degdist/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <unordered_set>

namespace degdist {

std::string_view to_string(Design design) {
  switch (design) {
    case Design::ego: return "ego";
    case Design::snowball1: return "snowball1";
    case Design::induced: return "induced";
    case Design::incident: return "incident";
    case Design::random_walk: return "random_walk";
  }
  return "unknown";
}

Design parse_design(std::string_view name) {
  if (name == "ego") return Design::ego;
  if (name == "snowball1" || name == "snowball") return Design::snowball1;
  if (name == "induced") return Design::induced;
  if (name == "incident") return Design::incident;
  if (name == "random_walk" || name == "rw") return Design::random_walk;
  throw InvalidArgument("unknown sampling design '" + std::string(name) + "'");
}

Graph::Graph(int vertex_count) {
  if (vertex_count < 0) throw InvalidArgument("vertex count must be non-negative");
  adjacency_.resize(static_cast<std::size_t>(vertex_count));
}

Graph::Graph(int vertex_count, std::span<const Edge> edges) : Graph(vertex_count) {
  edges_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= vertex_count || e.v >= vertex_count)
      throw InvalidArgument("edge endpoint out of range: (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ")");
    if (e.u == e.v) throw InvalidArgument("self-loop at vertex " + std::to_string(e.u));
    edges_.push_back(e.u < e.v ? e : Edge{e.v, e.u});
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw InvalidArgument("duplicate edge in edge list");
  for (const Edge& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

int Graph::max_degree() const {
  int m = 0;
  for (const auto& nbrs : adjacency_) m = std::max(m, static_cast<int>(nbrs.size()));
  return m;
}

bool Graph::has_edge(int u, int v) const {
  const auto& nbrs = adjacency_[u];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

DegreeCounts::DegreeCounts(Vector counts) : counts_(std::move(counts)) {
  if (counts_.size() == 0) throw InvalidArgument("degree count vector must have at least one entry");
  for (Eigen::Index k = 0; k < counts_.size(); ++k) {
    if (!(counts_[k] >= 0.0)) throw InvalidArgument("degree counts must be non-negative");
  }
}

int DegreeCounts::max_occupied() const {
  for (Eigen::Index k = counts_.size() - 1; k >= 0; --k) {
    if (counts_[k] != 0.0) return static_cast<int>(k);
  }
  return -1;
}

DegreeCounts DegreeCounts::resized(int bound) const {
  if (bound < 0) throw InvalidArgument("max-degree bound must be non-negative");
  if (max_occupied() > bound)
    throw InvalidArgument("degree " + std::to_string(max_occupied()) + " exceeds bound M=" + std::to_string(bound));
  Vector out = Vector::Zero(bound + 1);
  const Eigen::Index keep = std::min<Eigen::Index>(counts_.size(), bound + 1);
  out.head(keep) = counts_.head(keep);
  return DegreeCounts(std::move(out));
}

DegreeCounts degree_counts(const Graph& g, int max_degree) {
  if (max_degree < 0) throw InvalidArgument("max-degree bound must be non-negative");
  Vector counts = Vector::Zero(max_degree + 1);
  for (int v = 0; v < g.vertex_count(); ++v) {
    const int d = g.degree(v);
    if (d > max_degree)
      throw InvalidArgument("vertex " + std::to_string(v) + " has degree " + std::to_string(d) +
                            " above bound M=" + std::to_string(max_degree));
    counts[d] += 1.0;
  }
  return DegreeCounts(std::move(counts));
}

DegreeCounts degree_counts(const Graph& g) { return degree_counts(g, g.max_degree()); }

namespace {

std::int64_t pair_count(int n) { return static_cast<std::int64_t>(n) * (n - 1) / 2; }

// Row offsets for the row-major enumeration of pairs u < v.
std::vector<std::int64_t> pair_offsets(int n) {
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(n) + 1, 0);
  for (int u = 0; u < n; ++u) offsets[u + 1] = offsets[u] + (n - 1 - u);
  return offsets;
}

Edge decode_pair(const std::vector<std::int64_t>& offsets, std::int64_t index) {
  const auto it = std::upper_bound(offsets.begin(), offsets.end(), index);
  const int u = static_cast<int>(it - offsets.begin()) - 1;
  const int v = u + 1 + static_cast<int>(index - offsets[u]);
  return {u, v};
}

}  // namespace

Graph generate_er(int vertex_count, std::int64_t edge_count, std::uint64_t seed) {
  if (vertex_count < 0) throw InvalidArgument("vertex count must be non-negative");
  const std::int64_t total = pair_count(vertex_count);
  if (edge_count < 0 || edge_count > total)
    throw InvalidArgument("edge count " + std::to_string(edge_count) + " impossible for " +
                          std::to_string(vertex_count) + " vertices");

  // Floyd's sampler on the smaller of the edge set and its complement.
  const bool complement = edge_count > total / 2;
  const std::int64_t draws = complement ? total - edge_count : edge_count;
  Rng rng = make_rng(seed);
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(draws) * 2);
  for (std::int64_t j = total - draws; j < total; ++j) {
    std::uniform_int_distribution<std::int64_t> pick(0, j);
    const std::int64_t t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }

  const auto offsets = pair_offsets(vertex_count);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(edge_count));
  if (complement) {
    for (std::int64_t i = 0; i < total; ++i) {
      if (!chosen.contains(i)) edges.push_back(decode_pair(offsets, i));
    }
  } else {
    std::vector<std::int64_t> sorted(chosen.begin(), chosen.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::int64_t i : sorted) edges.push_back(decode_pair(offsets, i));
  }
  return Graph(vertex_count, edges);
}

Graph generate_gnp(int vertex_count, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("edge probability must lie in [0, 1]");
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (int u = 0; u < vertex_count; ++u)
    for (int v = u + 1; v < vertex_count; ++v)
      if (coin(rng)) edges.push_back({u, v});
  return Graph(vertex_count, edges);
}

BlockProbabilities two_block_probabilities(int vertex_count, double target_edges, const BlockRatio& ratio) {
  if (vertex_count < 2 || vertex_count % 2 != 0) throw InvalidArgument("two-block model needs an even vertex count >= 2");
  if (!(ratio.within_first > 0 && ratio.within_second > 0 && ratio.between > 0))
    throw InvalidArgument("block ratio entries must be positive");
  if (!(target_edges >= 0)) throw InvalidArgument("target edge count must be non-negative");
  const double half = vertex_count / 2;
  const double within_pairs = half * (half - 1) / 2;
  const double between_pairs = half * half;
  const double scale =
      target_edges / (ratio.within_first * within_pairs + ratio.within_second * within_pairs + ratio.between * between_pairs);
  BlockProbabilities probs{ratio.within_first * scale, ratio.within_second * scale, ratio.between * scale};
  if (probs.within_first > 1 || probs.within_second > 1 || probs.between > 1)
    throw InvalidArgument("target edge count implies a block probability above 1");
  return probs;
}

Graph generate_two_block(int vertex_count, double target_edges, const BlockRatio& ratio, std::uint64_t seed) {
  const BlockProbabilities probs = two_block_probabilities(vertex_count, target_edges, ratio);
  const int half = vertex_count / 2;
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Edge> edges;
  for (int u = 0; u < vertex_count; ++u) {
    for (int v = u + 1; v < vertex_count; ++v) {
      const bool first_u = u < half;
      const bool first_v = v < half;
      const double prob = first_u != first_v ? probs.between : (first_u ? probs.within_first : probs.within_second);
      if (unif(rng) < prob) edges.push_back({u, v});
    }
  }
  return Graph(vertex_count, edges);
}

std::int64_t edges_for_mean_degree(int vertex_count, double mean_degree) {
  if (!(mean_degree >= 0)) throw InvalidArgument("mean degree must be non-negative");
  return static_cast<std::int64_t>(std::llround(vertex_count * mean_degree / 2.0));
}

Graph complete_graph(int n) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.push_back({u, v});
  return Graph(n, edges);
}

Graph star_graph(int n) {
  std::vector<Edge> edges;
  for (int v = 1; v < n; ++v) edges.push_back({0, v});
  return Graph(n, edges);
}

Graph path_graph(int n) {
  std::vector<Edge> edges;
  for (int v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1});
  return Graph(n, edges);
}

Graph cycle_graph(int n) {
  if (n < 3) throw InvalidArgument("a cycle needs at least 3 vertices");
  std::vector<Edge> edges;
  for (int v = 0; v < n; ++v) edges.push_back({std::min(v, (v + 1) % n), std::max(v, (v + 1) % n)});
  return Graph(n, edges);
}

namespace {

// BFS two-colouring of every component. Returns {connected, bipartite}.
std::pair<bool, bool> colour(const Graph& g) {
  const int n = g.vertex_count();
  std::vector<int> side(static_cast<std::size_t>(n), -1);
  bool bipartite = true;
  int components = 0;
  for (int s = 0; s < n; ++s) {
    if (side[s] >= 0) continue;
    ++components;
    side[s] = 0;
    std::queue<int> frontier;
    frontier.push(s);
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int w : g.neighbors(u)) {
        if (side[w] < 0) {
          side[w] = 1 - side[u];
          frontier.push(w);
        } else if (side[w] == side[u]) {
          bipartite = false;
        }
      }
    }
  }
  return {components <= 1, bipartite};
}

}  // namespace

bool is_connected(const Graph& g) { return colour(g).first; }
bool is_bipartite(const Graph& g) { return colour(g).second; }

}  // namespace degdist
