#include "degdist/graph_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace degdist {

LabeledGraph read_edge_list(std::istream& in) {
  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  std::vector<std::int64_t> labels;
  std::string line;
  std::int64_t line_no = 0;
  LabeledGraph out;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::int64_t a = 0;
    if (!(fields >> a)) {
      fields.clear();
      std::string rest;
      if (fields >> rest) throw InvalidArgument("edge list line " + std::to_string(line_no) + ": expected integer labels");
      continue;
    }
    labels.push_back(a);
    std::int64_t b = 0;
    if (!(fields >> b)) {
      fields.clear();
      std::string rest;
      if (fields >> rest) throw InvalidArgument("edge list line " + std::to_string(line_no) + ": expected integer labels");
      continue;
    }
    labels.push_back(b);
    if (std::string extra; fields >> extra)
      throw InvalidArgument("edge list line " + std::to_string(line_no) + ": expected two labels, got more");
    if (a == b) {
      ++out.dropped_self_loops;
      continue;
    }
    raw.emplace_back(std::min(a, b), std::max(a, b));
  }

  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::unordered_map<std::int64_t, int> index;
  index.reserve(labels.size() * 2);
  for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], static_cast<int>(i));

  std::sort(raw.begin(), raw.end());
  const auto unique_end = std::unique(raw.begin(), raw.end());
  out.dropped_duplicates = static_cast<std::int64_t>(raw.end() - unique_end);
  raw.erase(unique_end, raw.end());

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& [a, b] : raw) edges.push_back({index.at(a), index.at(b)});
  out.graph = Graph(static_cast<int>(labels.size()), edges);
  out.labels = std::move(labels);
  return out;
}

LabeledGraph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# undirected edge list: " << g.vertex_count() << " vertices, " << g.edge_count() << " edges\n";
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) == 0) out << v << '\n';
  }
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

void write_edge_list_file(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_edge_list(out, g);
}

void write_label_map_file(const std::string& path, const std::vector<std::int64_t>& labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

}  // namespace degdist
