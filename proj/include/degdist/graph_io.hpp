#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "degdist/graph.hpp"

namespace degdist {

/// A graph read from an edge list together with the original vertex labels:
/// `labels[i]` is the label of dense vertex i. Labels are assigned dense
/// indices in ascending numeric order.
struct LabeledGraph {
  Graph graph;
  std::vector<std::int64_t> labels;
  std::int64_t dropped_self_loops = 0;
  std::int64_t dropped_duplicates = 0;
};

/// Parses "u v" lines. '#' starts a comment. A line holding a single label
/// declares a vertex (used for isolated vertices). Self-loops and repeated
/// edges (including the reverse direction) are dropped and counted.
LabeledGraph read_edge_list(std::istream& in);
LabeledGraph read_edge_list_file(const std::string& path);

/// Writes edges as "u v" using dense indices; isolated vertices are written
/// as single-label lines so read_edge_list reproduces the graph exactly.
void write_edge_list(std::ostream& out, const Graph& g);
void write_edge_list_file(const std::string& path, const Graph& g);

/// "index,label" CSV of the dense-index map.
void write_label_map_file(const std::string& path, const std::vector<std::int64_t>& labels);

}  // namespace degdist
