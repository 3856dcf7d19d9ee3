#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sisdecay/types.hpp"

namespace sisdecay {

// Directed contact network. Nodes are labeled 0..n-1; an edge (u, v) points
// from u to v, so u is an in-neighbor of v and the adjacency entry a[v][u]
// is 1. Self-loops are rejected. Immutable after construction.
class DiGraph {
 public:
  using Edge = std::pair<int, int>;

  DiGraph() : n_(1) {}
  explicit DiGraph(int n);
  DiGraph(int n, std::vector<Edge> edges);

  int node_count() const { return n_; }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_edge(int u, int v) const;

  /// a_ij = 1 iff node j is an in-neighbor of node i, i.e. (j, i) is an edge.
  int adjacency(int i, int j) const { return has_edge(j, i) ? 1 : 0; }

  const std::vector<int>& out_neighbors(int u) const { return out_[u]; }
  const std::vector<int>& in_neighbors(int v) const { return in_[v]; }

  /// Adjacency matrix with the in-neighbor convention above.
  SparseMat adjacency_matrix() const;

  bool operator==(const DiGraph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;  // sorted, unique
  std::vector<std::vector<int>> out_, in_;
};

struct EdgeListOptions {
  bool bidirect = false;  // insert the reverse of every listed pair
};

// Edge-list text format: one "u v" pair of base-10 integers per line,
// '#' comments and blank lines ignored, optional "n=N" directive fixing the
// node count (needed to express trailing isolated nodes).
DiGraph parse_edge_list(std::istream& in, const EdgeListOptions& opts = {});
DiGraph parse_edge_list(const std::string& text, const EdgeListOptions& opts = {});
DiGraph load_edge_list(const std::string& path, const EdgeListOptions& opts = {});

/// Inverse of parse_edge_list: lines sorted by (u, v); emits an "n=N"
/// directive only when the edges alone would under-determine the node count.
std::string write_edge_list(const DiGraph& g);

bool is_strongly_connected(const DiGraph& g);

struct SccRestriction {
  DiGraph graph;
  std::vector<int> original_ids;  // original_ids[new label] = old label
};

/// Induced subgraph on the largest strongly connected component, nodes
/// relabeled 0..n'-1 in their original order. Ties between equally large
/// components go to the one containing the smallest original node id.
SccRestriction restrict_to_largest_scc(const DiGraph& g);

enum class GraphFamily { ER, BA, NWS };

struct GraphGenSpec {
  GraphFamily family = GraphFamily::ER;
  int n = 0;
  double p = 0.0;   // ER edge probability / NWS shortcut probability
  int m = 1;        // BA attachment count
  int k = 1;        // NWS ring half-degree
  std::uint64_t seed = 0;
};

/// Seeded random graph, always bidirected (a_ij = a_ji) with no self-loops.
DiGraph gen_random(const GraphGenSpec& spec);

}  // namespace sisdecay
