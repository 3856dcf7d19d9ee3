#include "sisdecay/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "sisdecay/rng.hpp"

namespace sisdecay {

namespace {

void validate_edge(int u, int v, int n) {
  if (u == v)
    throw InputError("self-loop (" + std::to_string(u) + ", " + std::to_string(v) +
                     ") is not allowed");
  if (u < 0 || v < 0 || u >= n || v >= n)
    throw InputError("node id out of range in edge (" + std::to_string(u) + ", " +
                     std::to_string(v) + ")");
}

}  // namespace

DiGraph::DiGraph(int n) : n_(n) {
  if (n < 1) throw InputError("node count must be at least 1");
  out_.resize(n);
  in_.resize(n);
}

DiGraph::DiGraph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n < 1) throw InputError("node count must be at least 1");
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  out_.resize(n);
  in_.resize(n);
  for (const auto& [u, v] : edges_) {
    validate_edge(u, v, n);
    out_[u].push_back(v);
    in_[v].push_back(u);
  }
}

bool DiGraph::has_edge(int u, int v) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
}

SparseMat DiGraph::adjacency_matrix() const {
  std::vector<Triplet> trips;
  trips.reserve(edges_.size());
  for (const auto& [u, v] : edges_) trips.emplace_back(v, u, 1.0);
  SparseMat a(n_, n_);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

DiGraph parse_edge_list(std::istream& in, const EdgeListOptions& opts) {
  std::vector<DiGraph::Edge> edges;
  int directive_n = -1;
  int max_id = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.compare(first, 2, "n=") == 0) {
      std::istringstream num(line.substr(first + 2));
      if (!(num >> directive_n) || directive_n < 1)
        throw InputError("line " + std::to_string(lineno) + ": bad n= directive");
      std::string rest;
      if (num >> rest)
        throw InputError("line " + std::to_string(lineno) + ": trailing tokens");
      continue;
    }
    std::istringstream tokens(line);
    long long u = 0, v = 0;
    if (!(tokens >> u >> v))
      throw InputError("line " + std::to_string(lineno) +
                       ": expected two integer node ids");
    std::string rest;
    if (tokens >> rest)
      throw InputError("line " + std::to_string(lineno) + ": trailing tokens");
    if (u < 0 || v < 0)
      throw InputError("line " + std::to_string(lineno) + ": negative node id");
    if (u == v)
      throw InputError("line " + std::to_string(lineno) + ": self-loop rejected");
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    if (opts.bidirect) edges.emplace_back(static_cast<int>(v), static_cast<int>(u));
    max_id = std::max<int>(max_id, static_cast<int>(std::max(u, v)));
  }
  int n = max_id + 1;
  if (directive_n >= 0) {
    if (directive_n < n)
      throw InputError("n= directive smaller than 1 + max node id");
    n = directive_n;
  }
  if (n < 1) n = 1;  // empty input is the one-node graph
  return DiGraph(n, std::move(edges));
}

DiGraph parse_edge_list(const std::string& text, const EdgeListOptions& opts) {
  std::istringstream in(text);
  return parse_edge_list(in, opts);
}

DiGraph load_edge_list(const std::string& path, const EdgeListOptions& opts) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file: " + path);
  return parse_edge_list(in, opts);
}

std::string write_edge_list(const DiGraph& g) {
  std::ostringstream out;
  int max_id = -1;
  for (const auto& [u, v] : g.edges()) max_id = std::max({max_id, u, v});
  if (g.node_count() != max_id + 1)
    out << "n=" << g.node_count() << "\n";
  for (const auto& [u, v] : g.edges()) out << u << " " << v << "\n";
  return out.str();
}

namespace {

// Iterative DFS collecting reachable nodes through the given neighbor lists.
int count_reachable(int start, const std::vector<std::vector<int>>& adj,
                    std::vector<char>& seen) {
  std::vector<int> stack{start};
  seen.assign(adj.size(), 0);
  seen[start] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count;
}

}  // namespace

bool is_strongly_connected(const DiGraph& g) {
  const int n = g.node_count();
  if (n == 1) return true;
  std::vector<std::vector<int>> out(n), in(n);
  for (int u = 0; u < n; ++u) {
    out[u] = g.out_neighbors(u);
    in[u] = g.in_neighbors(u);
  }
  std::vector<char> seen;
  return count_reachable(0, out, seen) == n && count_reachable(0, in, seen) == n;
}

namespace {

// Kosaraju with explicit stacks; returns component id per node, ids assigned
// in reverse topological order.
std::vector<int> scc_ids(const DiGraph& g, int& component_count) {
  const int n = g.node_count();
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> visited(n, 0);
  std::vector<std::pair<int, size_t>> stack;
  for (int s = 0; s < n; ++s) {
    if (visited[s]) continue;
    visited[s] = 1;
    stack.emplace_back(s, 0);
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      const auto& nbrs = g.out_neighbors(u);
      if (next < nbrs.size()) {
        const int v = nbrs[next++];
        if (!visited[v]) {
          visited[v] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  std::vector<int> comp(n, -1);
  component_count = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    std::vector<int> dfs{*it};
    comp[*it] = component_count;
    while (!dfs.empty()) {
      const int u = dfs.back();
      dfs.pop_back();
      for (int v : g.in_neighbors(u)) {
        if (comp[v] < 0) {
          comp[v] = component_count;
          dfs.push_back(v);
        }
      }
    }
    ++component_count;
  }
  return comp;
}

}  // namespace

SccRestriction restrict_to_largest_scc(const DiGraph& g) {
  const int n = g.node_count();
  int ncomp = 0;
  const std::vector<int> comp = scc_ids(g, ncomp);
  std::vector<int> size(ncomp, 0), smallest(ncomp, n);
  for (int u = 0; u < n; ++u) {
    ++size[comp[u]];
    smallest[comp[u]] = std::min(smallest[comp[u]], u);
  }
  int best = 0;
  for (int c = 1; c < ncomp; ++c) {
    if (size[c] > size[best] ||
        (size[c] == size[best] && smallest[c] < smallest[best]))
      best = c;
  }
  std::vector<int> original_ids;
  std::vector<int> relabel(n, -1);
  for (int u = 0; u < n; ++u) {
    if (comp[u] == best) {
      relabel[u] = static_cast<int>(original_ids.size());
      original_ids.push_back(u);
    }
  }
  std::vector<DiGraph::Edge> edges;
  for (const auto& [u, v] : g.edges()) {
    if (relabel[u] >= 0 && relabel[v] >= 0)
      edges.emplace_back(relabel[u], relabel[v]);
  }
  return {DiGraph(static_cast<int>(original_ids.size()), std::move(edges)),
          std::move(original_ids)};
}

namespace {

void add_undirected(std::vector<DiGraph::Edge>& edges, int u, int v) {
  edges.emplace_back(u, v);
  edges.emplace_back(v, u);
}

DiGraph gen_er(int n, double p, RngStream& rng) {
  std::vector<DiGraph::Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.next_unit() < p) add_undirected(edges, i, j);
  return DiGraph(n, std::move(edges));
}

DiGraph gen_ba(int n, int m, RngStream& rng) {
  if (m < 1 || m > n)
    throw InputError("BA attachment count must satisfy 1 <= m <= n");
  std::vector<DiGraph::Edge> edges;
  // One urn slot per unit of degree; preferential attachment is a uniform
  // draw from the urn.
  std::vector<int> urn;
  std::vector<char> picked(n, 0);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      add_undirected(edges, i, j);
      urn.push_back(i);
      urn.push_back(j);
    }
  for (int v = m; v < n; ++v) {
    std::vector<int> targets;
    while (static_cast<int>(targets.size()) < m) {
      int t;
      if (urn.empty()) {  // m = 1 bootstrap: no degree mass yet
        t = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(v)));
      } else {
        t = urn[rng.next_below(urn.size())];
      }
      if (!picked[t]) {
        picked[t] = 1;
        targets.push_back(t);
      }
    }
    for (int t : targets) {
      picked[t] = 0;
      add_undirected(edges, v, t);
      urn.push_back(v);
      urn.push_back(t);
    }
  }
  return DiGraph(n, std::move(edges));
}

DiGraph gen_nws(int n, int k, double p, RngStream& rng) {
  if (k < 1 || 2 * k + 1 > n)
    throw InputError("NWS ring half-degree must satisfy 1 <= k and 2k+1 <= n");
  std::vector<DiGraph::Edge> edges;
  std::vector<DiGraph::Edge> ring;
  for (int i = 0; i < n; ++i)
    for (int d = 1; d <= k; ++d) {
      const int j = (i + d) % n;
      ring.emplace_back(i, j);
      add_undirected(edges, i, j);
    }
  // One shortcut attempt per ring edge, anchored at its first endpoint.
  auto adjacent = [&edges](int a, int b) {
    return std::find(edges.begin(), edges.end(), DiGraph::Edge{a, b}) != edges.end();
  };
  for (const auto& [u, v] : ring) {
    (void)v;
    if (rng.next_unit() >= p) continue;
    for (int attempt = 0; attempt < 64 * n; ++attempt) {
      const int w = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      if (w == u || adjacent(u, w)) continue;
      add_undirected(edges, u, w);
      break;
    }
  }
  return DiGraph(n, std::move(edges));
}

}  // namespace

DiGraph gen_random(const GraphGenSpec& spec) {
  if (spec.n < 1) throw InputError("generator node count must be at least 1");
  if (spec.p < 0.0 || spec.p > 1.0)
    throw InputError("edge/shortcut probability must lie in [0, 1]");
  RngStream rng(spec.seed, static_cast<std::uint64_t>(spec.family));
  switch (spec.family) {
    case GraphFamily::ER:
      return gen_er(spec.n, spec.p, rng);
    case GraphFamily::BA:
      return gen_ba(spec.n, spec.m, rng);
    case GraphFamily::NWS:
      return gen_nws(spec.n, spec.k, spec.p, rng);
  }
  throw InputError("unknown graph family");
}

}  // namespace sisdecay
