#pragma once

#include <algorithm>
#include <cstddef>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "passnet/eigen.hpp"
#include "passnet/matrix.hpp"

namespace passnet {

/// Directed graph on vertices 1..vertex_count. An edge (head, tail) points
/// from its head (origin) to its tail (destination); the head carries the
/// +1 entry of the incidence matrix and the out-incidence matrix.
struct Digraph {
  int vertex_count = 0;
  std::vector<std::pair<int, int>> edges;  // (head, tail), 1-based

  Digraph(int n, std::vector<std::pair<int, int>> edge_list)
      : vertex_count(n), edges(std::move(edge_list)) {
    if (n <= 0) throw std::invalid_argument("Digraph: vertex_count must be positive");
    std::set<std::pair<int, int>> seen;
    for (const auto& [h, t] : edges) {
      if (h < 1 || h > n || t < 1 || t > n)
        throw std::invalid_argument("Digraph: vertex index out of range on edge (" +
                                    std::to_string(h) + "," + std::to_string(t) + ")");
      if (h == t)
        throw std::invalid_argument("Digraph: self-loop on vertex " + std::to_string(h));
      if (!seen.insert({h, t}).second)
        throw std::invalid_argument("Digraph: duplicate edge (" + std::to_string(h) + "," +
                                    std::to_string(t) + ")");
    }
  }

  std::size_t edge_count() const { return edges.size(); }
};

/// E = B_o + B_i; each column of E holds one +1 (head) and one -1 (tail).
struct IncidenceSet {
  Matrix E;    // |V| x |E|, entries in {-1, 0, +1}
  Matrix B_o;  // out-incidence, entries in {0, +1}
  Matrix B_i;  // in-incidence, entries in {-1, 0}
};

struct Laplacians {
  Matrix L;    // E E^T, Laplacian of the undirected counterpart
  Matrix L_i;  // B_i E^T
  Matrix L_o;  // B_o E^T, diagonal = out-degrees
};

struct SpectralSummary {
  double lambda2 = 0.0;     // second-smallest eigenvalue of L
  double lambda_max = 0.0;  // largest eigenvalue of L
  std::vector<double> eigenvalues;  // full spectrum, ascending
};

inline IncidenceSet incidence_matrices(const Digraph& g) {
  const std::size_t n = static_cast<std::size_t>(g.vertex_count);
  const std::size_t m = g.edge_count();
  IncidenceSet inc{Matrix(n, m), Matrix(n, m), Matrix(n, m)};
  for (std::size_t k = 0; k < m; ++k) {
    const auto [h, t] = g.edges[k];
    inc.E(h - 1, k) = 1.0;
    inc.E(t - 1, k) = -1.0;
    inc.B_o(h - 1, k) = 1.0;
    inc.B_i(t - 1, k) = -1.0;
  }
  return inc;
}

inline Laplacians laplacians(const Digraph& g) {
  const IncidenceSet inc = incidence_matrices(g);
  const Matrix et = inc.E.transposed();
  return Laplacians{inc.E * et, inc.B_i * et, inc.B_o * et};
}

inline int max_out_degree(const Digraph& g) {
  std::vector<int> deg(static_cast<std::size_t>(g.vertex_count), 0);
  for (const auto& [h, t] : g.edges) {
    (void)t;
    ++deg[h - 1];
  }
  return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

namespace detail {

inline std::vector<std::vector<int>> adjacency(const Digraph& g, bool reversed,
                                               bool undirected) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.vertex_count));
  for (const auto& [h, t] : g.edges) {
    if (undirected) {
      adj[h - 1].push_back(t - 1);
      adj[t - 1].push_back(h - 1);
    } else if (reversed) {
      adj[t - 1].push_back(h - 1);
    } else {
      adj[h - 1].push_back(t - 1);
    }
  }
  return adj;
}

inline std::size_t bfs_count(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<char> seen(adj.size(), 0);
  std::queue<int> q;
  q.push(start);
  seen[static_cast<std::size_t>(start)] = 1;
  std::size_t count = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++count;
        q.push(w);
      }
    }
  }
  return count;
}

}  // namespace detail

/// True iff some vertex can be reached from every other vertex along
/// directed paths. Decided by a reverse breadth-first search from each
/// candidate vertex.
inline bool has_globally_reachable_node(const Digraph& g) {
  const auto radj = detail::adjacency(g, /*reversed=*/true, /*undirected=*/false);
  const std::size_t n = static_cast<std::size_t>(g.vertex_count);
  for (std::size_t v = 0; v < n; ++v) {
    if (detail::bfs_count(radj, static_cast<int>(v)) == n) return true;
  }
  return false;
}

/// Connectivity of the undirected counterpart.
inline bool undirected_connected(const Digraph& g) {
  const auto adj = detail::adjacency(g, false, /*undirected=*/true);
  return detail::bfs_count(adj, 0) == static_cast<std::size_t>(g.vertex_count);
}

inline SpectralSummary undirected_spectrum(const Digraph& g) {
  SpectralSummary s;
  s.eigenvalues = symmetric_eigenvalues(laplacians(g).L);
  s.lambda_max = s.eigenvalues.back();
  s.lambda2 = s.eigenvalues.size() > 1 ? s.eigenvalues[1] : 0.0;
  return s;
}

}  // namespace passnet
