// Copyright 2026 The ospkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Bellman-Ford kernels over a compressed adjacency structure. Weights are
// never stored: an edge u -> v weighs type[u] * (level[v] - level[u]), which
// is exactly the shape of OSP-graph weights once scaled to integers.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace ospkit::walks {

using Vertex = std::uint32_t;
inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

struct Csr {
  std::vector<std::uint64_t> offsets{0};
  std::vector<Vertex> targets;  // sorted within each source range

  std::size_t vertices() const { return offsets.size() - 1; }
  std::size_t edges() const { return targets.size(); }

  std::span<const Vertex> successors(Vertex u) const {
    return {targets.data() + offsets[u], targets.data() + offsets[u + 1]};
  }

  bool has_edge(Vertex u, Vertex v) const {
    auto s = successors(u);
    return std::binary_search(s.begin(), s.end(), v);
  }

  /// Builds from per-source target lists; duplicates are removed.
  static Csr from_lists(std::vector<std::vector<Vertex>>& lists) {
    Csr g;
    g.offsets.assign(lists.size() + 1, 0);
    for (std::size_t u = 0; u < lists.size(); ++u) {
      auto& l = lists[u];
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
      g.offsets[u + 1] = g.offsets[u] + l.size();
    }
    g.targets.reserve(g.offsets.back());
    for (auto& l : lists) {
      g.targets.insert(g.targets.end(), l.begin(), l.end());
      std::vector<Vertex>().swap(l);
    }
    return g;
  }
};

template <class W>
struct Lattice {
  std::vector<W> type;
  std::vector<W> level;

  W weight(Vertex u, Vertex v) const { return type[u] * (level[v] - level[u]); }
};

enum class Reach { finite, negative_infinity, unreachable };

template <class W>
struct Distance {
  Reach reach = Reach::unreachable;
  W value{};
};

/// Bellman-Ford from a virtual source joined to every vertex by a zero-weight
/// edge. Returns the vertices of one negative cycle in walk order, or nullopt.
template <class W>
std::optional<std::vector<Vertex>> find_negative_cycle(const Csr& g, const Lattice<W>& w) {
  const std::size_t n = g.vertices();
  std::vector<W> dist(n, W(0));
  std::vector<Vertex> pred(n, kNoVertex);
  Vertex last = kNoVertex;
  for (std::size_t round = 0; round <= n; ++round) {
    last = kNoVertex;
    for (Vertex u = 0; u < n; ++u) {
      for (Vertex v : g.successors(u)) {
        W candidate = dist[u] + w.weight(u, v);
        if (candidate < dist[v]) {
          dist[v] = std::move(candidate);
          pred[v] = u;
          last = v;
        }
      }
    }
    if (last == kNoVertex) return std::nullopt;
  }
  Vertex x = last;
  for (std::size_t k = 0; k < n; ++k) x = pred[x];
  std::vector<Vertex> cycle;
  Vertex y = x;
  do {
    cycle.push_back(y);
    y = pred[y];
  } while (y != x);
  std::reverse(cycle.begin(), cycle.end());
  return cycle;
}

/// Infimum of walk weights from s to every vertex. Vertices reachable from a
/// negative cycle that is itself reachable from s get negative_infinity.
template <class W>
std::vector<Distance<W>> single_source(const Csr& g, const Lattice<W>& w, Vertex s) {
  const std::size_t n = g.vertices();
  std::vector<W> dist(n, W(0));
  std::vector<char> reached(n, 0);
  reached[s] = 1;
  for (std::size_t round = 1; round < n; ++round) {
    bool changed = false;
    for (Vertex u = 0; u < n; ++u) {
      if (!reached[u]) continue;
      for (Vertex v : g.successors(u)) {
        W candidate = dist[u] + w.weight(u, v);
        if (!reached[v] || candidate < dist[v]) {
          dist[v] = std::move(candidate);
          reached[v] = 1;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  std::vector<char> unbounded(n, 0);
  std::deque<Vertex> queue;
  for (Vertex u = 0; u < n; ++u) {
    if (!reached[u]) continue;
    for (Vertex v : g.successors(u))
      if (!unbounded[v] && dist[u] + w.weight(u, v) < dist[v]) {
        unbounded[v] = 1;
        queue.push_back(v);
      }
  }
  while (!queue.empty()) {
    const Vertex x = queue.front();
    queue.pop_front();
    for (Vertex v : g.successors(x))
      if (!unbounded[v]) {
        unbounded[v] = 1;
        queue.push_back(v);
      }
  }
  std::vector<Distance<W>> out(n);
  for (Vertex v = 0; v < n; ++v) {
    if (unbounded[v])
      out[v].reach = Reach::negative_infinity;
    else if (reached[v])
      out[v] = {Reach::finite, std::move(dist[v])};
  }
  return out;
}

}  // namespace ospkit::walks
