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

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ospkit/mechanism.hpp"
#include "ospkit/shortest_walks.hpp"

namespace ospkit {

struct GraphLimits {
  ProfileId max_profiles = 1'000'000;
  std::uint64_t max_edge_pairs = 60'000'000;
};

/// Infimum of walk weights between two profiles.
struct WalkWeight {
  walks::Reach reach = walks::Reach::unreachable;
  Rational value;  // meaningful only when finite

  static WalkWeight finite(Rational v) { return {walks::Reach::finite, std::move(v)}; }
  static WalkWeight negative_infinity() { return {walks::Reach::negative_infinity, {}}; }
  static WalkWeight unreachable() { return {walks::Reach::unreachable, {}}; }

  bool is_finite() const { return reach == walks::Reach::finite; }
  bool is_negative_infinity() const { return reach == walks::Reach::negative_infinity; }
  bool is_unreachable() const { return reach == walks::Reach::unreachable; }
};

/// A node of agent i's implementation tree that separates profiles.
struct Separator {
  std::string node;
  TypeSet left = 0;
  TypeSet right = 0;
  std::vector<TypeSet> subdomain;
};

/// OSP-graph of one agent over the full profile box. Vertices are ProfileIds.
/// Edge weights are not stored; they follow from types and outcomes.
class OspGraph {
 public:
  static OspGraph build(const Mechanism& m, AgentIndex agent, const GraphLimits& limits = {}) {
    if (agent >= m.agent_count())
      throw Error("unknown agent index " + std::to_string(agent));
    if (m.profile_count() > limits.max_profiles)
      throw GuardExceeded("profile box has " + std::to_string(m.profile_count()) +
                          " profiles, limit is " + std::to_string(limits.max_profiles) +
                          " (raise --max-profiles)");
    OspGraph g;
    g.agent_ = agent;
    g.agents_ = m.agents();
    for (AgentIndex a = 0; a < m.agent_count(); ++a) g.domains_.push_back(m.domain(a));
    g.box_ = m.box();
    const auto n = static_cast<std::size_t>(m.profile_count());
    const auto leaves = m.leaf_table();
    g.outcome_.resize(n);
    for (std::size_t v = 0; v < n; ++v) g.outcome_[v] = m.node(leaves[v]).leaf().alloc[agent];

    std::uint64_t pairs = 0;
    for (const auto& node : m.nodes()) {
      if (node.is_leaf() || node.query().agent != agent) continue;
      auto box = node.subdomain;
      box[agent] = node.query().left;
      const auto lefts = ProfileBox::count(box);
      box[agent] = node.query().right;
      pairs += 2 * lefts * ProfileBox::count(box);
      if (pairs > limits.max_edge_pairs)
        throw GuardExceeded("OSP-graph of \"" + g.agents_[agent] + "\" exceeds " +
                            std::to_string(limits.max_edge_pairs) + " raw edges");
    }
    std::vector<std::vector<walks::Vertex>> lists(n);
    for (const auto& node : m.nodes()) {
      if (node.is_leaf() || node.query().agent != agent) continue;
      const auto& q = node.query();
      g.separators_.push_back({node.id, q.left, q.right, node.subdomain});
      std::vector<walks::Vertex> left, right;
      auto box = node.subdomain;
      box[agent] = q.left;
      g.box_.for_each(box, [&](ProfileId id) { left.push_back(static_cast<walks::Vertex>(id)); });
      box[agent] = q.right;
      g.box_.for_each(box, [&](ProfileId id) { right.push_back(static_cast<walks::Vertex>(id)); });
      for (auto a : left) lists[a].insert(lists[a].end(), right.begin(), right.end());
      for (auto b : right) lists[b].insert(lists[b].end(), left.begin(), left.end());
    }
    g.csr_ = walks::Csr::from_lists(lists);
    g.prepare_lattice();
    return g;
  }

  AgentIndex agent() const { return agent_; }
  const std::string& agent_name() const { return agents_[agent_]; }
  const std::vector<std::string>& agents() const { return agents_; }
  const ProfileBox& box() const { return box_; }
  const Domain& domain(AgentIndex a) const { return domains_[a]; }
  std::size_t vertex_count() const { return csr_.vertices(); }
  std::size_t edge_count() const { return csr_.edges(); }
  const walks::Csr& csr() const { return csr_; }
  const std::vector<Separator>& separators() const { return separators_; }

  const Rational& type(ProfileId v) const {
    return domains_[agent_][box_.type_index(v, agent_)];
  }
  const Rational& outcome(ProfileId v) const { return outcome_.at(v); }

  Profile profile(ProfileId v) const {
    Profile out;
    for (AgentIndex a = 0; a < domains_.size(); ++a)
      out.push_back(domains_[a][box_.type_index(v, a)]);
    return out;
  }

  ProfileId profile_id(const Profile& p) const {
    if (p.size() != domains_.size()) throw Error("profile size does not match the agents");
    std::vector<std::size_t> idx;
    for (AgentIndex a = 0; a < p.size(); ++a) {
      auto k = domains_[a].index_of(p[a]);
      if (!k) throw Error("type " + to_string(p[a]) + " outside the domain of \"" + agents_[a] + "\"");
      idx.push_back(*k);
    }
    return box_.encode(idx);
  }

  std::span<const walks::Vertex> successors(ProfileId a) const {
    return csr_.successors(static_cast<walks::Vertex>(a));
  }

  bool has_edge(ProfileId a, ProfileId b) const {
    return a < vertex_count() && b < vertex_count() &&
           csr_.has_edge(static_cast<walks::Vertex>(a), static_cast<walks::Vertex>(b));
  }

  /// a_i * (f_i(b) - f_i(a)); defined whether or not the edge exists.
  Rational weight(ProfileId a, ProfileId b) const {
    return Rational(type(a) * (outcome(b) - outcome(a)));
  }

  /// Nodes that separate a from b, in preorder.
  std::vector<std::string> separating_nodes(ProfileId a, ProfileId b) const {
    std::vector<std::string> out;
    for (const auto& s : separators_) {
      bool compatible = true;
      for (AgentIndex x = 0; x < domains_.size() && compatible; ++x)
        compatible = types::contains(s.subdomain[x], box_.type_index(a, x)) &&
                     types::contains(s.subdomain[x], box_.type_index(b, x));
      if (!compatible) continue;
      const auto ka = box_.type_index(a, agent_);
      const auto kb = box_.type_index(b, agent_);
      if ((types::contains(s.left, ka) && types::contains(s.right, kb)) ||
          (types::contains(s.right, ka) && types::contains(s.left, kb)))
        out.push_back(s.node);
    }
    return out;
  }

  /// Negative cycle as profile ids in walk order, or nullopt.
  std::optional<std::vector<ProfileId>> negative_cycle() const {
    auto to_ids = [](const std::optional<std::vector<walks::Vertex>>& c)
        -> std::optional<std::vector<ProfileId>> {
      if (!c) return std::nullopt;
      return std::vector<ProfileId>(c->begin(), c->end());
    };
    if (small_) return to_ids(walks::find_negative_cycle(csr_, small_lattice_));
    return to_ids(walks::find_negative_cycle(csr_, big_lattice_));
  }

  /// Shortest walk infima from s to every vertex.
  std::vector<WalkWeight> walks_from(ProfileId s) const {
    std::vector<WalkWeight> out;
    auto convert = [&](const auto& dists) {
      out.reserve(dists.size());
      for (const auto& d : dists) {
        if (d.reach == walks::Reach::finite)
          out.push_back(WalkWeight::finite(unscale(mpz_class(d.value))));
        else
          out.push_back({d.reach, {}});
      }
    };
    if (small_)
      convert(walks::single_source(csr_, small_lattice_, static_cast<walks::Vertex>(s)));
    else
      convert(walks::single_source(csr_, big_lattice_, static_cast<walks::Vertex>(s)));
    return out;
  }

 private:
  Rational unscale(const mpz_class& v) const {
    Rational r(v, scale_);
    r.canonicalize();
    return r;
  }

  void prepare_lattice() {
    mpz_class type_den = 1, level_den = 1;
    for (std::size_t k = 0; k < domains_[agent_].size(); ++k)
      type_den = common_denominator(type_den, domains_[agent_][k]);
    for (const auto& f : outcome_) level_den = common_denominator(level_den, f);
    scale_ = type_den * level_den;
    const auto n = outcome_.size();
    std::vector<mpz_class> type(n), level(n);
    mpz_class max_type = 0, max_level = 0;
    for (std::size_t v = 0; v < n; ++v) {
      type[v] = mpz_class(this->type(v) * type_den);
      level[v] = mpz_class(outcome_[v] * level_den);
      if (abs(type[v]) > max_type) max_type = abs(type[v]);
      if (abs(level[v]) > max_level) max_level = abs(level[v]);
    }
    const mpz_class bound = max_type * 2 * max_level * mpz_class(static_cast<unsigned long>(n + 2));
    const mpz_class limit = mpz_class(1) << 62;
    small_ = bound < limit;
    if (small_) {
      small_lattice_.type.resize(n);
      small_lattice_.level.resize(n);
      for (std::size_t v = 0; v < n; ++v) {
        small_lattice_.type[v] = type[v].get_si();
        small_lattice_.level[v] = level[v].get_si();
      }
    } else {
      big_lattice_.type = std::move(type);
      big_lattice_.level = std::move(level);
    }
  }

  AgentIndex agent_ = 0;
  std::vector<std::string> agents_;
  std::vector<Domain> domains_;
  ProfileBox box_;
  std::vector<Rational> outcome_;
  std::vector<Separator> separators_;
  walks::Csr csr_;
  mpz_class scale_ = 1;
  bool small_ = true;
  walks::Lattice<std::int64_t> small_lattice_;
  walks::Lattice<mpz_class> big_lattice_;
};

inline OspGraph build_osp_graph(const Mechanism& m, AgentIndex agent,
                                const GraphLimits& limits = {}) {
  return OspGraph::build(m, agent, limits);
}

inline OspGraph build_osp_graph(const Mechanism& m, const std::string& agent,
                                const GraphLimits& limits = {}) {
  return OspGraph::build(m, m.require_agent(agent), limits);
}

// ---------------------------------------------------------------------------
// Cycles

/// Closed walk in an OSP-graph. profiles[k] -> profiles[k+1] is hop k, and the
/// last hop returns to profiles[0].
struct CycleWitness {
  AgentIndex agent = 0;
  std::vector<ProfileId> profiles;
  std::vector<Rational> hop_weights;
  std::vector<std::string> hop_nodes;  // first separating node per hop
  Rational weight;

  std::size_t length() const { return profiles.size(); }
};

/// Builds a witness from a vertex sequence, checking every hop is an edge.
/// The sequence is rotated to start at its smallest profile id.
inline CycleWitness make_cycle(const OspGraph& g, std::vector<ProfileId> profiles) {
  if (profiles.size() < 2) throw PreconditionError("a cycle needs at least two profiles");
  std::rotate(profiles.begin(), std::min_element(profiles.begin(), profiles.end()),
              profiles.end());
  CycleWitness c;
  c.agent = g.agent();
  c.weight = 0;
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    const auto a = profiles[k];
    const auto b = profiles[(k + 1) % profiles.size()];
    if (!g.has_edge(a, b))
      throw PreconditionError("hop " + std::to_string(k) + " of the cycle is not an edge");
    c.hop_weights.push_back(g.weight(a, b));
    c.hop_nodes.push_back(g.separating_nodes(a, b).front());
    c.weight += c.hop_weights.back();
  }
  c.profiles = std::move(profiles);
  return c;
}

struct TwoCycleReport {
  bool ok = true;
  std::optional<std::pair<ProfileId, ProfileId>> witness;  // minimizing pair
  Rational weight;                                         // its two-cycle weight
};

/// Every two-cycle has non-negative weight. On failure reports the most
/// negative pair (first in id order on ties).
inline TwoCycleReport check_2cmon(const OspGraph& g) {
  TwoCycleReport r;
  for (ProfileId a = 0; a < g.vertex_count(); ++a)
    for (auto b : g.successors(a)) {
      if (b <= a) continue;
      Rational w = g.weight(a, b) + g.weight(b, a);
      if (w < 0 && (!r.witness || w < r.weight)) {
        r.ok = false;
        r.witness = {a, b};
        r.weight = w;
      }
    }
  return r;
}

struct CmonReport {
  bool ok = true;
  std::optional<CycleWitness> witness;
};

/// No negative-weight cycle exists; the witness comes from predecessor links.
inline CmonReport check_cmon(const OspGraph& g) {
  auto cycle = g.negative_cycle();
  if (!cycle) return {};
  auto witness = make_cycle(g, std::move(*cycle));
  if (!(witness.weight < 0)) throw Error("internal: recovered cycle is not negative");
  return {false, std::move(witness)};
}

/// Minimum weight over all simple cycles with at most max_len hops, by direct
/// enumeration. nullopt when there is no cycle.
inline std::optional<Rational> enumerate_cycles_oracle(const OspGraph& g, std::size_t max_len) {
  if (g.vertex_count() > 1000) throw GuardExceeded("cycle oracle is limited to 1000 vertices");
  if (max_len > 6) throw GuardExceeded("cycle oracle is limited to length 6");
  std::optional<Rational> best;
  const auto n = g.vertex_count();
  std::vector<char> on_path(n, 0);
  std::vector<ProfileId> path;
  auto dfs = [&](auto&& self, ProfileId start, ProfileId u, const Rational& acc) -> void {
    for (auto v : g.successors(u)) {
      if (v == start && path.size() >= 2) {
        Rational total = acc + g.weight(u, v);
        if (!best || total < *best) best = total;
        continue;
      }
      if (v <= start || on_path[v] || path.size() >= max_len) continue;
      on_path[v] = 1;
      path.push_back(v);
      self(self, start, v, acc + g.weight(u, v));
      path.pop_back();
      on_path[v] = 0;
    }
  };
  for (ProfileId s = 0; s < n; ++s) {
    on_path[s] = 1;
    path.assign(1, s);
    dfs(dfs, s, s, Rational(0));
    on_path[s] = 0;
  }
  return best;
}

inline WalkWeight shortest_walk_weight(const OspGraph& g, ProfileId a, ProfileId b) {
  if (a == b) {
    // The empty walk, unless a negative cycle passes through a.
    auto d = g.walks_from(a)[b];
    return d.is_negative_infinity() ? d : WalkWeight::finite(Rational(0));
  }
  return g.walks_from(a)[b];
}

// ---------------------------------------------------------------------------
// Cycle anatomy

struct AnatomyQuad {
  ProfileId b0 = 0, b1 = 0, b2 = 0, b3 = 0;
};

/// Names the first failing clause, or nullopt when all five hold.
inline std::optional<std::string> anatomy_violation(const OspGraph& g, const AnatomyQuad& q) {
  if (!(g.type(q.b0) > g.type(q.b1) && g.type(q.b1) > g.type(q.b2) &&
        g.type(q.b2) > g.type(q.b3)))
    return "types are not strictly descending";
  if (!(g.outcome(q.b1) > g.outcome(q.b2))) return "f(b1) is not above f(b2)";
  if (!g.has_edge(q.b1, q.b0)) return "edge (b1,b0) missing";
  if (!g.has_edge(q.b2, q.b3)) return "edge (b2,b3) missing";
  if (g.has_edge(q.b1, q.b2) || g.has_edge(q.b2, q.b1)) return "b1 and b2 are adjacent";
  return std::nullopt;
}

/// Four profiles on a negative cycle of a 2CMON graph with descending types,
/// inverted outcomes on the middle pair, and no edge between them.
inline AnatomyQuad extract_cycle_anatomy(const OspGraph& g, const CycleWitness& c) {
  if (!(c.weight < 0)) throw PreconditionError("cycle is not negative");
  const auto k = c.profiles.size();
  const auto& p = c.profiles;
  auto at = [&](std::size_t j) { return p[j % k]; };

  // Walk forward from each negative hop; every vertex with a negative out-hop
  // is a candidate for b1, each positive hop supplies (b2, b3).
  for (std::size_t start = 0; start < k; ++start) {
    if (!(g.weight(at(start), at(start + 1)) < 0)) continue;
    std::vector<std::size_t> candidates;
    for (std::size_t j = start; j < start + k; ++j) {
      const Rational w = g.weight(at(j), at(j + 1));
      if (w < 0) {
        candidates.push_back(j);
      } else if (w > 0) {
        for (auto cj : candidates) {
          AnatomyQuad q{at(cj + 1), at(cj), at(j), at(j + 1)};
          if (!anatomy_violation(g, q)) return q;
        }
      }
    }
  }
  // Exhaustive fallback over cycle vertices.
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t y = 0; y < k; ++y) {
      if (!(g.type(p[x]) > g.type(p[y]) && g.outcome(p[x]) > g.outcome(p[y]))) continue;
      if (g.has_edge(p[x], p[y])) continue;
      for (std::size_t z = 0; z < k; ++z) {
        if (!(g.type(p[z]) > g.type(p[x]) && g.has_edge(p[x], p[z]))) continue;
        for (std::size_t t = 0; t < k; ++t) {
          AnatomyQuad q{p[z], p[x], p[y], p[t]};
          if (!anatomy_violation(g, q)) return q;
        }
      }
    }
  throw Error("no anatomy quadruple on the cycle; is the graph 2CMON?");
}

}  // namespace ospkit
