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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ospkit/mechanism.hpp"
#include "ospkit/osp_graph.hpp"

namespace ospkit {

// ---------------------------------------------------------------------------
// Ordered queries

struct OrderedQueryReport {
  bool ordered = true;
  std::optional<std::pair<Rational, Rational>> violating;  // (l, r)
  std::string reason;
};

/// Splits a query node's parts into (low, high): low holds the smallest
/// compatible type regardless of which child it leads to.
inline std::pair<TypeSet, TypeSet> low_high_parts(const QueryNode& q) {
  const auto smallest = types::lowest(q.left | q.right);
  return types::contains(q.left, smallest) ? std::pair{q.left, q.right}
                                           : std::pair{q.right, q.left};
}

inline OrderedQueryReport is_ordered_query(const Mechanism& m, NodeIndex u) {
  const auto& node = m.node(u);
  if (node.is_leaf()) throw PreconditionError("node " + node.id + " is a leaf");
  const auto& q = node.query();
  const auto& d = m.domain(q.agent);
  auto [low, high] = low_high_parts(q);
  std::map<std::size_t, std::vector<Rational>> labels;
  for (auto k : types::members(low | high)) labels[k] = m.label(u, q.agent, k);
  for (auto l : types::members(low))
    for (auto r : types::members(high)) {
      if (l > r)
        return {false, std::pair{d[l], d[r]},
                "type " + to_string(d[l]) + " of the low part exceeds " + to_string(d[r])};
      if (labels[r].back() > labels[l].front())
        return {false, std::pair{d[l], d[r]},
                "label of " + to_string(d[r]) + " is not below the label of " + to_string(d[l])};
    }
  return {};
}

// ---------------------------------------------------------------------------
// Order transform

struct Block {
  TypeSet types = 0;
  bool low_side = true;  // drawn from the part holding the smallest type
};

struct OrderedTransformPlan {
  std::string node;
  AgentIndex agent = 0;
  TypeSet low = 0;
  TypeSet high = 0;
  std::vector<Block> blocks;
};

/// Maximal runs of consecutive types from the same part, ascending.
inline std::vector<Block> alternating_blocks(TypeSet low, TypeSet high) {
  std::vector<Block> out;
  for (auto k : types::members(low | high)) {
    const bool side = types::contains(low, k);
    if (out.empty() || out.back().low_side != side) out.push_back({0, side});
    out.back().types |= types::single(k);
  }
  return out;
}

inline OrderedTransformPlan plan_order_transform(const Mechanism& m, NodeIndex u) {
  const auto& node = m.node(u);
  if (node.is_leaf()) throw PreconditionError("node " + node.id + " is a leaf");
  auto [low, high] = low_high_parts(node.query());
  return {node.id, node.query().agent, low, high, alternating_blocks(low, high)};
}

struct OrderTransformResult {
  Mechanism mechanism;
  std::vector<OrderedTransformPlan> plans;  // one per emitted chain

  std::size_t transformed_nodes() const { return plans.size(); }
};

namespace detail {

class OrderEmitter {
 public:
  explicit OrderEmitter(const Mechanism& m) : m_(m) {}

  OrderTransformResult run() {
    std::vector<TypeSet> full;
    for (AgentIndex a = 0; a < m_.agent_count(); ++a) full.push_back(m_.domain(a).all());
    draft_.agents = m_.agents();
    for (AgentIndex a = 0; a < m_.agent_count(); ++a)
      draft_.domains[m_.agents()[a]] = m_.domain(a).values();
    draft_.root = emit(m_.root(), full);
    return {Mechanism::from_draft(draft_), std::move(plans_)};
  }

 private:
  std::string fresh(const std::string& base) {
    if (used_.insert(base).second) return base;
    for (std::size_t k = 2;; ++k) {
      auto id = base + "~" + std::to_string(k);
      if (used_.insert(id).second) return id;
    }
  }

  std::size_t reserve() {
    draft_.nodes.emplace_back();
    return draft_.nodes.size() - 1;
  }

  std::string emit(NodeIndex u, const std::vector<TypeSet>& dom) {
    const auto& node = m_.node(u);
    if (node.is_leaf()) {
      const auto slot = reserve();
      const auto id = fresh(node.id);
      LeafDraft leaf;
      std::map<std::string, Rational> pay;
      for (AgentIndex a = 0; a < m_.agent_count(); ++a) {
        leaf.alloc[m_.agents()[a]] = node.leaf().alloc[a];
        if (node.leaf().pay[a]) pay[m_.agents()[a]] = *node.leaf().pay[a];
      }
      if (!pay.empty()) leaf.pay = std::move(pay);
      draft_.nodes[slot] = {id, std::move(leaf)};
      return id;
    }
    const auto& q = node.query();
    const auto i = q.agent;
    const TypeSet left = q.left & dom[i];
    const TypeSet right = q.right & dom[i];
    if (left == 0) return emit(q.right_child, dom);
    if (right == 0) return emit(q.left_child, dom);
    auto [low, high] = low_high_parts(QueryNode{i, left, right, 0, 0});
    auto blocks = alternating_blocks(low, high);
    const auto& d = m_.domain(i);
    auto child_of = [&](bool low_side) {
      const bool is_left = low_side ? (low == left) : (high == left);
      return is_left ? q.left_child : q.right_child;
    };
    if (blocks.size() <= 2) {
      const auto slot = reserve();
      const auto id = fresh(node.id);
      auto sub = dom;
      sub[i] = left;
      auto lid = emit(q.left_child, sub);
      sub[i] = right;
      auto rid = emit(q.right_child, sub);
      draft_.nodes[slot] = {id, QueryDraft{m_.agents()[i], d.select(left), d.select(right), lid, rid}};
      return id;
    }
    plans_.push_back({node.id, i, low, high, blocks});
    // Chain: block k against everything after it.
    std::string first;
    std::optional<std::size_t> pending;  // slot whose right child is the next chain node
    TypeSet rest = left | right;
    for (std::size_t k = 0; k + 1 < blocks.size(); ++k) {
      const auto slot = reserve();
      const auto id = fresh(k == 0 ? node.id : node.id + "." + std::to_string(k));
      if (k == 0) first = id;
      if (pending) std::get<QueryDraft>(draft_.nodes[*pending].second).right_child = id;
      rest &= ~blocks[k].types;
      auto sub = dom;
      sub[i] = blocks[k].types;
      auto block_child = emit(child_of(blocks[k].low_side), sub);
      draft_.nodes[slot] = {id, QueryDraft{m_.agents()[i], d.select(blocks[k].types),
                                           d.select(rest), block_child, ""}};
      pending = slot;
    }
    auto sub = dom;
    sub[i] = blocks.back().types;
    auto tail = emit(child_of(blocks.back().low_side), sub);
    std::get<QueryDraft>(draft_.nodes[*pending].second).right_child = tail;
    return first;
  }

  const Mechanism& m_;
  MechanismDraft draft_;
  std::set<std::string> used_;
  std::vector<OrderedTransformPlan> plans_;
};

}  // namespace detail

/// Replaces every query whose parts interleave by a chain of queries that
/// peel off the alternating blocks in ascending order, each block leading to
/// a domain-pruned copy of the original subtree for its side. The allocation
/// function is unchanged. Meaningful guarantees need an OSP input.
inline OrderTransformResult order_transform(const Mechanism& m) {
  return detail::OrderEmitter(m).run();
}

// ---------------------------------------------------------------------------
// Antimonotone pairs and pivots

/// Types b1 > b2 compatible with u whose labels invert: y in the label of b1
/// exceeds x in the label of b2.
struct AntimonotonePair {
  NodeIndex node = 0;
  AgentIndex agent = 0;
  std::size_t hi = 0, lo = 0;  // domain indices of b1, b2
  Rational b1, b2;
  Rational y, x;
  std::vector<Rational> label_hi, label_lo;
  std::vector<ProfileId> y_buddies, x_buddies;
};

inline AntimonotonePair with_labels(const Mechanism& m, AntimonotonePair p, Rational y, Rational x) {
  p.y = std::move(y);
  p.x = std::move(x);
  p.y_buddies = m.buddies(p.node, p.agent, p.hi, p.y);
  p.x_buddies = m.buddies(p.node, p.agent, p.lo, p.x);
  return p;
}

/// One entry per inverted type pair, witnessed by y = max label of b1 and
/// x = min label of b2.
inline std::vector<AntimonotonePair> find_antimonotone_pairs(const Mechanism& m, AgentIndex i,
                                                             NodeIndex u) {
  std::vector<AntimonotonePair> out;
  const auto ks = types::members(m.node(u).subdomain[i]);
  std::vector<std::vector<Rational>> labels;
  for (auto k : ks) labels.push_back(m.label(u, i, k));
  for (std::size_t h = 0; h < ks.size(); ++h)
    for (std::size_t l = 0; l < h; ++l) {
      if (!(labels[h].back() > labels[l].front())) continue;
      AntimonotonePair p;
      p.node = u;
      p.agent = i;
      p.hi = ks[h];
      p.lo = ks[l];
      p.b1 = m.domain(i)[ks[h]];
      p.b2 = m.domain(i)[ks[l]];
      p.label_hi = labels[h];
      p.label_lo = labels[l];
      out.push_back(with_labels(m, std::move(p), labels[h].back(), labels[l].front()));
    }
  return out;
}

/// Minimum of the closed-walk sum, extended with both infinities.
struct ExtendedWeight {
  enum class Kind { negative_infinity, finite, positive_infinity } kind = Kind::positive_infinity;
  Rational value;

  static ExtendedWeight finite(Rational v) { return {Kind::finite, std::move(v)}; }
  static ExtendedWeight minus_infinity() { return {Kind::negative_infinity, {}}; }
  static ExtendedWeight plus_infinity() { return {Kind::positive_infinity, {}}; }
  static ExtendedWeight from(const WalkWeight& w) {
    if (w.is_finite()) return finite(w.value);
    return w.is_negative_infinity() ? minus_infinity() : plus_infinity();
  }

  bool is_finite() const { return kind == Kind::finite; }
  bool nonnegative() const {
    return kind == Kind::positive_infinity || (kind == Kind::finite && value >= 0);
  }

  /// A missing leg means no such closed walk, so +inf absorbs -inf.
  friend ExtendedWeight operator+(const ExtendedWeight& a, const ExtendedWeight& b) {
    if (a.kind == Kind::positive_infinity || b.kind == Kind::positive_infinity)
      return plus_infinity();
    if (a.kind == Kind::negative_infinity || b.kind == Kind::negative_infinity)
      return minus_infinity();
    return finite(a.value + b.value);
  }
  friend bool operator<(const ExtendedWeight& a, const ExtendedWeight& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.kind == Kind::finite && a.value < b.value;
  }
};

inline std::string to_string(const ExtendedWeight& w) {
  switch (w.kind) {
    case ExtendedWeight::Kind::negative_infinity: return "-inf";
    case ExtendedWeight::Kind::positive_infinity: return "+inf";
    default: return to_string(w.value);
  }
}

enum class PivotVerdict { unclassified, anchor, extreme, violating };

inline std::string to_string(PivotVerdict v) {
  switch (v) {
    case PivotVerdict::anchor: return "anchor";
    case PivotVerdict::extreme: return "extreme";
    case PivotVerdict::violating: return "violating";
    default: return "unclassified";
  }
}

/// Pivot types bu (upper label z >= y) and bd (lower label q <= x) for an
/// antimonotone pair, separated from it at ancestors of the pair's node.
struct PivotReport {
  NodeIndex node = 0;
  AgentIndex agent = 0;
  Rational b1, b2, y, x;
  Rational bu, bd;
  NodeIndex v_up = 0, v_down = 0;
  Rational z, q;  // label closest to y (resp. x)
  std::vector<ProfileId> y_buddies, x_buddies;
  std::vector<ProfileId> z_buddies;  // bu profiles at v_up with outcome >= y
  std::vector<ProfileId> q_buddies;  // bd profiles at v_down with outcome <= x
  Rational up_gap;    // z - y
  Rational down_gap;  // x - q
  Rational gap;       // y - x

  PivotVerdict verdict = PivotVerdict::unclassified;
  ExtendedWeight minimum;
  bool inequality_holds = false;  // down_gap(bd-b1) + up_gap(b2-bu) >= gap(b1-b2)
  std::optional<CycleWitness> negative_cycle;

  bool is_anchor() const { return up_gap == 0 && down_gap == 0; }
  bool violates() const {
    return verdict == PivotVerdict::anchor || verdict == PivotVerdict::violating;
  }
  /// Weight of the four-hop cycle through the closest buddies.
  Rational direct_cycle_weight() const {
    return Rational(b1 * (q - y) + bd * (x - q) + b2 * (z - x) + bu * (y - z));
  }
};

namespace detail {

struct Separated {
  std::size_t type = 0;
  NodeIndex at = 0;
};

/// Types of agent i cut away from u's path at strict ancestors querying i.
inline std::vector<Separated> separated_types(const Mechanism& m, AgentIndex i, NodeIndex u) {
  std::vector<Separated> out;
  for (auto v = m.node(u).parent; v; v = m.node(*v).parent) {
    const auto& node = m.node(*v);
    const auto& q = node.query();
    if (q.agent != i) continue;
    const auto& lc = m.node(q.left_child);
    const bool via_left = q.left_child <= u && u < lc.subtree_end;
    for (auto k : types::members(via_left ? q.right : q.left)) out.push_back({k, *v});
  }
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.type < b.type; });
  return out;
}

}  // namespace detail

/// All pivot pairs for the pair's (y, x), with their buddy sets.
inline std::vector<PivotReport> find_pivots(const Mechanism& m, const AntimonotonePair& p) {
  const auto i = p.agent;
  struct Candidate {
    detail::Separated s;
    Rational label;
    std::vector<ProfileId> buddies;
  };
  std::vector<Candidate> ups, downs;
  for (const auto& s : detail::separated_types(m, i, p.node)) {
    const auto labels = m.label(s.at, i, s.type);
    std::optional<Rational> z, q;
    std::vector<ProfileId> zb, qb;
    for (const auto& value : labels) {
      if (value >= p.y) {
        if (!z) z = value;
        auto b = m.buddies(s.at, i, s.type, value);
        zb.insert(zb.end(), b.begin(), b.end());
      }
      if (value <= p.x) {
        q = value;
        auto b = m.buddies(s.at, i, s.type, value);
        qb.insert(qb.end(), b.begin(), b.end());
      }
    }
    if (z) ups.push_back({s, *z, std::move(zb)});
    if (q) downs.push_back({s, *q, std::move(qb)});
  }
  std::vector<PivotReport> out;
  for (const auto& up : ups)
    for (const auto& down : downs) {
      PivotReport r;
      r.node = p.node;
      r.agent = i;
      r.b1 = p.b1;
      r.b2 = p.b2;
      r.y = p.y;
      r.x = p.x;
      r.bu = m.domain(i)[up.s.type];
      r.bd = m.domain(i)[down.s.type];
      r.v_up = up.s.at;
      r.v_down = down.s.at;
      r.z = up.label;
      r.q = down.label;
      r.y_buddies = p.y_buddies;
      r.x_buddies = p.x_buddies;
      r.z_buddies = up.buddies;
      r.q_buddies = down.buddies;
      r.up_gap = r.z - r.y;
      r.down_gap = r.x - r.q;
      r.gap = r.y - r.x;
      out.push_back(std::move(r));
    }
  return out;
}

/// Single-source walk infima computed on demand and kept per source.
class WalkCache {
 public:
  explicit WalkCache(const OspGraph& g) : g_(&g) {}
  const std::vector<WalkWeight>& from(ProfileId s) {
    auto it = cache_.find(s);
    if (it == cache_.end()) it = cache_.emplace(s, g_->walks_from(s)).first;
    return it->second;
  }
  const OspGraph& graph() const { return *g_; }

 private:
  const OspGraph* g_;
  std::map<ProfileId, std::vector<WalkWeight>> cache_;
};

/// Minimum over buddy choices of out(b1 -> bd) + in(bd -> b2) + out(b2 -> bu)
/// + in(bu -> b1), each leg a shortest walk. Extreme iff the minimum is >= 0.
inline void classify_pivot(PivotReport& r, WalkCache& cache) {
  using E = ExtendedWeight;
  auto d = [&](ProfileId a, ProfileId b) { return E::from(cache.from(a)[b]); };
  // Split at the (b1, b2) buddies: each half minimizes over one pivot.
  auto half = [&](ProfileId from, const std::vector<ProfileId>& via, ProfileId to) {
    E best = E::plus_infinity();
    for (auto v : via) {
      E w = d(from, v) + d(v, to);
      if (w < best) best = w;
    }
    return best;
  };
  E best = E::plus_infinity();
  for (auto s1 : r.y_buddies)
    for (auto s3 : r.x_buddies) {
      E w = half(s1, r.q_buddies, s3) + half(s3, r.z_buddies, s1);
      if (w < best) best = w;
    }
  r.minimum = best;
  r.inequality_holds = r.down_gap * (r.bd - r.b1) + r.up_gap * (r.b2 - r.bu) >= r.gap * (r.b1 - r.b2);
  if (r.is_anchor())
    r.verdict = PivotVerdict::anchor;
  else
    r.verdict = best.nonnegative() ? PivotVerdict::extreme : PivotVerdict::violating;
  if (best.kind == E::Kind::negative_infinity) {
    auto c = check_cmon(cache.graph());
    r.negative_cycle = std::move(c.witness);
  }
}

// ---------------------------------------------------------------------------
// Three-way greedy classification

struct ThreeWayReport {
  bool three_way = true;
  std::vector<std::pair<NodeIndex, OrderedQueryReport>> queries;
  std::vector<PivotReport> pivots;
  std::optional<std::string> first_violation;
};

/// All queries ordered and every pivot pair of every antimonotone pair (at
/// nodes querying a different agent) is extreme.
inline ThreeWayReport classify_three_way(const Mechanism& m, const GraphLimits& limits = {}) {
  ThreeWayReport out;
  for (NodeIndex u = 0; u < m.node_count(); ++u) {
    if (m.node(u).is_leaf()) continue;
    auto r = is_ordered_query(m, u);
    if (!r.ordered && out.three_way) {
      out.three_way = false;
      out.first_violation = "not three-way greedy (non-ordered query at node " + m.node(u).id +
                            "); run `order` first";
    }
    out.queries.emplace_back(u, std::move(r));
  }
  if (!out.three_way) return out;

  std::vector<std::optional<OspGraph>> graphs(m.agent_count());
  std::vector<std::optional<WalkCache>> caches(m.agent_count());
  for (NodeIndex u = 0; u < m.node_count(); ++u) {
    const auto& node = m.node(u);
    if (node.is_leaf()) continue;
    for (AgentIndex i = 0; i < m.agent_count(); ++i) {
      if (i == node.query().agent) continue;
      for (const auto& base : find_antimonotone_pairs(m, i, u)) {
        for (const auto& y : base.label_hi)
          for (const auto& x : base.label_lo) {
            if (!(y > x)) continue;
            const auto pair = with_labels(m, base, y, x);
            for (auto& pivot : find_pivots(m, pair)) {
              if (!graphs[i]) {
                graphs[i] = OspGraph::build(m, i, limits);
                caches[i].emplace(*graphs[i]);
              }
              classify_pivot(pivot, *caches[i]);
              if (pivot.violates() && out.three_way) {
                out.three_way = false;
                out.first_violation = "not three-way greedy (" + to_string(pivot.verdict) +
                                      " pivot pair at node " + node.id + " for agent \"" +
                                      m.agents()[i] + "\")";
              }
              out.pivots.push_back(std::move(pivot));
            }
          }
      }
    }
  }
  return out;
}

}  // namespace ospkit
