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
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "ospkit/rational.hpp"

namespace ospkit {

using AgentIndex = std::size_t;
using NodeIndex = std::size_t;
using ProfileId = std::uint64_t;

/// Bit k set means the k-th smallest type of the agent's domain.
using TypeSet = std::uint64_t;

inline constexpr std::size_t kMaxDomainSize = 64;

namespace types {

inline TypeSet full(std::size_t size) {
  return size >= 64 ? ~TypeSet{0} : ((TypeSet{1} << size) - 1);
}
inline TypeSet single(std::size_t index) { return TypeSet{1} << index; }
inline bool contains(TypeSet set, std::size_t index) {
  return (set >> index) & 1U;
}
inline std::size_t count(TypeSet set) { return std::popcount(set); }
inline std::size_t lowest(TypeSet set) { return std::countr_zero(set); }
inline std::size_t highest(TypeSet set) { return 63 - std::countl_zero(set); }

/// Indices in ascending order.
inline std::vector<std::size_t> members(TypeSet set) {
  std::vector<std::size_t> out;
  while (set != 0) {
    out.push_back(lowest(set));
    set &= set - 1;
  }
  return out;
}

}  // namespace types

/// Strictly increasing finite set of types of one agent.
class Domain {
 public:
  Domain() = default;
  explicit Domain(std::vector<Rational> values) : values_(std::move(values)) {
    if (values_.empty() || values_.size() > kMaxDomainSize)
      throw Error("domain size must be between 1 and 64");
    for (std::size_t k = 1; k < values_.size(); ++k)
      if (!(values_[k - 1] < values_[k]))
        throw Error("domain values must be strictly increasing");
  }

  std::size_t size() const { return values_.size(); }
  const Rational& operator[](std::size_t k) const { return values_[k]; }
  const std::vector<Rational>& values() const { return values_; }
  TypeSet all() const { return types::full(values_.size()); }

  std::optional<std::size_t> index_of(const Rational& value) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), value);
    if (it == values_.end() || *it != value) return std::nullopt;
    return static_cast<std::size_t>(it - values_.begin());
  }

  std::vector<Rational> select(TypeSet set) const {
    std::vector<Rational> out;
    for (auto k : types::members(set)) out.push_back(values_[k]);
    return out;
  }

 private:
  std::vector<Rational> values_;
};

/// Mixed-radix encoding of the profile box D = D_1 x ... x D_n. Agent 0 is
/// the most significant digit, so ids follow lexicographic profile order.
class ProfileBox {
 public:
  ProfileBox() = default;
  explicit ProfileBox(std::vector<std::size_t> radices)
      : radices_(std::move(radices)), strides_(radices_.size()) {
    long double approx = 1;
    ProfileId size = 1;
    for (std::size_t a = radices_.size(); a-- > 0;) {
      strides_[a] = size;
      approx *= static_cast<long double>(radices_[a]);
      if (approx > static_cast<long double>(std::numeric_limits<ProfileId>::max() / 2))
        throw GuardExceeded("profile box does not fit in 63 bits");
      size *= radices_[a];
    }
    size_ = size;
  }

  ProfileId size() const { return size_; }
  std::size_t agents() const { return radices_.size(); }
  std::size_t radix(AgentIndex a) const { return radices_[a]; }

  std::size_t type_index(ProfileId id, AgentIndex a) const {
    return static_cast<std::size_t>((id / strides_[a]) % radices_[a]);
  }

  ProfileId encode(const std::vector<std::size_t>& indices) const {
    ProfileId id = 0;
    for (std::size_t a = 0; a < radices_.size(); ++a) id += indices[a] * strides_[a];
    return id;
  }

  std::vector<std::size_t> decode(ProfileId id) const {
    std::vector<std::size_t> out(radices_.size());
    for (std::size_t a = 0; a < radices_.size(); ++a) out[a] = type_index(id, a);
    return out;
  }

  ProfileId with_type(ProfileId id, AgentIndex a, std::size_t index) const {
    return id - type_index(id, a) * strides_[a] + index * strides_[a];
  }

  /// Calls fn(id) for every profile of the sub-box sets[0] x ... x sets[n-1],
  /// in ascending id order.
  void for_each(const std::vector<TypeSet>& sets,
                const std::function<void(ProfileId)>& fn) const {
    std::vector<std::vector<std::size_t>> choices(sets.size());
    for (std::size_t a = 0; a < sets.size(); ++a) {
      choices[a] = types::members(sets[a]);
      if (choices[a].empty()) return;
    }
    std::vector<std::size_t> pos(sets.size(), 0);
    while (true) {
      ProfileId id = 0;
      for (std::size_t a = 0; a < sets.size(); ++a) id += choices[a][pos[a]] * strides_[a];
      fn(id);
      std::size_t a = sets.size();
      while (a > 0) {
        --a;
        if (++pos[a] < choices[a].size()) break;
        pos[a] = 0;
        if (a == 0) return;
      }
      if (sets.empty()) return;
    }
  }

  static ProfileId count(const std::vector<TypeSet>& sets) {
    ProfileId total = 1;
    for (auto s : sets) total *= types::count(s);
    return total;
  }

 private:
  std::vector<std::size_t> radices_;
  std::vector<ProfileId> strides_;
  ProfileId size_ = 1;
};

/// A full type profile, one value per agent in mechanism agent order.
using Profile = std::vector<Rational>;

/// Outcome quantity per agent, in mechanism agent order.
using Allocation = std::vector<Rational>;

// ---------------------------------------------------------------------------
// Unvalidated form, mirroring the JSON interchange format.

struct QueryDraft {
  std::string agent;
  std::vector<Rational> left;
  std::vector<Rational> right;
  std::string left_child;
  std::string right_child;
};

struct LeafDraft {
  std::map<std::string, Rational> alloc;
  std::optional<std::map<std::string, Rational>> pay;
};

/// A query with more than two answers. Never valid; kept so the loader can
/// name the node in its rejection.
struct KaryDraft {
  std::size_t arity = 0;
  std::vector<std::string> children;
};

using NodeDraft = std::variant<QueryDraft, LeafDraft, KaryDraft>;

struct MechanismDraft {
  std::vector<std::string> agents;
  std::map<std::string, std::vector<Rational>> domains;
  std::string root;
  std::vector<std::pair<std::string, NodeDraft>> nodes;
};

struct Violation {
  std::string node;  // empty for mechanism-level rules
  std::string rule;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

class InvalidMechanism : public Error {
 public:
  explicit InvalidMechanism(ValidationReport report)
      : Error(summarize(report)), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  static std::string summarize(const ValidationReport& report) {
    std::string text = "invalid mechanism";
    for (const auto& v : report.violations) text += "\n  " + v.message;
    return text;
  }
  ValidationReport report_;
};

// ---------------------------------------------------------------------------
// Validated, index-based form.

struct QueryNode {
  AgentIndex agent = 0;
  TypeSet left = 0;
  TypeSet right = 0;
  NodeIndex left_child = 0;
  NodeIndex right_child = 0;
};

struct LeafNode {
  Allocation alloc;
  std::vector<std::optional<Rational>> pay;
};

struct Node {
  std::string id;
  std::variant<QueryNode, LeafNode> body;
  std::optional<NodeIndex> parent;
  std::size_t depth = 0;
  NodeIndex subtree_end = 0;  // preorder: subtree is [index, subtree_end)
  std::vector<TypeSet> subdomain;

  bool is_leaf() const { return std::holds_alternative<LeafNode>(body); }
  const QueryNode& query() const { return std::get<QueryNode>(body); }
  const LeafNode& leaf() const { return std::get<LeafNode>(body); }
};

struct Evaluation {
  NodeIndex leaf = 0;
  std::string leaf_id;
  Allocation alloc;
};

/// Larger type t_hi whose label contains something above a label of the
/// smaller type t_lo.
struct LabelInversion {
  Rational t_hi;
  Rational t_lo;
};

namespace detail {

inline std::string at(const std::string& node) { return " at " + node; }

struct Validator {
  const MechanismDraft& draft;
  ValidationReport report;
  std::map<std::string, std::size_t> agent_ids;
  std::vector<Domain> domains;
  std::map<std::string, const NodeDraft*> nodes;
  std::set<std::string> visited;

  void add(const std::string& node, std::string rule, std::string message) {
    report.violations.push_back({node, std::move(rule), std::move(message)});
  }

  bool check_header() {
    for (std::size_t a = 0; a < draft.agents.size(); ++a) {
      if (!agent_ids.emplace(draft.agents[a], a).second)
        add("", "duplicate-agent", "agent \"" + draft.agents[a] + "\" listed twice");
    }
    if (draft.agents.empty()) add("", "no-agents", "mechanism has no agents");
    bool domains_ok = true;
    for (const auto& name : draft.agents) {
      auto it = draft.domains.find(name);
      if (it == draft.domains.end()) {
        add("", "missing-domain", "no domain for agent \"" + name + "\"");
        domains_ok = false;
        domains.emplace_back();
        continue;
      }
      const auto& values = it->second;
      bool sorted = true;
      for (std::size_t k = 1; k < values.size(); ++k)
        if (!(values[k - 1] < values[k])) sorted = false;
      if (!sorted) {
        add("", "domain-order",
            "domain of \"" + name + "\" is not strictly increasing");
        domains_ok = false;
      }
      if (values.size() < 2) {
        add("", "domain-size", "domain of \"" + name + "\" has fewer than 2 types");
        domains_ok = false;
      }
      if (values.size() > kMaxDomainSize) {
        add("", "domain-size", "domain of \"" + name + "\" has more than 64 types");
        domains_ok = false;
      }
      domains.push_back(sorted && !values.empty() && values.size() <= kMaxDomainSize
                            ? Domain(values)
                            : Domain());
    }
    for (const auto& [name, values] : draft.domains)
      if (!agent_ids.count(name))
        add("", "unknown-agent", "domain given for unknown agent \"" + name + "\"");
    for (const auto& [id, body] : draft.nodes)
      if (!nodes.emplace(id, &body).second)
        add(id, "duplicate-node", "node id defined twice" + at(id));
    if (!nodes.count(draft.root)) {
      add(draft.root, "dangling-root", "root \"" + draft.root + "\" is not a node");
      return false;
    }
    return domains_ok && report.ok();
  }

  std::optional<TypeSet> to_set(const std::string& node, const Domain& domain,
                                const std::vector<Rational>& values) {
    TypeSet set = 0;
    bool ok = true;
    for (const auto& v : values) {
      auto k = domain.index_of(v);
      if (!k) {
        add(node, "type-outside-domain",
            "type " + to_string(v) + " is not in the agent's domain" + at(node));
        ok = false;
        continue;
      }
      if (types::contains(set, *k)) {
        add(node, "partition-overlap", "type " + to_string(v) + " repeated" + at(node));
        ok = false;
      }
      set |= types::single(*k);
    }
    return ok ? std::optional<TypeSet>(set) : std::nullopt;
  }

  // Marks a subtree as reached without checking it, to avoid cascades below a
  // node that already failed.
  void mark(const std::string& id, std::size_t guard = 0) {
    if (guard > nodes.size() || !visited.insert(id).second) return;
    auto it = nodes.find(id);
    if (it == nodes.end()) return;
    if (auto* q = std::get_if<QueryDraft>(it->second)) {
      mark(q->left_child, guard + 1);
      mark(q->right_child, guard + 1);
    } else if (auto* k = std::get_if<KaryDraft>(it->second)) {
      for (const auto& c : k->children) mark(c, guard + 1);
    }
  }

  void visit(const std::string& id, const std::vector<TypeSet>& subdomain) {
    if (!visited.insert(id).second) {
      add(id, "shared-node", "node reached along more than one path" + at(id));
      return;
    }
    const NodeDraft& body = *nodes.at(id);
    if (auto* k = std::get_if<KaryDraft>(&body)) {
      add(id, "kary-node",
          "query with " + std::to_string(k->arity) +
              " answers" + at(id) +
              "; only binary queries are supported (every mechanism has an "
              "equivalent binary implementation tree, so binarize the query first)");
      for (const auto& c : k->children) mark(c);
      return;
    }
    if (auto* leaf = std::get_if<LeafDraft>(&body)) {
      for (const auto& [agent, value] : leaf->alloc) {
        if (!agent_ids.count(agent))
          add(id, "unknown-agent", "allocation for unknown agent \"" + agent + "\"" + at(id));
        if (value < 0)
          add(id, "negative-allocation", "negative allocation for \"" + agent + "\"" + at(id));
      }
      if (leaf->pay)
        for (const auto& [agent, value] : *leaf->pay)
          if (!agent_ids.count(agent))
            add(id, "unknown-agent", "payment for unknown agent \"" + agent + "\"" + at(id));
      return;
    }
    const auto& q = std::get<QueryDraft>(body);
    const auto before = report.violations.size();
    auto agent_it = agent_ids.find(q.agent);
    for (const auto* child : {&q.left_child, &q.right_child})
      if (!nodes.count(*child))
        add(id, "dangling-child", "child \"" + *child + "\" does not exist" + at(id));
    if (agent_it == agent_ids.end()) {
      add(id, "unknown-agent", "query to unknown agent \"" + q.agent + "\"" + at(id));
      mark(q.left_child);
      mark(q.right_child);
      return;
    }
    const auto a = agent_it->second;
    auto left = to_set(id, domains[a], q.left);
    auto right = to_set(id, domains[a], q.right);
    if (left && right) {
      const TypeSet current = subdomain[a];
      if (*left == 0 || *right == 0) add(id, "empty-part", "empty part" + at(id));
      if ((*left & *right) != 0) add(id, "partition-overlap", "parts overlap" + at(id));
      if (((*left | *right) & ~current) != 0)
        add(id, "type-outside-subdomain",
            "part contains a type already excluded" + at(id));
      if ((current & ~(*left | *right)) != 0)
        add(id, "partition-incomplete", "partition incomplete" + at(id));
    }
    if (report.violations.size() != before) {
      mark(q.left_child);
      mark(q.right_child);
      return;
    }
    auto child_domain = subdomain;
    child_domain[a] = *left;
    visit(q.left_child, child_domain);
    child_domain[a] = *right;
    visit(q.right_child, child_domain);
  }

  void run() {
    if (!check_header()) return;
    std::vector<TypeSet> full;
    for (const auto& d : domains) full.push_back(d.all());
    visit(draft.root, full);
    for (const auto& [id, body] : draft.nodes)
      if (!visited.count(id))
        add(id, "unreachable-node", "node is not reachable from the root" + at(id));
  }
};

}  // namespace detail

/// Checks every structural invariant of an implementation tree.
inline ValidationReport validate_mechanism(const MechanismDraft& draft) {
  detail::Validator v{draft, {}, {}, {}, {}, {}};
  v.run();
  return std::move(v.report);
}

/// Immutable, validated single-parameter extensive-form mechanism. Nodes are
/// stored in preorder from the root, so every subtree is a contiguous range.
class Mechanism {
 public:
  /// Validates and indexes a draft. Throws InvalidMechanism on violations.
  static Mechanism from_draft(const MechanismDraft& draft) {
    auto report = validate_mechanism(draft);
    if (!report.ok()) throw InvalidMechanism(std::move(report));
    Mechanism m;
    m.agents_ = draft.agents;
    std::vector<std::size_t> radices;
    for (std::size_t a = 0; a < draft.agents.size(); ++a) {
      m.agent_index_.emplace(draft.agents[a], a);
      m.domains_.emplace_back(draft.domains.at(draft.agents[a]));
      radices.push_back(m.domains_.back().size());
    }
    m.box_ = ProfileBox(radices);
    std::map<std::string, const NodeDraft*> by_id;
    for (const auto& [id, body] : draft.nodes) by_id.emplace(id, &body);
    std::vector<TypeSet> full;
    for (const auto& d : m.domains_) full.push_back(d.all());
    m.add_node(draft.root, by_id, full, std::nullopt, 0);
    return m;
  }

  const std::vector<std::string>& agents() const { return agents_; }
  std::size_t agent_count() const { return agents_.size(); }
  std::optional<AgentIndex> agent_index(const std::string& name) const {
    auto it = agent_index_.find(name);
    if (it == agent_index_.end()) return std::nullopt;
    return it->second;
  }
  AgentIndex require_agent(const std::string& name) const {
    auto a = agent_index(name);
    if (!a) throw Error("unknown agent \"" + name + "\"");
    return *a;
  }

  const Domain& domain(AgentIndex a) const { return domains_[a]; }
  const ProfileBox& box() const { return box_; }
  ProfileId profile_count() const { return box_.size(); }

  NodeIndex root() const { return 0; }
  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(NodeIndex u) const { return nodes_.at(u); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::optional<NodeIndex> node_index(const std::string& id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }
  NodeIndex require_node(const std::string& id) const {
    auto u = node_index(id);
    if (!u) throw Error("unknown node \"" + id + "\"");
    return *u;
  }

  // -- profiles -------------------------------------------------------------

  ProfileId profile_id(const Profile& profile) const {
    if (profile.size() != agents_.size())
      throw Error("profile has " + std::to_string(profile.size()) +
                  " entries, mechanism has " + std::to_string(agents_.size()) + " agents");
    std::vector<std::size_t> indices(profile.size());
    for (std::size_t a = 0; a < profile.size(); ++a) {
      auto k = domains_[a].index_of(profile[a]);
      if (!k)
        throw Error("type " + to_string(profile[a]) + " of agent \"" + agents_[a] +
                    "\" is outside its domain");
      indices[a] = *k;
    }
    return box_.encode(indices);
  }

  Profile profile(ProfileId id) const {
    Profile out(agents_.size());
    for (std::size_t a = 0; a < agents_.size(); ++a)
      out[a] = domains_[a][box_.type_index(id, a)];
    return out;
  }

  const Rational& type_of(ProfileId id, AgentIndex a) const {
    return domains_[a][box_.type_index(id, a)];
  }

  // -- evaluation -----------------------------------------------------------

  /// Leaf reached by walking from `from`; the profile must be compatible
  /// with that node.
  NodeIndex leaf_of(ProfileId id, NodeIndex from = 0) const {
    NodeIndex u = from;
    while (!nodes_[u].is_leaf()) {
      const auto& q = nodes_[u].query();
      u = types::contains(q.left, box_.type_index(id, q.agent)) ? q.left_child
                                                                : q.right_child;
    }
    return u;
  }

  Evaluation evaluate(const Profile& profile) const {
    const auto leaf = leaf_of(profile_id(profile));
    return {leaf, nodes_[leaf].id, nodes_[leaf].leaf().alloc};
  }

  const Rational& outcome(ProfileId id, AgentIndex a) const {
    return nodes_[leaf_of(id)].leaf().alloc[a];
  }

  /// Leaf index of every profile, indexed by ProfileId.
  std::vector<NodeIndex> leaf_table() const {
    std::vector<NodeIndex> table(box_.size());
    for (NodeIndex u = 0; u < nodes_.size(); ++u)
      if (nodes_[u].is_leaf())
        box_.for_each(nodes_[u].subdomain, [&](ProfileId id) { table[id] = u; });
    return table;
  }

  bool compatible(ProfileId id, NodeIndex u) const {
    for (std::size_t a = 0; a < agents_.size(); ++a)
      if (!types::contains(nodes_[u].subdomain[a], box_.type_index(id, a))) return false;
    return true;
  }

  /// Per-agent types compatible with every answer on the path to u.
  std::vector<std::vector<Rational>> node_domain(NodeIndex u) const {
    std::vector<std::vector<Rational>> out;
    for (std::size_t a = 0; a < agents_.size(); ++a)
      out.push_back(domains_[a].select(node(u).subdomain[a]));
    return out;
  }

  // -- labels ---------------------------------------------------------------

  /// Sorted distinct outcomes agent a can receive in the subtree of u when
  /// its type is the k-th domain value.
  std::vector<Rational> label(NodeIndex u, AgentIndex a, std::size_t k) const {
    std::vector<Rational> out;
    for (NodeIndex v = u; v < nodes_[u].subtree_end; ++v) {
      const auto& n = nodes_[v];
      if (n.is_leaf() && types::contains(n.subdomain[a], k)) out.push_back(n.leaf().alloc[a]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Label of type t for agent a at u. Throws PreconditionError when t is not
  /// compatible with u.
  std::set<Rational> labels(NodeIndex u, AgentIndex a, const Rational& t) const {
    auto k = domains_.at(a).index_of(t);
    if (!k || !types::contains(node(u).subdomain[a], *k))
      throw PreconditionError("type " + to_string(t) + " is not compatible with node " +
                              nodes_[u].id);
    auto values = label(u, a, *k);
    return {values.begin(), values.end()};
  }

  /// Profiles (k, b_-a) with b_-a compatible with u and outcome `value` for a.
  std::vector<ProfileId> buddies(NodeIndex u, AgentIndex a, std::size_t k,
                                 const Rational& value) const {
    std::vector<ProfileId> out;
    for (NodeIndex v = u; v < nodes_[u].subtree_end; ++v) {
      const auto& n = nodes_[v];
      if (!n.is_leaf() || !types::contains(n.subdomain[a], k) || n.leaf().alloc[a] != value)
        continue;
      auto box = n.subdomain;
      box[a] = types::single(k);
      box_.for_each(box, [&](ProfileId id) { out.push_back(id); });
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// nullopt when labels of a are monotone at u (larger types never get an
  /// outcome above one of a smaller type); otherwise the first violating pair.
  std::optional<LabelInversion> label_inversion(NodeIndex u, AgentIndex a) const {
    const auto ks = types::members(node(u).subdomain[a]);
    std::vector<std::vector<Rational>> labels_of;
    for (auto k : ks) labels_of.push_back(label(u, a, k));
    for (std::size_t hi = ks.size(); hi-- > 0;)
      for (std::size_t lo = 0; lo < hi; ++lo)
        if (labels_of[hi].back() > labels_of[lo].front())
          return LabelInversion{domains_[a][ks[hi]], domains_[a][ks[lo]]};
    return std::nullopt;
  }

  bool labels_monotone(NodeIndex u, AgentIndex a) const {
    return !label_inversion(u, a).has_value();
  }

  /// Round-trips to the interchange structure, preserving ids and preorder.
  MechanismDraft to_draft() const {
    MechanismDraft d;
    d.agents = agents_;
    for (std::size_t a = 0; a < agents_.size(); ++a) d.domains[agents_[a]] = domains_[a].values();
    d.root = nodes_[0].id;
    for (const auto& n : nodes_) {
      if (n.is_leaf()) {
        LeafDraft leaf;
        bool any_pay = false;
        std::map<std::string, Rational> pay;
        for (std::size_t a = 0; a < agents_.size(); ++a) {
          leaf.alloc[agents_[a]] = n.leaf().alloc[a];
          if (n.leaf().pay[a]) {
            any_pay = true;
            pay[agents_[a]] = *n.leaf().pay[a];
          }
        }
        if (any_pay) leaf.pay = std::move(pay);
        d.nodes.emplace_back(n.id, std::move(leaf));
      } else {
        const auto& q = n.query();
        d.nodes.emplace_back(n.id, QueryDraft{agents_[q.agent], domains_[q.agent].select(q.left),
                                              domains_[q.agent].select(q.right),
                                              nodes_[q.left_child].id, nodes_[q.right_child].id});
      }
    }
    return d;
  }

 private:
  NodeIndex add_node(const std::string& id, const std::map<std::string, const NodeDraft*>& by_id,
                     const std::vector<TypeSet>& subdomain, std::optional<NodeIndex> parent,
                     std::size_t depth) {
    const NodeIndex index = nodes_.size();
    node_index_.emplace(id, index);
    nodes_.push_back(Node{id, LeafNode{}, parent, depth, 0, subdomain});
    const NodeDraft& body = *by_id.at(id);
    if (const auto* leaf = std::get_if<LeafDraft>(&body)) {
      LeafNode out;
      out.alloc.assign(agents_.size(), Rational(0));
      out.pay.assign(agents_.size(), std::nullopt);
      for (const auto& [agent, value] : leaf->alloc) out.alloc[agent_index_.at(agent)] = value;
      if (leaf->pay)
        for (const auto& [agent, value] : *leaf->pay) out.pay[agent_index_.at(agent)] = value;
      nodes_[index].body = std::move(out);
      nodes_[index].subtree_end = index + 1;
      return index;
    }
    const auto& q = std::get<QueryDraft>(body);
    QueryNode out;
    out.agent = agent_index_.at(q.agent);
    for (const auto& v : q.left) out.left |= types::single(*domains_[out.agent].index_of(v));
    for (const auto& v : q.right) out.right |= types::single(*domains_[out.agent].index_of(v));
    auto child = subdomain;
    child[out.agent] = out.left;
    out.left_child = add_node(q.left_child, by_id, child, index, depth + 1);
    child[out.agent] = out.right;
    out.right_child = add_node(q.right_child, by_id, child, index, depth + 1);
    nodes_[index].body = out;
    nodes_[index].subtree_end = nodes_.size();
    return index;
  }

  std::vector<std::string> agents_;
  std::unordered_map<std::string, AgentIndex> agent_index_;
  std::vector<Domain> domains_;
  ProfileBox box_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeIndex> node_index_;
};

}  // namespace ospkit
