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

// Related-machines makespan with identical jobs: exact optimum, the
// four-type descending/ascending mechanism compiled to a query tree, and
// approximation measurement over the whole profile box.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ospkit/mechanism.hpp"
#include "ospkit/osp_graph.hpp"
#include "ospkit/three_way.hpp"

namespace ospkit {

/// Job count per machine.
using JobAllocation = std::vector<std::uint32_t>;

inline Rational makespan(const Allocation& loads, const Profile& b) {
  if (loads.size() != b.size())
    throw Error("allocation has " + std::to_string(loads.size()) + " machines, profile has " +
                std::to_string(b.size()));
  Rational worst = 0;
  for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, Rational(b[i] * loads[i]));
  return worst;
}

inline Rational makespan(const JobAllocation& loads, const Profile& b) {
  Allocation a;
  for (auto l : loads) a.emplace_back(static_cast<unsigned long>(l));
  return makespan(a, b);
}

struct OptimalSchedule {
  Rational value;
  JobAllocation loads;  // lexicographically smallest optimum
};

inline constexpr std::size_t kMaxOptimalMachines = 8;
inline constexpr std::size_t kMaxOptimalJobs = 16;

/// Exact minimum makespan by enumerating compositions of m in lexicographic
/// order, pruning partial schedules that cannot beat the incumbent.
inline OptimalSchedule optimal_makespan(const Profile& b, std::size_t m) {
  const auto n = b.size();
  if (n == 0) throw Error("no machines");
  if (n > kMaxOptimalMachines || m > kMaxOptimalJobs)
    throw GuardExceeded("optimal makespan is limited to n <= 8 machines and m <= 16 jobs");
  std::optional<OptimalSchedule> best;
  JobAllocation loads(n, 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t left, const Rational& partial) -> void {
    if (best && partial >= best->value) return;
    if (i + 1 == n) {
      loads[i] = static_cast<std::uint32_t>(left);
      Rational value = std::max(partial, Rational(b[i] * static_cast<unsigned long>(left)));
      if (!best || value < best->value) best = OptimalSchedule{value, loads};
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      loads[i] = static_cast<std::uint32_t>(k);
      self(self, i + 1, left - k, std::max(partial, Rational(b[i] * static_cast<unsigned long>(k))));
    }
  };
  rec(rec, 0, m, Rational(0));
  return *best;
}

// ---------------------------------------------------------------------------
// The four-type mechanism

enum class M4Variant {
  standard,  // special machine last in the B round, first in the L round
  flawed,    // the opposite placement
};

struct M4Params {
  std::size_t n = 4;
  std::size_t m = 4;
  std::vector<Rational> domain;  // B < L < H < T
  M4Variant variant = M4Variant::standard;
};

struct M4Outcome {
  JobAllocation loads;
  std::string line;                 // "outcome1" .. "outcome8", "outcome3.5"
  std::vector<std::string> trace;   // one entry per query actually asked
  bool special_unchanged = false;   // split loop asked nobody, special machine kept
};

inline void check_m4_params(const M4Params& p) {
  if (p.n < 4 || p.n % 2 != 0) throw PreconditionError("n must be even and ≥ 4");
  if (p.m < p.n) throw PreconditionError("m ≥ n required");
  if (p.domain.size() != 4) throw PreconditionError("domain must have exactly four types");
  for (std::size_t k = 1; k < 4; ++k)
    if (!(p.domain[k - 1] < p.domain[k]))
      throw PreconditionError("domain must be strictly increasing (B < L < H < T)");
  if (p.domain[0] < 0) throw PreconditionError("types must be non-negative");
}

namespace detail {

enum : std::size_t { kB = 0, kL = 1, kH = 2, kT = 3 };

/// Answers "is the type of machine i in `yes`?" for a query that the current
/// subdomain does not already decide.
using M4Oracle = std::function<bool(std::size_t machine, TypeSet yes, TypeSet current)>;

class M4Run {
 public:
  M4Run(const M4Params& p, M4Oracle oracle)
      : p_(p), oracle_(std::move(oracle)), sub_(p.n, types::full(4)), alive_(p.n, true) {}

  M4Outcome run() {
    const auto n = p_.n;
    const std::size_t half = (n + 1) / 2;
    std::size_t special = 0;
    std::size_t t = kT;

    // Descending phase: peel machines that admit the largest type.
    for (bool yes = true; yes && count_ > half;) {
      yes = ask(special, types::single(kT));
      if (yes) remove(special++);
    }
    if (count_ > half) t = kH;

    std::optional<std::size_t> last_split;
    std::size_t i = special + 1;
    for (bool high = true; high && count_ > half;) {
      high = !ask(i, types::single(kB) | types::single(kL));
      last_split = i;
      if (high) remove(i++);
    }
    if (count_ > half) {
      t = kL;
      if (last_split)
        special = *last_split;
      else
        out_.special_unchanged = true;
    }

    for (auto j = first_alive(); j && count_ > half; j = next_alive(*j))
      if (!ask(*j, types::single(kB) | types::single(kL))) remove(*j);
    for (auto j = first_alive(); j && count_ > half; j = next_alive(*j))
      if (ask(*j, types::single(kL))) remove(*j);
    if (count_ > half) t = kB;

    // Ascending phase.
    if (count_ > half) {
      even_split();
      out_.line = "outcome1";
    } else if (t < kH) {
      if (auto w = greedy(kB, alive_ids())) {
        all_to(*w, "outcome2");
      } else if (auto j = first_yes(special, types::single(kL))) {
        halves(special, *j, "outcome3");
      } else {
        all_to(special, "outcome3.5");
      }
    } else {
      const bool flawed = p_.variant == M4Variant::flawed;
      if (auto w = greedy(kB, ranked(special, /*last=*/!flawed))) {
        all_to(*w, "outcome4");
      } else if (auto w2 = greedy(kL, ranked(special, /*last=*/flawed))) {
        all_to(*w2, "outcome5");
      } else if (auto j = first_yes(special, types::single(kH))) {
        halves(special, *j, "outcome6");
      } else if (t == kH) {
        all_to(special, "outcome7");
      } else {
        std::size_t other = 0;
        for (auto id : alive_ids())
          if (id != special) {
            other = id;
            break;
          }
        halves(special, other, "outcome8");
      }
    }
    return std::move(out_);
  }

 private:
  bool ask(std::size_t i, TypeSet yes) {
    const TypeSet current = sub_[i];
    bool answer;
    if ((current & yes) == 0)
      answer = false;
    else if ((current & ~yes) == 0)
      answer = true;
    else {
      answer = oracle_(i, yes, current);
      std::string text = "machine " + std::to_string(i + 1) + " in {";
      for (auto k : types::members(yes & current))
        text += std::string(text.back() == '{' ? "" : ",") + to_string(p_.domain[k]);
      out_.trace.push_back(text + "}? " + (answer ? "yes" : "no"));
    }
    sub_[i] = answer ? (current & yes) : (current & ~yes);
    return answer;
  }

  void remove(std::size_t i) {
    alive_[i] = false;
    --count_;
  }
  std::optional<std::size_t> first_alive() const { return next_from(0); }
  std::optional<std::size_t> next_alive(std::size_t i) const { return next_from(i + 1); }
  std::optional<std::size_t> next_from(std::size_t i) const {
    for (; i < p_.n; ++i)
      if (alive_[i]) return i;
    return std::nullopt;
  }
  std::vector<std::size_t> alive_ids() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < p_.n; ++i)
      if (alive_[i]) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> ranked(std::size_t special, bool last) const {
    std::vector<std::size_t> out;
    for (auto id : alive_ids())
      if (id != special) out.push_back(id);
    if (alive_[special]) out.insert(last ? out.end() : out.begin(), special);
    return out;
  }

  /// Round robin over `order`: each machine is asked whether its type is the
  /// smallest one it has not ruled out, as long as that type is <= t.
  std::optional<std::size_t> greedy(std::size_t t, const std::vector<std::size_t>& order) {
    for (bool asked = true; asked;) {
      asked = false;
      for (auto j : order) {
        if (sub_[j] == 0) continue;
        const auto smallest = types::lowest(sub_[j]);
        if (smallest > t) continue;
        asked = true;
        if (ask(j, types::single(smallest))) return j;
      }
    }
    return std::nullopt;
  }

  std::optional<std::size_t> first_yes(std::size_t special, TypeSet yes) {
    for (auto j : alive_ids())
      if (j != special && ask(j, yes)) return j;
    return std::nullopt;
  }

  void even_split() {
    const auto ids = alive_ids();
    out_.loads.assign(p_.n, 0);
    const auto q = p_.m / ids.size();
    const auto r = p_.m % ids.size();
    for (std::size_t k = 0; k < ids.size(); ++k)
      out_.loads[ids[k]] = static_cast<std::uint32_t>(q + (k < r ? 1 : 0));
  }
  void all_to(std::size_t i, const char* line) {
    out_.loads.assign(p_.n, 0);
    out_.loads[i] = static_cast<std::uint32_t>(p_.m);
    out_.line = line;
  }
  void halves(std::size_t special, std::size_t other, const char* line) {
    out_.loads.assign(p_.n, 0);
    out_.loads[special] = static_cast<std::uint32_t>((p_.m + 1) / 2);
    out_.loads[other] = static_cast<std::uint32_t>(p_.m / 2);
    out_.line = line;
  }

  const M4Params& p_;
  M4Oracle oracle_;
  std::vector<TypeSet> sub_;
  std::vector<bool> alive_;
  std::size_t count_ = p_.n;
  M4Outcome out_;
};

struct NeedAnswer {
  std::size_t machine;
  TypeSet yes;
  TypeSet current;
};

inline std::string m4_machine(std::size_t i) { return "m" + std::to_string(i + 1); }

}  // namespace detail

/// Runs the mechanism directly on a truthful profile (domain values).
inline M4Outcome run_m4(const M4Params& p, const Profile& b) {
  check_m4_params(p);
  if (b.size() != p.n) throw Error("profile size does not match n");
  std::vector<std::size_t> idx;
  for (const auto& v : b) {
    auto it = std::find(p.domain.begin(), p.domain.end(), v);
    if (it == p.domain.end()) throw Error("type " + to_string(v) + " is not in the domain");
    idx.push_back(static_cast<std::size_t>(it - p.domain.begin()));
  }
  return detail::M4Run(p, [&](std::size_t i, TypeSet yes, TypeSet) {
           return types::contains(yes, idx[i]);
         }).run();
}

/// Compiles the mechanism into an implementation tree by replaying it with
/// every answer prefix. Leaf ids end in the outcome line that produced them.
inline Mechanism build_m4(const M4Params& p) {
  check_m4_params(p);
  MechanismDraft draft;
  for (std::size_t i = 0; i < p.n; ++i) {
    draft.agents.push_back(detail::m4_machine(i));
    draft.domains[draft.agents.back()] = p.domain;
  }
  const Domain dom(p.domain);
  std::vector<bool> script;
  auto rec = [&](auto&& self, const std::string& id) -> std::string {
    std::size_t pos = 0;
    try {
      auto outcome = detail::M4Run(p, [&](std::size_t i, TypeSet yes, TypeSet current) -> bool {
                       if (pos < script.size()) return script[pos++];
                       throw detail::NeedAnswer{i, yes, current};
                     }).run();
      LeafDraft leaf;
      for (std::size_t i = 0; i < p.n; ++i)
        leaf.alloc[draft.agents[i]] = Rational(static_cast<unsigned long>(outcome.loads[i]));
      const auto leaf_id = id + ":" + outcome.line;
      draft.nodes.emplace_back(leaf_id, std::move(leaf));
      return leaf_id;
    } catch (const detail::NeedAnswer& q) {
      const TypeSet yes = q.yes & q.current;
      const TypeSet no = q.current & ~q.yes;
      const bool yes_is_low = types::lowest(yes) < types::lowest(no);
      const auto slot = draft.nodes.size();
      draft.nodes.emplace_back(id, QueryDraft{});
      script.push_back(yes_is_low);
      auto left = self(self, id + ".l");
      script.back() = !yes_is_low;
      auto right = self(self, id + ".r");
      script.pop_back();
      draft.nodes[slot].second = QueryDraft{draft.agents[q.machine], dom.select(yes_is_low ? yes : no),
                                            dom.select(yes_is_low ? no : yes), left, right};
      return id;
    }
  };
  draft.root = rec(rec, "m4");
  return Mechanism::from_draft(draft);
}

// ---------------------------------------------------------------------------
// Approximation

struct ApproximationRow {
  ProfileId profile = 0;
  Rational mechanism;
  Rational optimum;
  Rational ratio;
};

struct ApproximationReport {
  Rational worst;
  ProfileId worst_profile = 0;
  std::vector<ApproximationRow> rows;  // every profile, in id order
};

/// Worst ratio of mechanism makespan to optimum over the whole profile box.
inline ApproximationReport approximation_ratio(const Mechanism& mech, std::size_t m) {
  ApproximationReport out;
  out.worst = 0;
  const auto leaves = mech.leaf_table();
  for (ProfileId id = 0; id < mech.profile_count(); ++id) {
    const auto& leaf = mech.node(leaves[id]);
    Rational total = 0;
    for (const auto& a : leaf.leaf().alloc) {
      if (a.get_den() != 1) throw PreconditionError("leaf " + leaf.id + " allocates a fractional job");
      total += a;
    }
    if (total != static_cast<long>(m))
      throw PreconditionError("leaf " + leaf.id + " allocation does not sum to m = " + std::to_string(m));
    const auto b = mech.profile(id);
    const auto opt = optimal_makespan(b, m);
    ApproximationRow row{id, makespan(leaf.leaf().alloc, b), opt.value, 0};
    row.ratio = opt.value == 0 ? Rational(row.mechanism == 0 ? 1 : 0) : Rational(row.mechanism / opt.value);
    if (row.ratio > out.worst || id == 0) {
      out.worst = row.ratio;
      out.worst_profile = id;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hard-instance domains

enum class LowerBoundKind { five, four };

struct LowerBoundInstance {
  LowerBoundKind kind = LowerBoundKind::five;
  std::size_t n = 0;
  std::size_t m = 0;
  Rational factor;  // every type exceeds factor * previous type
  std::vector<Rational> domain;

  bool satisfies_gaps() const {
    for (std::size_t k = 1; k < domain.size(); ++k)
      if (!(domain[k] > factor * domain[k - 1])) return false;
    return domain.size() == (kind == LowerBoundKind::five ? 5U : 4U);
  }
};

/// Smallest positive integer domain with each type above factor times the
/// previous one: factor n^2 with m = n for five types; factor m*n with
/// m = (n/2 + 1) n for four types.
inline LowerBoundInstance lower_bound_domain(std::size_t n, LowerBoundKind kind) {
  LowerBoundInstance out;
  out.kind = kind;
  out.n = n;
  std::size_t count;
  if (kind == LowerBoundKind::five) {
    if (n < 2) throw PreconditionError("n must be at least 2");
    out.m = n;
    out.factor = Rational(static_cast<unsigned long>(n * n));
    count = 5;
  } else {
    if (n < 4 || n % 2 != 0) throw PreconditionError("n must be even and ≥ 4");
    out.m = (n / 2 + 1) * n;
    out.factor = Rational(static_cast<unsigned long>(out.m * n));
    count = 4;
  }
  out.domain.push_back(Rational(1));
  while (out.domain.size() < count) out.domain.push_back(out.factor * out.domain.back() + 1);
  return out;
}

// ---------------------------------------------------------------------------
// Anchor cycles

struct AnchorCycle {
  CycleWitness cycle;
  PivotReport pivot;
  Rational label_gap;  // y - x
  Rational type_gap;   // b2 - b1
};

/// Every four-hop cycle through an antimonotone pair and a pair of anchors,
/// one per (node, pair, labels, anchor types), in tree preorder.
inline std::vector<AnchorCycle> anchor_cycles(const Mechanism& m, const OspGraph& g) {
  const auto i = g.agent();
  std::vector<AnchorCycle> out;
  for (NodeIndex u = 0; u < m.node_count(); ++u) {
    const auto& node = m.node(u);
    if (node.is_leaf() || node.query().agent == i) continue;
    for (const auto& base : find_antimonotone_pairs(m, i, u))
      for (const auto& y : base.label_hi)
        for (const auto& x : base.label_lo) {
          if (!(y > x)) continue;
          for (auto& r : find_pivots(m, with_labels(m, base, y, x))) {
            if (!r.is_anchor()) continue;
            // The closest buddies are exactly z = y and q = x here.
            auto pick = [&](const std::vector<ProfileId>& s, NodeIndex at, const Rational& value) {
              for (auto v : s)
                if (g.outcome(v) == value && m.compatible(v, at)) return v;
              throw Error("internal: anchor buddy missing");
            };
            const auto s1 = r.y_buddies.front();
            const auto s3 = r.x_buddies.front();
            const auto s2 = pick(r.q_buddies, r.v_down, r.q);
            const auto s4 = pick(r.z_buddies, r.v_up, r.z);
            auto cycle = make_cycle(g, {s1, s2, s3, s4});
            AnchorCycle a{std::move(cycle), r, r.y - r.x, r.b2 - r.b1};
            if (a.cycle.weight != a.label_gap * a.type_gap)
              throw Error("internal: anchor cycle weight does not factor");
            out.push_back(std::move(a));
          }
        }
  }
  return out;
}

/// A negative anchor cycle of agent i's graph, or nullopt when none exists.
inline std::optional<AnchorCycle> anchors_cycle_demo(const Mechanism& m, AgentIndex i,
                                                     const GraphLimits& limits = {}) {
  const auto g = OspGraph::build(m, i, limits);
  auto all = anchor_cycles(m, g);
  if (all.empty()) return std::nullopt;
  return std::move(all.front());
}

}  // namespace ospkit
