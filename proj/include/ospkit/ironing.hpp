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

// Weight algebra on abstract profile sequences and the three rewrites used
// to shorten negative cycles: expansion, reduction and replacement. Each
// rewrite is a certificate that evaluates both sides instead of trusting the
// inequality.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ospkit/osp_graph.hpp"

namespace ospkit {

/// One element of a sequence: the agent's type and its outcome there.
struct SeqPoint {
  Rational type;
  Rational outcome;
  std::optional<ProfileId> profile;
};

using ProfileSequence = std::vector<SeqPoint>;

inline SeqPoint seq_point(const OspGraph& g, ProfileId v) {
  return {g.type(v), g.outcome(v), v};
}

inline ProfileSequence to_sequence(const OspGraph& g, std::span<const ProfileId> profiles) {
  ProfileSequence s;
  for (auto v : profiles) s.push_back(seq_point(g, v));
  return s;
}

/// Sum over consecutive pairs of x^j_type * (f(x^{j+1}) - f(x^j)).
inline Rational seq_weight(std::span<const SeqPoint> s) {
  if (s.size() < 2) throw PreconditionError("sequence weight needs at least two profiles");
  Rational total = 0;
  for (std::size_t j = 0; j + 1 < s.size(); ++j)
    total += s[j].type * (s[j + 1].outcome - s[j].outcome);
  return total;
}

/// Decrease in weight when the step a -> c is routed through b.
inline Rational expansion_delta(const SeqPoint& a, const SeqPoint& b, const SeqPoint& c) {
  return Rational((c.outcome - b.outcome) * (a.type - b.type));
}

/// Both sides of a weight inequality lhs >= rhs.
struct Certificate {
  Rational lhs;
  Rational rhs;
  Rational slack;  // lhs - rhs

  bool holds() const { return slack >= 0; }
};

inline Certificate make_certificate(Rational lhs, Rational rhs) {
  Rational slack = lhs - rhs;
  return {std::move(lhs), std::move(rhs), std::move(slack)};
}

// -- expansion ---------------------------------------------------------------

/// Replaces hop `hop` (a -> c) of a negative cycle by a -> mid -> c.
/// The caller guarantees the graph is 2CMON; local conditions are checked.
inline CycleWitness expand_path(const OspGraph& g, const CycleWitness& c, std::size_t hop,
                                ProfileId mid) {
  const auto k = c.profiles.size();
  if (hop >= k) throw PreconditionError("hop index out of range");
  const auto a = c.profiles[hop];
  const auto z = c.profiles[(hop + 1) % k];
  if (!(c.weight < 0)) throw PreconditionError("expansion needs a negative cycle");
  if (!(g.outcome(a) <= g.outcome(z)))
    throw PreconditionError("expansion needs f(a) <= f(c) on the replaced hop");
  if (!g.has_edge(a, mid)) throw PreconditionError("expansion needs edge (a,b)");
  if (!g.has_edge(mid, z)) throw PreconditionError("expansion needs edge (b,c)");
  if (!(g.type(a) >= g.type(mid) && g.type(mid) >= g.type(z)))
    throw PreconditionError("expansion needs a_i >= b_i >= c_i");
  std::vector<ProfileId> walk(c.profiles.begin(), c.profiles.end());
  walk.insert(walk.begin() + static_cast<std::ptrdiff_t>(hop + 1), mid);
  auto out = make_cycle(g, std::move(walk));
  const Rational delta = expansion_delta(seq_point(g, a), seq_point(g, mid), seq_point(g, z));
  if (c.weight - out.weight != delta)
    throw Error("internal: expansion changed the weight by an unexpected amount");
  if (out.weight > c.weight)
    throw PreconditionError("expansion increased the weight; the graph is not 2CMON");
  return out;
}

// -- reduction ---------------------------------------------------------------

struct ClauseTags {
  bool below = false;  // a <= b and f(c) >= f(b)
  bool above = false;  // a >= b and f(c) <= f(b)
};

struct GoodSequenceReport {
  bool good = true;
  std::vector<ClauseTags> tags;       // one per interior element
  std::vector<std::size_t> swings;    // interior j whose clause differs from j + 1
  // Some choice of clause per element makes every maximal same-clause run
  // monotone: non-decreasing types under `below`, non-increasing under
  // `above`. Only then is the reduction inequality guaranteed.
  bool monotone_runs = true;
};

/// Interior elements all satisfy one of the two clauses relative to the
/// endpoints. Sequences without interior are vacuously good.
inline GoodSequenceReport is_good_sequence(std::span<const SeqPoint> s) {
  if (s.size() < 2) throw PreconditionError("sequence needs two endpoints");
  const auto& a = s.front();
  const auto& c = s.back();
  GoodSequenceReport r;
  for (std::size_t j = 1; j + 1 < s.size(); ++j) {
    ClauseTags t{a.type <= s[j].type && c.outcome >= s[j].outcome,
                 a.type >= s[j].type && c.outcome <= s[j].outcome};
    if (!t.below && !t.above) r.good = false;
    r.tags.push_back(t);
  }
  for (std::size_t j = 0; j + 1 < r.tags.size(); ++j) {
    const auto& x = r.tags[j];
    const auto& y = r.tags[j + 1];
    if ((x.below && !x.above && y.above && !y.below) || (x.above && !x.below && y.below && !y.above))
      r.swings.push_back(j);
  }
  // can[c]: element j may take clause c (0 below, 1 above) with runs so far monotone.
  bool can[2] = {true, true};
  for (std::size_t j = 0; j < r.tags.size(); ++j) {
    const bool has[2] = {r.tags[j].below, r.tags[j].above};
    bool next[2];
    for (int c = 0; c < 2; ++c) {
      if (!has[c]) {
        next[c] = false;
      } else if (j == 0 || can[1 - c]) {
        next[c] = true;
      } else {
        const auto& prev = s[j].type;
        const auto& cur = s[j + 1].type;
        next[c] = can[c] && (c == 0 ? prev <= cur : prev >= cur);
      }
    }
    can[0] = next[0];
    can[1] = next[1];
  }
  r.monotone_runs = r.good && (can[0] || can[1]);
  return r;
}

/// Both sides of "a good sequence weighs at least its direct step a -> c".
/// The slack is evaluated, not assumed: it can be negative when the
/// interior zig-zags (see GoodSequenceReport::monotone_runs).
inline Certificate reduce_path(std::span<const SeqPoint> s) {
  if (!is_good_sequence(s).good) throw PreconditionError("sequence is not good");
  const SeqPoint ends[] = {s.front(), s.back()};
  return make_certificate(seq_weight(s), seq_weight(ends));
}

// -- replacement -------------------------------------------------------------

/// Which side d sits on (true: below, i.e. a <= d <= b^j), if it is a valid
/// replacement point for s.
inline std::optional<bool> replacement_side(std::span<const SeqPoint> s, const SeqPoint& d) {
  const auto& a = s.front();
  const auto& c = s.back();
  bool below = a.type <= d.type && c.outcome >= d.outcome;
  bool above = a.type >= d.type && c.outcome <= d.outcome;
  for (std::size_t j = 1; j + 1 < s.size(); ++j) {
    below = below && d.type <= s[j].type && d.outcome >= s[j].outcome;
    above = above && d.type >= s[j].type && d.outcome <= s[j].outcome;
  }
  if (below) return true;
  if (above) return false;
  return std::nullopt;
}

/// Interior types sorted in the direction of the replacement side; the
/// replacement inequality is guaranteed under this extra condition.
inline bool replacement_monotone(std::span<const SeqPoint> s, bool below) {
  for (std::size_t j = 2; j + 1 < s.size(); ++j)
    if (below ? s[j].type < s[j - 1].type : s[j].type > s[j - 1].type) return false;
  return true;
}

/// Both sides of "s weighs at least the two-step sequence a -> d -> c".
/// Evaluated, not assumed; see replacement_monotone.
inline Certificate replace_path(std::span<const SeqPoint> s, const SeqPoint& d) {
  if (s.size() < 3) throw PreconditionError("replacement needs at least one interior profile");
  if (d.profile && (d.profile == s.front().profile || d.profile == s.back().profile))
    throw PreconditionError("replacement point must differ from both endpoints");
  if (!replacement_side(s, d))
    throw PreconditionError("replacement point is not between the endpoints and the interior");
  const SeqPoint path[] = {s.front(), d, s.back()};
  return make_certificate(seq_weight(s), seq_weight(path));
}

// -- witness minimization ----------------------------------------------------

struct IroningStep {
  enum class Kind { shortcut, replacement } kind = Kind::shortcut;
  std::size_t start = 0;  // position of a in the cycle before the step
  std::size_t hops = 0;   // hops of the replaced subpath
  std::optional<ProfileId> via;
  Certificate certificate;
};

struct MinimizedWitness {
  CycleWitness cycle;
  std::vector<IroningStep> steps;
};

namespace detail {

inline std::vector<ProfileId> splice(const std::vector<ProfileId>& p, std::size_t start,
                                     std::size_t hops, std::optional<ProfileId> via) {
  const auto k = p.size();
  // Keeps c -> ... -> a, then the optional replacement point back to c.
  std::vector<ProfileId> out;
  for (std::size_t j = 0; j <= k - hops; ++j) out.push_back(p[(start + hops + j) % k]);
  if (via) out.push_back(*via);
  return out;
}

}  // namespace detail

/// Shortens a negative cycle with checked shortcut and replacement rewrites
/// until none applies. Longer subpaths are tried first; shortcuts before
/// replacements.
inline MinimizedWitness minimize_witness(const OspGraph& g, const CycleWitness& c) {
  if (!(c.weight < 0)) throw PreconditionError("witness is not a negative cycle");
  MinimizedWitness out{c, {}};
  bool changed = true;
  while (changed) {
    changed = false;
    const auto& p = out.cycle.profiles;
    const auto k = p.size();
    std::vector<char> on_cycle(g.vertex_count(), 0);
    for (auto v : p) on_cycle[v] = 1;
    for (std::size_t hops = k - 1; hops >= 2 && !changed; --hops) {
      for (int pass = 0; pass < 2 && !changed; ++pass) {
        if (pass == 1 && hops < 3) break;
        for (std::size_t start = 0; start < k && !changed; ++start) {
          std::vector<ProfileId> sub;
          for (std::size_t j = 0; j <= hops; ++j) sub.push_back(p[(start + j) % k]);
          const auto seq = to_sequence(g, sub);
          const auto a = sub.front();
          const auto z = sub.back();
          std::optional<ProfileId> via;
          std::optional<Certificate> cert;
          if (pass == 0) {
            if (a == z || !g.has_edge(a, z) || !is_good_sequence(seq).monotone_runs) continue;
            cert = reduce_path(seq);
          } else {
            for (auto d : g.successors(a)) {
              if (on_cycle[d] || !g.has_edge(d, z)) continue;
              const auto side = replacement_side(seq, seq_point(g, d));
              if (!side || !replacement_monotone(seq, *side)) continue;
              via = d;
              cert = replace_path(seq, seq_point(g, d));
              break;
            }
            if (!via) continue;
          }
          if (!cert->holds()) throw Error("internal: ironing certificate has negative slack");
          auto next = make_cycle(g, detail::splice(p, start, hops, via));
          if (!(next.weight < 0) || next.weight > out.cycle.weight ||
              next.weight != out.cycle.weight - cert->slack)
            throw Error("internal: ironing rewrite broke the cycle weight");
          out.steps.push_back({pass == 0 ? IroningStep::Kind::shortcut
                                         : IroningStep::Kind::replacement,
                               start, hops, via, *cert});
          out.cycle = std::move(next);
          changed = true;
        }
      }
    }
  }
  return out;
}

}  // namespace ospkit
