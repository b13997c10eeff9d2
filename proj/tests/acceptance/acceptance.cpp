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


// Acceptance run: one [PASS]/[FAIL] line per criterion. Exit status is the
// number of failed criteria. Seeds, sample sizes and time limits are fixed
// here and must not be relaxed to make a criterion pass.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "ospkit/ospkit.hpp"
#include "support/generators.hpp"

namespace {

using namespace ospkit;
using ospkit::testing::GenConfig;
using ospkit::testing::MechanismGenerator;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kAc1Mechanisms = 500;
constexpr double kAc1Seconds = 60.0;
constexpr std::size_t kAc1CycleLength = 6;
constexpr double kAc2Seconds = 10.0;
constexpr std::size_t kAc5Mechanisms = 200;
constexpr std::size_t kAc5MaxAttempts = 2'000'000;
constexpr std::size_t kAc6Mechanisms = 500;
constexpr std::size_t kAc7RandomCases = 10'000;
constexpr int kAc7GridMax = 3;
constexpr std::size_t kAc7GridLength = 4;
constexpr std::size_t kAc7GraphMechanisms = 3000;
constexpr std::size_t kAc7GraphCycleLength = 5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool all_cmon(const Mechanism& m) {
  for (AgentIndex i = 0; i < m.agent_count(); ++i)
    if (!check_cmon(OspGraph::build(m, i)).ok) return false;
  return true;
}

Outcome ac1() {
  const auto t0 = Clock::now();
  MechanismGenerator gen(0xA11CE, GenConfig{2, 3, 6, 0.2, false, 3, false});
  std::size_t agree = 0, total = 0, negative = 0;
  for (std::size_t k = 0; k < kAc1Mechanisms; ++k) {
    const auto m = gen.next();
    for (AgentIndex i = 0; i < m.agent_count(); ++i) {
      const auto g = OspGraph::build(m, i);
      const bool bf = check_cmon(g).ok;
      const auto best = enumerate_cycles_oracle(g, kAc1CycleLength);
      const bool oracle = !best || *best >= 0;
      ++total;
      negative += bf ? 0 : 1;
      agree += bf == oracle ? 1 : 0;
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream s;
  s << agree << "/" << total << " agent graphs agree (" << negative << " non-CMON), " << secs << " s";
  return {agree == total && secs < kAc1Seconds, s.str()};
}

M4Params m4_params(std::size_t n, std::size_t m) {
  M4Params p;
  p.n = n;
  p.m = m;
  p.domain = {Rational(1), Rational(3), Rational(10), Rational(35)};
  return p;
}

Outcome ac2() {
  const auto t0 = Clock::now();
  const auto mech = build_m4(m4_params(4, 4));
  std::size_t pass = 0;
  for (AgentIndex i = 0; i < 4; ++i) {
    const auto g = OspGraph::build(mech, i);
    if (g.vertex_count() == 256 && check_cmon(g).ok) ++pass;
  }
  const double secs = seconds_since(t0);
  std::ostringstream s;
  s << pass << "/4 agents CMON over 256 profiles, " << secs << " s";
  return {pass == 4 && secs < kAc2Seconds, s.str()};
}

Outcome ac3() {
  std::ostringstream s;
  bool ok = true;
  for (auto [n, bound] : {std::pair<std::size_t, long>{4, 3}, {6, 4}}) {
    const auto p = m4_params(n, n);
    const auto& d = p.domain;
    const Rational nn(static_cast<long>(n));
    const bool conditions = d[0] < nn * d[1] && d[1] < nn * d[2] && d[2] < nn * d[3];
    const auto r = approximation_ratio(build_m4(p), p.m);
    ok = ok && conditions && r.worst <= Rational(bound) && r.rows.size() == (n == 4 ? 256U : 4096U);
    s << (n == 4 ? "" : "; ") << "n=" << n << ": worst " << to_string(r.worst) << " <= " << bound;
  }
  return {ok, s.str()};
}

Outcome ac4() {
  const auto m = load_mechanism(OSPKIT_FIXTURES "/anchor.json");
  const auto i = m.require_agent("i");
  const auto g = OspGraph::build(m, i);
  const auto anchors = anchor_cycles(m, g);
  bool found = false;
  for (const auto& a : anchors)
    if (a.pivot.y == 3 && a.pivot.x == 1 && a.pivot.b1 == 5 && a.pivot.b2 == 2 && a.cycle.length() == 4 &&
        a.cycle.weight == Rational(-6) && a.cycle.weight == (a.pivot.y - a.pivot.x) * (a.pivot.b2 - a.pivot.b1))
      found = true;
  const auto c = check_cmon(g);
  const bool witness = !c.ok && c.witness && c.witness->weight <= Rational(-6);
  std::ostringstream s;
  s << "anchor 4-cycle " << (found ? "weighs -6" : "missing") << "; check_cmon witness weight "
    << (c.witness ? to_string(c.witness->weight) : std::string("none"));
  return {found && witness, s.str()};
}

Outcome ac5() {
  MechanismGenerator gen(0x5EED5, GenConfig{2, 3, 5, 0.3, false, 1, false});
  std::size_t accepted = 0, attempts = 0, ordered = 0, agree = 0, cmon = 0;
  while (accepted < kAc5Mechanisms && attempts < kAc5MaxAttempts) {
    ++attempts;
    const auto m = gen.next();
    bool has_unordered = false;
    for (NodeIndex u = 0; u < m.node_count() && !has_unordered; ++u)
      has_unordered = !m.node(u).is_leaf() && !is_ordered_query(m, u).ordered;
    if (!has_unordered || !all_cmon(m)) continue;
    ++accepted;
    const auto t = order_transform(m).mechanism;
    bool all_ordered = true;
    for (NodeIndex u = 0; u < t.node_count(); ++u)
      all_ordered = all_ordered && (t.node(u).is_leaf() || is_ordered_query(t, u).ordered);
    ordered += all_ordered ? 1 : 0;
    bool same = true;
    for (ProfileId id = 0; id < m.profile_count(); ++id) {
      const auto p = m.profile(id);
      same = same && m.evaluate(p).alloc == t.evaluate(p).alloc;
    }
    agree += same ? 1 : 0;
    cmon += all_cmon(t) ? 1 : 0;
  }
  std::ostringstream s;
  s << accepted << " OSP mechanisms with a non-ordered query (" << attempts << " drawn): " << ordered
    << " ordered, " << agree << " evaluation-equal, " << cmon << " CMON";
  return {accepted == kAc5Mechanisms && ordered == accepted && agree == accepted && cmon == accepted, s.str()};
}

Outcome ac6() {
  // Shallower trees keep a fair share of OSP mechanisms in the sample.
  MechanismGenerator gen(0x7E5, GenConfig{2, 4, 6, 0.5, true, 2, false});
  std::size_t agree = 0, osp = 0;
  for (std::size_t k = 0; k < kAc6Mechanisms; ++k) {
    const auto m = gen.next();
    const bool a = classify_three_way(m).three_way;
    const bool b = all_cmon(m);
    osp += b ? 1 : 0;
    agree += a == b ? 1 : 0;
  }
  std::ostringstream s;
  s << agree << "/" << kAc6Mechanisms << " agree (" << osp << " OSP)";
  return {agree == kAc6Mechanisms, s.str()};
}

// -- AC7 --------------------------------------------------------------------

void grid_sequences(std::size_t len, const std::function<void(const ProfileSequence&)>& fn) {
  ProfileSequence s(len);
  const int side = kAc7GridMax + 1;
  std::size_t total = 1;
  for (std::size_t k = 0; k < len; ++k) total *= static_cast<std::size_t>(side * side);
  for (std::size_t code = 0; code < total; ++code) {
    auto c = code;
    for (auto& p : s) {
      p.type = static_cast<long>(c % side);
      c /= side;
      p.outcome = static_cast<long>(c % side);
      c /= side;
    }
    fn(s);
  }
}

Rational random_rational(std::mt19937_64& rng) {
  // Numerators 0..100 over denominators 1..10.
  std::uniform_int_distribution<long> num(0, 100), den(1, 10);
  return rational(num(rng), den(rng));
}

SeqPoint random_point(std::mt19937_64& rng) { return {random_rational(rng), random_rational(rng), std::nullopt}; }

// A point on the requested side of (anchor type, cap outcome).
SeqPoint point_beside(std::mt19937_64& rng, const Rational& type, const Rational& outcome, bool below) {
  const Rational dt = random_rational(rng) / 10, df = random_rational(rng) / 10;
  return below ? SeqPoint{type + dt, outcome - df, std::nullopt} : SeqPoint{type - dt, outcome + df, std::nullopt};
}

std::string sequence_text(const ProfileSequence& s) {
  std::string out;
  for (const auto& p : s) out += "(" + to_string(p.type) + "," + to_string(p.outcome) + ")";
  return out;
}

// Certificates seen for one lemma, split by whether the sequence also lies in
// the monotone scope where the inequality is proven.
struct LemmaTally {
  std::size_t checked = 0, violations = 0, scoped = 0, scoped_violations = 0;
  std::string first;

  void add(const ProfileSequence& s, const Certificate& c, bool in_scope, const std::string& extra = {}) {
    ++checked;
    if (in_scope) ++scoped;
    if (c.holds()) return;
    ++violations;
    if (in_scope) ++scoped_violations;
    if (first.empty()) first = sequence_text(s) + extra + " slack " + to_string(c.slack);
  }
};

// Every negative simple cycle of g up to max_len hops, each expanded at every
// admissible hop and midpoint.
void graph_expansions(const OspGraph& g, std::size_t max_len, std::size_t& count, std::size_t& bad) {
  std::vector<ProfileId> path;
  std::vector<char> on_path(g.vertex_count(), 0);
  std::function<void(ProfileId)> extend = [&](ProfileId v) {
    for (auto w : g.successors(v)) {
      if (w == path.front() && path.size() >= 2) {
        const auto c = make_cycle(g, path);
        if (!(c.weight < 0)) continue;
        for (std::size_t h = 0; h < path.size(); ++h) {
          const auto x = path[h], z = path[(h + 1) % path.size()];
          if (!(g.outcome(x) <= g.outcome(z))) continue;
          for (auto mid : g.successors(x)) {
            if (mid == z || !g.has_edge(mid, z) || !(g.type(x) >= g.type(mid) && g.type(mid) >= g.type(z)))
              continue;
            const auto out = expand_path(g, c, h, mid);
            ++count;
            if (c.weight - out.weight != (g.outcome(z) - g.outcome(mid)) * (g.type(x) - g.type(mid))) ++bad;
          }
        }
      } else if (w > path.front() && !on_path[w] && path.size() < max_len) {
        on_path[w] = 1;
        path.push_back(w);
        extend(w);
        path.pop_back();
        on_path[w] = 0;
      }
    }
  };
  for (ProfileId v = 0; v < g.vertex_count(); ++v) {
    path = {v};
    on_path[v] = 1;
    extend(v);
    on_path[v] = 0;
  }
}

Outcome ac7() {
  LemmaTally reduce, replace;
  std::size_t expand_checked = 0, expand_bad = 0;
  auto check_reduce = [&](const ProfileSequence& s) {
    const auto r = is_good_sequence(s);
    if (r.good) reduce.add(s, reduce_path(s), r.monotone_runs);
  };
  auto check_replace = [&](const ProfileSequence& s, const SeqPoint& d) {
    const auto side = replacement_side(s, d);
    if (!side) return false;
    replace.add(s, replace_path(s, d), replacement_monotone(s, *side),
                " via (" + to_string(d.type) + "," + to_string(d.outcome) + ")");
    return true;
  };
  // Exhaustive grid. Replacement needs at least one interior profile.
  for (std::size_t len = 2; len <= kAc7GridLength; ++len)
    grid_sequences(len, [&](const ProfileSequence& s) {
      check_reduce(s);
      if (len >= 3)
        for (long t = 0; t <= kAc7GridMax; ++t)
          for (long f = 0; f <= kAc7GridMax; ++f) check_replace(s, {Rational(t), Rational(f), std::nullopt});
      // Inserting b between the first two points of the closed sequence.
      if (len >= 3) {
        ProfileSequence closed(s.begin(), s.end() - 1);
        closed.push_back(closed.front());
        ProfileSequence shorter(closed);
        shorter.erase(shorter.begin() + 1);
        ++expand_checked;
        if (seq_weight(shorter) - seq_weight(closed) != expansion_delta(closed[0], closed[1], closed[2]))
          ++expand_bad;
      }
    });
  // Random rational cases, built to satisfy each lemma's hypotheses.
  std::mt19937_64 rng(0x1209);
  std::uniform_int_distribution<int> interior(1, 4), coin(0, 1);
  std::size_t construction_bad = 0;
  for (std::size_t k = 0; k < kAc7RandomCases; ++k) {
    const auto a = random_point(rng), c = random_point(rng);
    ProfileSequence s{a};
    const int len = interior(rng);
    for (int j = 0; j < len; ++j) s.push_back(point_beside(rng, a.type, c.outcome, coin(rng) == 1));
    s.push_back(c);
    if (!is_good_sequence(s).good) ++construction_bad;
    check_reduce(s);
  }
  for (std::size_t k = 0; k < kAc7RandomCases; ++k) {
    const auto a = random_point(rng), c = random_point(rng);
    const bool below = coin(rng) == 1;
    const auto d = point_beside(rng, a.type, c.outcome, below);
    ProfileSequence s{a};
    const int len = interior(rng);
    for (int j = 0; j < len; ++j) s.push_back(point_beside(rng, d.type, d.outcome, below));
    s.push_back(c);
    if (!check_replace(s, d)) ++construction_bad;
  }
  for (std::size_t k = 0; k < kAc7RandomCases; ++k) {
    ProfileSequence closed;
    const int len = interior(rng) + 1;
    for (int j = 0; j < len; ++j) closed.push_back(random_point(rng));
    const auto b = random_point(rng);
    closed.push_back(closed.front());
    ProfileSequence longer(closed);
    longer.insert(longer.begin() + 1, b);
    ++expand_checked;
    if (seq_weight(closed) - seq_weight(longer) != expansion_delta(closed[0], b, closed[1])) ++expand_bad;
  }
  // expand_path on real 2CMON graphs that still have negative cycles.
  MechanismGenerator gen(0xE4A, GenConfig{2, 4, 6, 0.2, false, 1, false});
  std::size_t graph_count = 0;
  for (std::size_t k = 0; k < kAc7GraphMechanisms; ++k) {
    const auto m = gen.next();
    for (AgentIndex i = 0; i < m.agent_count(); ++i) {
      const auto g = OspGraph::build(m, i);
      if (check_2cmon(g).ok && !check_cmon(g).ok) graph_expansions(g, kAc7GraphCycleLength, graph_count, expand_bad);
    }
  }
  std::ostringstream s;
  s << "reduction " << reduce.violations << "/" << reduce.checked << " negative";
  if (!reduce.first.empty()) s << " (e.g. " << reduce.first << ")";
  s << ", monotone runs " << reduce.scoped_violations << "/" << reduce.scoped << "; replacement "
    << replace.violations << "/" << replace.checked << " negative";
  if (!replace.first.empty()) s << " (e.g. " << replace.first << ")";
  s << ", monotone interior " << replace.scoped_violations << "/" << replace.scoped << "; expansion "
    << expand_bad << " mismatches in " << expand_checked << " abstract + " << graph_count << " graph";
  if (construction_bad) s << "; " << construction_bad << " random cases missed their hypotheses";
  return {reduce.violations == 0 && replace.violations == 0 && expand_bad == 0 && construction_bad == 0 &&
              graph_count > 0,
          s.str()};
}

Outcome ac8() {
  auto p = m4_params(4, 4);
  p.variant = M4Variant::flawed;
  const auto mech = build_m4(p);
  const bool non_osp = !all_cmon(mech);
  std::optional<AnchorCycle> demo;
  for (AgentIndex i = 0; i < mech.agent_count() && !demo; ++i) demo = anchors_cycle_demo(mech, i);
  const Rational expected = (p.domain[1] - p.domain[2]) * static_cast<long>(p.m);
  std::ostringstream s;
  s << "flawed variant " << (non_osp ? "not OSP" : "OSP") << "; anchor cycle "
    << (demo ? to_string(demo->cycle.weight) : std::string("none")) << " vs (L-H)m = " << to_string(expected);
  return {non_osp && demo && demo->cycle.length() == 4 && demo->cycle.weight == expected &&
              demo->cycle.weight == demo->label_gap * demo->type_gap,
          s.str()};
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"AC1 check_cmon agrees with cycle enumeration", ac1},
      {"AC2 M4 is CMON for every agent", ac2},
      {"AC3 M4 approximation within n/2+1", ac3},
      {"AC4 anchor 4-cycle weight", ac4},
      {"AC5 order_transform round trip", ac5},
      {"AC6 three-way classification equals CMON", ac6},
      {"AC7 ironing certificates", ac7},
      {"AC8 flawed M4 anchor cycle", ac8},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
  }
  return failed;
}
