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

// JSON renderings of verdicts, witnesses and certificates.

#include <string>

#include "ospkit/io.hpp"
#include "ospkit/ironing.hpp"
#include "ospkit/scheduling.hpp"
#include "ospkit/three_way.hpp"

namespace ospkit {

inline Json profile_json(const Mechanism& m, ProfileId id) {
  Json out = Json::object();
  const auto p = m.profile(id);
  for (std::size_t a = 0; a < p.size(); ++a) out[m.agents()[a]] = to_string(p[a]);
  return out;
}

inline Json profile_json(const OspGraph& g, ProfileId id) {
  Json out = Json::object();
  const auto p = g.profile(id);
  for (std::size_t a = 0; a < p.size(); ++a) out[g.agents()[a]] = to_string(p[a]);
  return out;
}

inline Json types_json(const Domain& d, TypeSet s) { return rationals_json(d.select(s)); }

inline Json to_json(const OspGraph& g, const CycleWitness& c) {
  Json hops = Json::array();
  for (std::size_t j = 0; j < c.profiles.size(); ++j)
    hops.push_back({{"from", profile_json(g, c.profiles[j])},
                    {"to", profile_json(g, c.profiles[(j + 1) % c.profiles.size()])},
                    {"weight", to_string(c.hop_weights[j])},
                    {"node", c.hop_nodes[j]}});
  return {{"agent", g.agent_name()}, {"length", c.length()}, {"weight", to_string(c.weight)},
          {"hops", std::move(hops)}};
}

inline Json to_json(const Certificate& c) {
  return {{"lhs", to_string(c.lhs)}, {"rhs", to_string(c.rhs)}, {"slack", to_string(c.slack)}};
}

inline Json to_json(const OspGraph& g, const MinimizedWitness& w) {
  Json steps = Json::array();
  for (const auto& s : w.steps) {
    Json j = {{"kind", s.kind == IroningStep::Kind::shortcut ? "shortcut" : "replacement"},
              {"start", s.start},
              {"hops", s.hops},
              {"certificate", to_json(s.certificate)}};
    if (s.via) j["via"] = profile_json(g, *s.via);
    steps.push_back(std::move(j));
  }
  return {{"cycle", to_json(g, w.cycle)}, {"steps", std::move(steps)}};
}

inline Json to_json(const OspGraph& g, const AnatomyQuad& q) {
  return {{"b0", profile_json(g, q.b0)},
          {"b1", profile_json(g, q.b1)},
          {"b2", profile_json(g, q.b2)},
          {"b3", profile_json(g, q.b3)}};
}

inline Json to_json(const OspGraph& g, const TwoCycleReport& r) {
  Json j = {{"ok", r.ok}};
  if (r.witness) {
    j["pair"] = Json::array({profile_json(g, r.witness->first), profile_json(g, r.witness->second)});
    j["weight"] = to_string(r.weight);
  }
  return j;
}

inline Json to_json(const Mechanism& m, const PivotReport& r) {
  Json j = {{"node", m.node(r.node).id},
            {"agent", m.agents()[r.agent]},
            {"b1", to_string(r.b1)},
            {"b2", to_string(r.b2)},
            {"y", to_string(r.y)},
            {"x", to_string(r.x)},
            {"bu", to_string(r.bu)},
            {"bd", to_string(r.bd)},
            {"v_up", m.node(r.v_up).id},
            {"v_down", m.node(r.v_down).id},
            {"z", to_string(r.z)},
            {"q", to_string(r.q)},
            {"Delta", to_string(r.up_gap)},
            {"Lambda", to_string(r.down_gap)},
            {"delta", to_string(r.gap)},
            {"verdict", to_string(r.verdict)},
            {"minimum", to_string(r.minimum)},
            {"inequality_holds", r.inequality_holds},
            {"direct_cycle_weight", to_string(r.direct_cycle_weight())}};
  if (r.negative_cycle) j["negative_cycle_weight"] = to_string(r.negative_cycle->weight);
  return j;
}

inline Json to_json(const Mechanism& m, const ThreeWayReport& r) {
  Json queries = Json::array();
  for (const auto& [u, q] : r.queries) {
    Json e = {{"node", m.node(u).id}, {"ordered", q.ordered}};
    if (q.violating)
      e["violating"] = Json::array({to_string(q.violating->first), to_string(q.violating->second)});
    if (!q.reason.empty()) e["reason"] = q.reason;
    queries.push_back(std::move(e));
  }
  Json pivots = Json::array();
  for (const auto& p : r.pivots) pivots.push_back(to_json(m, p));
  Json j = {{"three_way_greedy", r.three_way}, {"queries", std::move(queries)},
            {"pivots", std::move(pivots)}};
  if (r.first_violation) j["first_violation"] = *r.first_violation;
  return j;
}

inline Json to_json(const Mechanism& m, const ApproximationReport& r) {
  return {{"worst_ratio", to_string(r.worst)},
          {"worst_profile", profile_json(m, r.worst_profile)},
          {"profiles", r.rows.size()}};
}

/// CSV with one row per profile: types, mechanism makespan, optimum, ratio.
inline std::string approximation_csv(const Mechanism& m, const ApproximationReport& r) {
  std::string out;
  for (const auto& a : m.agents()) out += a + ",";
  out += "makespan,optimum,ratio\n";
  for (const auto& row : r.rows) {
    for (const auto& t : m.profile(row.profile)) out += to_string(t) + ",";
    out += to_string(row.mechanism) + "," + to_string(row.optimum) + "," + to_string(row.ratio) + "\n";
  }
  return out;
}

}  // namespace ospkit
