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

// Command-line front end. Exit codes: 0 all verdicts pass, 1 a verdict
// failed, 2 invalid input or usage.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ospkit/ospkit.hpp"

namespace ospkit::cli {

inline constexpr int kPass = 0;
inline constexpr int kFail = 1;
inline constexpr int kInvalid = 2;

struct Options {
  std::string input;
  std::string out;
  std::string agent;
  std::string format = "text";
  bool minimize = false;
  ProfileId max_profiles = GraphLimits{}.max_profiles;
  std::size_t n = 4;
  std::size_t m = 4;
  std::string domain = "1,3,10,35";
  std::string variant = "standard";
  std::string types;
  std::string table;
};

inline std::vector<Rational> parse_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto r = parse_rational(item);
    if (!r) throw ParseError("malformed rational \"" + item + "\" in list");
    out.push_back(*r);
  }
  if (out.empty()) throw ParseError("empty list");
  return out;
}

inline std::string profile_text(const OspGraph& g, ProfileId id) {
  const auto p = g.profile(id);
  std::string s = "(";
  for (std::size_t a = 0; a < p.size(); ++a)
    s += (a ? ", " : "") + g.agents()[a] + "=" + to_string(p[a]);
  return s + ")";
}

inline void cycle_text(std::ostream& out, const OspGraph& g, const CycleWitness& c,
                       const std::string& indent) {
  out << indent << "cycle of " << c.length() << " hops, weight " << to_string(c.weight) << "\n";
  for (std::size_t j = 0; j < c.length(); ++j)
    out << indent << "  " << profile_text(g, c.profiles[j]) << " -> "
        << profile_text(g, c.profiles[(j + 1) % c.length()]) << "  w=" << to_string(c.hop_weights[j])
        << "  at " << c.hop_nodes[j] << "\n";
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << content;
}

inline std::vector<AgentIndex> selected_agents(const Mechanism& m, const Options& o) {
  if (!o.agent.empty()) return {m.require_agent(o.agent)};
  std::vector<AgentIndex> all(m.agent_count());
  for (AgentIndex i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

inline int cmd_check(const Options& o, std::ostream& out) {
  const auto m = load_mechanism(o.input);
  const GraphLimits limits{o.max_profiles};
  bool ok = true;
  Json report = {{"agents", Json::array()}};
  for (auto i : selected_agents(m, o)) {
    const auto g = OspGraph::build(m, i, limits);
    const auto two = check_2cmon(g);
    const auto cmon = check_cmon(g);
    ok = ok && cmon.ok;
    Json a = {{"agent", g.agent_name()}, {"2cmon", to_json(g, two)}, {"cmon", cmon.ok}};
    if (o.format == "text")
      out << "agent " << g.agent_name() << ": 2CMON " << (two.ok ? "pass" : "fail") << ", CMON "
          << (cmon.ok ? "pass" : "fail") << "\n";
    if (cmon.witness) {
      auto witness = *cmon.witness;
      if (o.minimize) {
        auto mw = minimize_witness(g, witness);
        a["minimized"] = to_json(g, mw);
        witness = mw.cycle;
      }
      a["witness"] = to_json(g, witness);
      if (o.format == "text") cycle_text(out, g, witness, "  ");
      if (two.ok) {
        const auto quad = extract_cycle_anatomy(g, witness);
        a["anatomy"] = to_json(g, quad);
        if (o.format == "text")
          out << "  anatomy: " << profile_text(g, quad.b0) << " " << profile_text(g, quad.b1) << " "
              << profile_text(g, quad.b2) << " " << profile_text(g, quad.b3) << "\n";
      }
    }
    report["agents"].push_back(std::move(a));
  }
  report["osp"] = ok;
  if (o.format == "json")
    out << report.dump(2) << "\n";
  else
    out << "verdict: " << (ok ? "OSP" : "not OSP") << "\n";
  return ok ? kPass : kFail;
}

inline int cmd_witness(const Options& o, std::ostream& out) {
  const auto m = load_mechanism(o.input);
  const GraphLimits limits{o.max_profiles};
  for (auto i : selected_agents(m, o)) {
    const auto g = OspGraph::build(m, i, limits);
    const auto cmon = check_cmon(g);
    if (cmon.ok) continue;
    const auto mw = minimize_witness(g, *cmon.witness);
    if (o.format == "json") {
      Json j = to_json(g, mw);
      j["original"] = to_json(g, *cmon.witness);
      out << j.dump(2) << "\n";
    } else {
      out << "agent " << g.agent_name() << ": negative cycle found\n";
      cycle_text(out, g, *cmon.witness, "  original ");
      cycle_text(out, g, mw.cycle, "  minimized ");
      for (const auto& s : mw.steps)
        out << "  step " << (s.kind == IroningStep::Kind::shortcut ? "shortcut" : "replacement")
            << " at " << s.start << " over " << s.hops << " hops, slack "
            << to_string(s.certificate.slack) << "\n";
    }
    return kFail;
  }
  out << (o.format == "json" ? "null\n" : "no negative cycle\n");
  return kPass;
}

inline int cmd_order(const Options& o, std::ostream& out) {
  const auto m = load_mechanism(o.input);
  const GraphLimits limits{o.max_profiles};
  bool osp = true;
  for (AgentIndex i = 0; i < m.agent_count(); ++i) osp = osp && check_cmon(OspGraph::build(m, i, limits)).ok;
  auto result = order_transform(m);
  const auto& t = result.mechanism;
  std::size_t mismatches = 0;
  for (ProfileId id = 0; id < m.profile_count(); ++id) {
    const auto p = m.profile(id);
    if (m.evaluate(p).alloc != t.evaluate(p).alloc) ++mismatches;
  }
  if (mismatches) {
    out << "evaluation mismatch on " << mismatches << " profiles; nothing written\n";
    return kFail;
  }
  const auto text = dump_mechanism(t);
  if (!o.out.empty()) write_file(o.out, text);
  if (o.format == "json") {
    Json j = {{"transformed_nodes", result.transformed_nodes()},
              {"exploratory", !osp},
              {"nodes", t.node_count()}};
    Json plans = Json::array();
    for (const auto& p : result.plans) {
      Json blocks = Json::array();
      for (const auto& b : p.blocks) blocks.push_back(types_json(m.domain(p.agent), b.types));
      plans.push_back({{"node", p.node}, {"agent", m.agents()[p.agent]}, {"blocks", std::move(blocks)}});
    }
    j["plans"] = std::move(plans);
    if (o.out.empty()) j["mechanism"] = to_json(t);
    out << j.dump(2) << "\n";
  } else {
    out << "transformed nodes: " << result.transformed_nodes() << "\n";
    for (const auto& p : result.plans) {
      out << "  " << p.node << ":";
      for (const auto& b : p.blocks) {
        out << " {";
        bool first = true;
        for (const auto& v : m.domain(p.agent).select(b.types)) {
          out << (first ? "" : ",") << to_string(v);
          first = false;
        }
        out << "}";
      }
      out << "\n";
    }
    if (!osp) out << "exploratory: input is not OSP, ordering guarantees do not apply\n";
    if (o.out.empty()) out << text;
  }
  return kPass;
}

inline int cmd_classify(const Options& o, std::ostream& out) {
  const auto m = load_mechanism(o.input);
  const auto r = classify_three_way(m, GraphLimits{o.max_profiles});
  if (o.format == "json") {
    out << to_json(m, r).dump(2) << "\n";
  } else {
    std::size_t unordered = 0;
    for (const auto& [u, q] : r.queries) unordered += q.ordered ? 0 : 1;
    out << "queries: " << r.queries.size() << " (" << unordered << " non-ordered)\n";
    out << "pivot pairs: " << r.pivots.size() << "\n";
    for (const auto& p : r.pivots) {
      if (!p.violates()) continue;
      out << "  " << to_string(p.verdict) << " at " << m.node(p.node).id << " agent "
          << m.agents()[p.agent] << ": b1=" << to_string(p.b1) << " b2=" << to_string(p.b2)
          << " y=" << to_string(p.y) << " x=" << to_string(p.x) << " bu=" << to_string(p.bu)
          << " bd=" << to_string(p.bd) << " Delta=" << to_string(p.up_gap)
          << " Lambda=" << to_string(p.down_gap) << " delta=" << to_string(p.gap)
          << " min=" << to_string(p.minimum) << "\n";
    }
    out << (r.three_way ? "three-way greedy" : *r.first_violation) << "\n";
  }
  return r.three_way ? kPass : kFail;
}

inline int cmd_m4(const Options& o, std::ostream& out) {
  M4Params p;
  p.n = o.n;
  p.m = o.m;
  p.domain = parse_list(o.domain);
  if (o.variant == "flawed")
    p.variant = M4Variant::flawed;
  else if (o.variant != "standard")
    throw ParseError("unknown variant \"" + o.variant + "\"");
  const auto mech = build_m4(p);
  if (!o.out.empty()) save_mechanism(mech, o.out);
  bool osp = true;
  Json agents = Json::array();
  for (AgentIndex i = 0; i < mech.agent_count(); ++i) {
    const auto g = OspGraph::build(mech, i, GraphLimits{o.max_profiles});
    const auto c = check_cmon(g);
    osp = osp && c.ok;
    Json a = {{"agent", g.agent_name()}, {"cmon", c.ok}};
    if (c.witness) a["witness"] = to_json(g, *c.witness);
    agents.push_back(std::move(a));
  }
  const auto approx = approximation_ratio(mech, p.m);
  const Rational bound(static_cast<unsigned long>(p.n / 2 + 1));
  if (!o.table.empty()) write_file(o.table, approximation_csv(mech, approx));
  if (o.format == "csv") {
    out << approximation_csv(mech, approx);
  } else if (o.format == "json") {
    Json j = {{"n", p.n}, {"m", p.m}, {"domain", rationals_json(p.domain)}, {"nodes", mech.node_count()},
              {"osp", osp}, {"agents", std::move(agents)}, {"approximation", to_json(mech, approx)},
              {"bound", to_string(bound)}, {"within_bound", approx.worst <= bound}};
    out << j.dump(2) << "\n";
  } else {
    out << "M4 n=" << p.n << " m=" << p.m << " nodes=" << mech.node_count() << "\n";
    out << "OSP: " << (osp ? "pass" : "fail") << "\n";
    out << "worst ratio: " << to_string(approx.worst) << " (bound " << to_string(bound) << ")\n";
  }
  return osp && approx.worst <= bound ? kPass : kFail;
}

inline int cmd_optimal(const Options& o, std::ostream& out) {
  const auto b = parse_list(o.types);
  const auto r = optimal_makespan(b, o.m);
  if (o.format == "json") {
    out << Json{{"value", to_string(r.value)}, {"loads", r.loads}}.dump(2) << "\n";
  } else {
    out << "optimum " << to_string(r.value) << " loads";
    for (auto l : r.loads) out << " " << l;
    out << "\n";
  }
  return kPass;
}

/// Runs one command. `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ospkit: obvious strategyproofness checks for extensive-form mechanisms"};
  app.require_subcommand(1);
  Options o;
  auto formats = CLI::IsMember({"text", "json", "csv"});
  auto common = [&](CLI::App* s, bool file) {
    if (file) s->add_option("mechanism", o.input, "mechanism JSON file")->required();
    s->add_option("--format", o.format, "output format")->check(formats);
    s->add_option("--max-profiles", o.max_profiles, "profile-box guard (default 1000000)");
  };
  auto* check = app.add_subcommand("check", "decide OSP via cycle monotonicity per agent");
  common(check, true);
  check->add_option("--agent", o.agent, "restrict to one agent");
  check->add_flag("--minimize", o.minimize, "shorten witnesses with checked rewrites");
  auto* witness = app.add_subcommand("witness", "print and minimize a negative cycle");
  common(witness, true);
  witness->add_option("--agent", o.agent, "restrict to one agent");
  auto* order = app.add_subcommand("order", "rewrite every query into ordered form");
  common(order, true);
  order->add_option("--out", o.out, "output mechanism file");
  auto* classify = app.add_subcommand("classify", "three-way greedy classification");
  common(classify, true);
  auto* m4 = app.add_subcommand("m4", "build and assess the four-type scheduling mechanism");
  common(m4, false);
  m4->add_option("--n", o.n, "machines (even, >= 4)");
  m4->add_option("--m", o.m, "jobs (>= n)");
  m4->add_option("--domain", o.domain, "B,L,H,T");
  m4->add_option("--variant", o.variant, "standard or flawed")->check(CLI::IsMember({"standard", "flawed"}));
  m4->add_option("--out", o.out, "write the mechanism JSON here");
  m4->add_option("--table", o.table, "write the per-profile CSV here");
  auto* optimal = app.add_subcommand("optimal", "exact minimum makespan");
  common(optimal, false);
  optimal->add_option("--types", o.types, "comma-separated machine types")->required();
  optimal->add_option("--m", o.m, "jobs")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInvalid;
  }
  try {
    if (*check) return cmd_check(o, out);
    if (*witness) return cmd_witness(o, out);
    if (*order) return cmd_order(o, out);
    if (*classify) return cmd_classify(o, out);
    if (*m4) return cmd_m4(o, out);
    return cmd_optimal(o, out);
  } catch (const InvalidMechanism& e) {
    err << "invalid mechanism:\n";
    for (const auto& v : e.report().violations)
      err << "  [" << v.rule << "] " << v.message << "\n";
    return kInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
}

}  // namespace ospkit::cli
