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


// Builds the four-type scheduling mechanism, checks it, and prints the
// worst approximation ratio next to the flawed variant's negative cycle.

#include <iostream>

#include "ospkit/ospkit.hpp"

int main() {
  using namespace ospkit;
  M4Params p;
  p.n = 4;
  p.m = 4;
  p.domain = {Rational(1), Rational(3), Rational(10), Rational(35)};

  const auto mech = build_m4(p);
  std::cout << "tree nodes: " << mech.node_count() << "\n";
  for (AgentIndex i = 0; i < mech.agent_count(); ++i) {
    const auto g = OspGraph::build(mech, i);
    std::cout << "  " << mech.agents()[i] << ": " << g.edge_count() << " edges, CMON "
              << (check_cmon(g).ok ? "holds" : "fails") << "\n";
  }
  const auto approx = approximation_ratio(mech, p.m);
  std::cout << "worst ratio " << to_string(approx.worst) << " at";
  for (const auto& t : mech.profile(approx.worst_profile)) std::cout << " " << to_string(t);
  std::cout << "\n";

  p.variant = M4Variant::flawed;
  const auto flawed = build_m4(p);
  if (auto c = anchors_cycle_demo(flawed, 0)) {
    const auto g = OspGraph::build(flawed, 0);
    std::cout << "flawed variant: anchor cycle of weight " << to_string(c->cycle.weight) << " = ("
              << to_string(c->label_gap) << ")*(" << to_string(c->type_gap) << ")\n";
    std::cout << to_json(g, c->cycle).dump(2) << "\n";
  }
  return 0;
}
