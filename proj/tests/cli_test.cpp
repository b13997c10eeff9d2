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


#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "support/helpers.hpp"

namespace ospkit {
namespace {

using testing::fixture;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

TEST(Cli, CheckPassesOnM4) {
  const auto r = run({"check", fixture("m4.json")});
  EXPECT_EQ(r.code, cli::kPass);
  EXPECT_TRUE(has(r.out, "verdict: OSP"));
}

TEST(Cli, CheckFailsOnAnchorWithWitness) {
  const auto r = run({"check", fixture("anchor.json")});
  EXPECT_EQ(r.code, cli::kFail);
  EXPECT_TRUE(has(r.out, "weight -6"));
  EXPECT_TRUE(has(r.out, "anatomy:"));
  EXPECT_TRUE(has(r.out, "verdict: not OSP"));
}

TEST(Cli, CheckJsonCarriesWitnessAndMinimizedCycle) {
  const auto r = run({"check", fixture("anchor.json"), "--minimize", "--format", "json"});
  EXPECT_EQ(r.code, cli::kFail);
  const auto j = Json::parse(r.out);
  EXPECT_FALSE(j["osp"].get<bool>());
  EXPECT_EQ(j["agents"][0]["witness"]["weight"], "-6");
  EXPECT_TRUE(j["agents"][0].contains("minimized"));
  EXPECT_TRUE(j["agents"][1]["cmon"].get<bool>());
}

TEST(Cli, CheckRestrictsToOneAgent) {
  const auto r = run({"check", fixture("anchor.json"), "--agent", "j"});
  EXPECT_EQ(r.code, cli::kPass);
  EXPECT_FALSE(has(r.out, "agent i"));
  EXPECT_EQ(run({"check", fixture("anchor.json"), "--agent", "zz"}).code, cli::kInvalid);
}

TEST(Cli, InvalidInputExitsTwo) {
  const auto malformed = run({"check", fixture("malformed.json")});
  EXPECT_EQ(malformed.code, cli::kInvalid);
  EXPECT_TRUE(has(malformed.err, "invalid JSON"));
  const auto kary = run({"check", fixture("kary.json")});
  EXPECT_EQ(kary.code, cli::kInvalid);
  EXPECT_TRUE(has(kary.err, "[kary-node]"));
  EXPECT_FALSE(has(kary.err, "unreachable"));
  EXPECT_EQ(run({"check", fixture("missing.json")}).code, cli::kInvalid);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kInvalid);
  EXPECT_EQ(run({"check", fixture("m4.json"), "--format", "yaml"}).code, cli::kInvalid);
}

TEST(Cli, GuardIsReportedAsInvalid) {
  const auto r = run({"check", fixture("m4.json"), "--max-profiles", "10"});
  EXPECT_EQ(r.code, cli::kInvalid);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, WitnessMinimizes) {
  const auto r = run({"witness", fixture("anchor.json")});
  EXPECT_EQ(r.code, cli::kFail);
  EXPECT_TRUE(has(r.out, "minimized cycle of 4 hops, weight -6"));
  const auto ok = run({"witness", fixture("m4.json")});
  EXPECT_EQ(ok.code, cli::kPass);
  EXPECT_EQ(ok.out, "no negative cycle\n");
}

TEST(Cli, OrderLeavesOrderedInputAlone) {
  const auto r = run({"order", fixture("example1.json"), "--format", "json"});
  EXPECT_EQ(r.code, cli::kPass);
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["transformed_nodes"], 0);
  EXPECT_FALSE(j["exploratory"].get<bool>());
  EXPECT_EQ(mechanism_from_json(j["mechanism"]).node_count(), testing::load_fixture("example1.json").node_count());
}

TEST(Cli, OrderSplitsFig2IntoBlocks) {
  const auto r = run({"order", fixture("fig2.json")});
  EXPECT_EQ(r.code, cli::kPass);
  EXPECT_TRUE(has(r.out, "transformed nodes: 1"));
  EXPECT_TRUE(has(r.out, "u: {1} {2} {3}"));
}

TEST(Cli, OrderWritesAReloadableFile) {
  const auto path = (std::filesystem::temp_directory_path() / "ospkit_cli_order.json").string();
  const auto r = run({"order", fixture("fig2_wide.json"), "--out", path});
  EXPECT_EQ(r.code, cli::kPass);
  const auto m = load_mechanism(path);
  const auto before = testing::load_fixture("fig2_wide.json");
  for (ProfileId id = 0; id < before.profile_count(); ++id)
    EXPECT_EQ(m.evaluate(before.profile(id)).alloc, before.evaluate(before.profile(id)).alloc);
  std::remove(path.c_str());
}

TEST(Cli, ClassifyVerdicts) {
  const auto ok = run({"classify", fixture("example1.json")});
  EXPECT_EQ(ok.code, cli::kPass);
  EXPECT_TRUE(has(ok.out, "three-way greedy"));
  const auto anchor = run({"classify", fixture("anchor.json")});
  EXPECT_EQ(anchor.code, cli::kFail);
  EXPECT_TRUE(has(anchor.out, "Delta=0 Lambda=0 delta=2"));
  const auto j = Json::parse(run({"classify", fixture("anchor.json"), "--format", "json"}).out);
  EXPECT_EQ(j["pivots"][0]["verdict"], "anchor");
  EXPECT_EQ(j["pivots"][0]["Delta"], "0");
  EXPECT_EQ(j["pivots"][0]["Lambda"], "0");
  EXPECT_EQ(j["pivots"][0]["delta"], "2");
  const auto fig2 = run({"classify", fixture("fig2.json")});
  EXPECT_EQ(fig2.code, cli::kFail);
  EXPECT_TRUE(has(fig2.out, "non-ordered query at node u"));
  EXPECT_TRUE(has(fig2.out, "run `order` first"));
}

TEST(Cli, M4ReportsOspAndRatio) {
  const auto r = run({"m4", "--n", "4", "--m", "4", "--domain", "1,3,10,35", "--format", "json"});
  EXPECT_EQ(r.code, cli::kPass);
  const auto j = Json::parse(r.out);
  EXPECT_TRUE(j["osp"].get<bool>());
  EXPECT_TRUE(j["within_bound"].get<bool>());
  EXPECT_LE(*parse_rational(j["approximation"]["worst_ratio"].get<std::string>()), 3);
}

TEST(Cli, M4FlawedVariantFails) {
  const auto r = run({"m4", "--variant", "flawed"});
  EXPECT_EQ(r.code, cli::kFail);
  EXPECT_TRUE(has(r.out, "OSP: fail"));
}

TEST(Cli, M4CsvHasOneRowPerProfile) {
  const auto r = run({"m4", "--format", "csv"});
  EXPECT_EQ(r.code, cli::kPass);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 257);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "m1,m2,m3,m4,makespan,optimum,ratio");
}

TEST(Cli, M4ParameterErrors) {
  const auto odd = run({"m4", "--n", "3"});
  EXPECT_EQ(odd.code, cli::kInvalid);
  EXPECT_TRUE(has(odd.err, "n must be even and ≥ 4"));
  const auto few = run({"m4", "--m", "2"});
  EXPECT_EQ(few.code, cli::kInvalid);
  EXPECT_TRUE(has(few.err, "m ≥ n required"));
  EXPECT_EQ(run({"m4", "--domain", "1,3,x,35"}).code, cli::kInvalid);
}

TEST(Cli, Optimal) {
  const auto r = run({"optimal", "--types", "1,2", "--m", "4"});
  EXPECT_EQ(r.code, cli::kPass);
  EXPECT_EQ(r.out, "optimum 3 loads 3 1\n");
}

TEST(Cli, OutputIsDeterministic) {
  const std::vector<std::vector<std::string>> commands = {
      {"check", fixture("anchor.json"), "--minimize", "--format", "json"},
      {"order", fixture("fig2_wide.json")},
      {"classify", fixture("anchor.json"), "--format", "json"},
      {"m4", "--format", "json"}};
  for (const auto& c : commands) {
    const auto a = run(c);
    const auto b = run(c);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out) << c[0];
  }
}

}  // namespace
}  // namespace ospkit
