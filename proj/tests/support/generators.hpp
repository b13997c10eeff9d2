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

// Seeded random mechanism generators for property tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ospkit/mechanism.hpp"

namespace ospkit::testing {

struct GenConfig {
  std::size_t agents = 2;
  std::size_t domain_size = 3;
  std::size_t max_depth = 6;
  double leaf_probability = 0.2;
  bool ordered = false;   // every query splits at a threshold
  int max_outcome = 3;    // outcomes drawn from {0..max_outcome}
  bool rational_types = false;
};

class MechanismGenerator {
 public:
  MechanismGenerator(std::uint64_t seed, GenConfig cfg) : rng_(seed), cfg_(cfg) {}

  MechanismDraft draft() {
    MechanismDraft d;
    counter_ = 0;
    std::vector<std::vector<Rational>> domains;
    for (std::size_t a = 0; a < cfg_.agents; ++a) {
      d.agents.push_back("a" + std::to_string(a + 1));
      domains.push_back(random_domain());
      d.domains[d.agents.back()] = domains.back();
    }
    d.root = grow(d, domains, 0);
    return d;
  }

  Mechanism next() { return Mechanism::from_draft(draft()); }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::vector<Rational> random_domain() {
    std::vector<int> pool;
    const int top = cfg_.rational_types ? 16 : 8;
    for (int v = 1; v <= top; ++v) pool.push_back(v);
    std::shuffle(pool.begin(), pool.end(), rng_);
    pool.resize(cfg_.domain_size);
    std::sort(pool.begin(), pool.end());
    std::vector<Rational> out;
    for (int v : pool) out.push_back(cfg_.rational_types ? rational(v, 2) : Rational(v));
    return out;
  }

  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  std::string grow(MechanismDraft& d, const std::vector<std::vector<Rational>>& sub, std::size_t depth) {
    const std::string id = "n" + std::to_string(counter_++);
    std::vector<std::size_t> splittable;
    for (std::size_t a = 0; a < sub.size(); ++a)
      if (sub[a].size() >= 2) splittable.push_back(a);
    if (depth >= cfg_.max_depth || splittable.empty() || (depth > 0 && coin(cfg_.leaf_probability))) {
      LeafDraft leaf;
      for (const auto& a : d.agents)
        leaf.alloc[a] = Rational(static_cast<long>(below(static_cast<std::size_t>(cfg_.max_outcome) + 1)));
      d.nodes.emplace_back(id, std::move(leaf));
      return id;
    }
    const auto a = splittable[below(splittable.size())];
    const auto& s = sub[a];
    std::vector<Rational> left, right;
    if (cfg_.ordered) {
      const auto cut = 1 + below(s.size() - 1);
      left.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(cut));
      right.assign(s.begin() + static_cast<std::ptrdiff_t>(cut), s.end());
    } else {
      // Uniform proper nonempty subset; the part holding the minimum goes left.
      const std::uint64_t mask = 1 + below((std::uint64_t{1} << s.size()) - 2);
      for (std::size_t k = 0; k < s.size(); ++k) ((mask >> k) & 1 ? left : right).push_back(s[k]);
      if (right.front() < left.front()) std::swap(left, right);
    }
    const auto slot = d.nodes.size();
    d.nodes.emplace_back(id, QueryDraft{});
    auto child = sub;
    child[a] = left;
    auto lc = grow(d, child, depth + 1);
    child[a] = right;
    auto rc = grow(d, child, depth + 1);
    d.nodes[slot].second = QueryDraft{d.agents[a], left, right, lc, rc};
    return id;
  }

  std::mt19937_64 rng_;
  GenConfig cfg_;
  std::size_t counter_ = 0;
};

}  // namespace ospkit::testing
