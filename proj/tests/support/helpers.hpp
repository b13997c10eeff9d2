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

// Shared helpers for the unit tests.

#include <string>

#include "ospkit/ospkit.hpp"

namespace ospkit::testing {

inline std::string fixture(const std::string& name) { return std::string(OSPKIT_FIXTURES) + "/" + name; }

inline Mechanism load_fixture(const std::string& name) { return load_mechanism(fixture(name)); }

inline Profile ints(std::initializer_list<long> values) {
  Profile out;
  for (long v : values) out.emplace_back(v);
  return out;
}

/// Single agent "a" over {1,2}, one root query; a gets x at type 1 and y at
/// type 2.
inline Mechanism two_point(long x, long y) {
  return parse_mechanism(R"({"agents":["a"],"domains":{"a":["1","2"]},"root":"r",
    "nodes":{"r":{"query":{"agent":"a","left":["1"],"right":["2"],"left_child":"lo","right_child":"hi"}},
    "lo":{"leaf":{"alloc":{"a":")" + std::to_string(x) + R"("}}},
    "hi":{"leaf":{"alloc":{"a":")" + std::to_string(y) + R"("}}}}})");
}

}  // namespace ospkit::testing
