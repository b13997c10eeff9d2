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

// JSON interchange for mechanisms. Rationals travel as strings ("p" or
// "p/q"); plain JSON integers are accepted on input, floats never.

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "ospkit/mechanism.hpp"

namespace ospkit {

using Json = nlohmann::ordered_json;

/// The input is not well-formed JSON or does not have the interchange shape.
class ParseError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline Rational json_rational(const Json& v, const std::string& where) {
  if (v.is_string()) {
    auto r = parse_rational(v.get<std::string>());
    if (!r) throw ParseError(where + ": malformed rational \"" + v.get<std::string>() + "\"");
    return *r;
  }
  if (v.is_number_integer()) {
    Rational r;
    r.get_num() = mpz_class(v.dump());
    return r;
  }
  throw ParseError(where + ": expected a rational string or integer");
}

inline std::vector<Rational> json_rationals(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of rationals");
  std::vector<Rational> out;
  for (const auto& e : v) out.push_back(json_rational(e, where));
  return out;
}

inline std::string json_string(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw ParseError(where + ": missing string field \"" + key + "\"");
  return it->get<std::string>();
}

inline std::map<std::string, Rational> json_rational_map(const Json& v, const std::string& where) {
  if (!v.is_object()) throw ParseError(where + ": expected an object of rationals");
  std::map<std::string, Rational> out;
  for (const auto& [k, x] : v.items()) out[k] = json_rational(x, where + "." + k);
  return out;
}

inline NodeDraft json_node(const std::string& id, const Json& v) {
  const std::string where = "node \"" + id + "\"";
  if (!v.is_object() || v.size() != 1)
    throw ParseError(where + ": expected exactly one of \"query\" or \"leaf\"");
  if (auto q = v.find("query"); q != v.end()) {
    if (!q->is_object()) throw ParseError(where + ": query must be an object");
    // Multi-way queries arrive as "parts"/"children" arrays.
    for (const char* key : {"parts", "children"})
      if (auto it = q->find(key); it != q->end() && it->is_array() && it->size() != 2) {
        KaryDraft k{it->size(), {}};
        if (auto c = q->find("children"); c != q->end() && c->is_array())
          for (const auto& id : *c)
            if (id.is_string()) k.children.push_back(id.get<std::string>());
        return k;
      }
    QueryDraft d;
    d.agent = json_string(*q, "agent", where);
    if (q->contains("parts") && q->contains("children")) {
      const auto& parts = q->at("parts");
      const auto& kids = q->at("children");
      if (!kids.is_array() || kids.size() != 2 || !kids[0].is_string() || !kids[1].is_string())
        throw ParseError(where + ": children must be two node ids");
      d.left = json_rationals(parts[0], where + ".parts");
      d.right = json_rationals(parts[1], where + ".parts");
      d.left_child = kids[0].get<std::string>();
      d.right_child = kids[1].get<std::string>();
      return d;
    }
    if (!q->contains("left") || !q->contains("right"))
      throw ParseError(where + ": query needs \"left\" and \"right\" parts");
    d.left = json_rationals(q->at("left"), where + ".left");
    d.right = json_rationals(q->at("right"), where + ".right");
    d.left_child = json_string(*q, "left_child", where);
    d.right_child = json_string(*q, "right_child", where);
    return d;
  }
  if (auto l = v.find("leaf"); l != v.end()) {
    if (!l->is_object()) throw ParseError(where + ": leaf must be an object");
    LeafDraft d;
    if (auto a = l->find("alloc"); a != l->end()) d.alloc = json_rational_map(*a, where + ".alloc");
    if (auto p = l->find("pay"); p != l->end()) d.pay = json_rational_map(*p, where + ".pay");
    return d;
  }
  throw ParseError(where + ": expected exactly one of \"query\" or \"leaf\"");
}

}  // namespace detail

inline MechanismDraft draft_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("mechanism must be a JSON object");
  MechanismDraft d;
  const auto agents = j.find("agents");
  if (agents == j.end() || !agents->is_array()) throw ParseError("missing array field \"agents\"");
  for (const auto& a : *agents) {
    if (!a.is_string()) throw ParseError("agent ids must be strings");
    d.agents.push_back(a.get<std::string>());
  }
  const auto domains = j.find("domains");
  if (domains == j.end() || !domains->is_object()) throw ParseError("missing object field \"domains\"");
  for (const auto& [k, v] : domains->items())
    d.domains[k] = detail::json_rationals(v, "domain \"" + k + "\"");
  d.root = detail::json_string(j, "root", "mechanism");
  const auto nodes = j.find("nodes");
  if (nodes == j.end() || !nodes->is_object()) throw ParseError("missing object field \"nodes\"");
  for (const auto& [k, v] : nodes->items()) d.nodes.emplace_back(k, detail::json_node(k, v));
  return d;
}

/// Parses and validates. Throws ParseError or InvalidMechanism.
inline Mechanism mechanism_from_json(const Json& j) { return Mechanism::from_draft(draft_from_json(j)); }

inline Mechanism parse_mechanism(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return mechanism_from_json(j);
}

inline Mechanism load_mechanism(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mechanism(buf.str());
}

inline Json rationals_json(const std::vector<Rational>& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(to_string(x));
  return out;
}

/// Nodes are written in tree preorder, maps in sorted key order.
inline Json to_json(const MechanismDraft& d) {
  Json j;
  j["agents"] = d.agents;
  j["domains"] = Json::object();
  for (const auto& a : d.agents)
    if (auto it = d.domains.find(a); it != d.domains.end()) j["domains"][a] = rationals_json(it->second);
  j["root"] = d.root;
  j["nodes"] = Json::object();
  for (const auto& [id, node] : d.nodes) {
    Json n;
    if (const auto* q = std::get_if<QueryDraft>(&node)) {
      n["query"] = {{"agent", q->agent},
                    {"left", rationals_json(q->left)},
                    {"right", rationals_json(q->right)},
                    {"left_child", q->left_child},
                    {"right_child", q->right_child}};
    } else if (const auto* l = std::get_if<LeafDraft>(&node)) {
      Json leaf;
      leaf["alloc"] = Json::object();
      for (const auto& [a, x] : l->alloc) leaf["alloc"][a] = to_string(x);
      if (l->pay) {
        leaf["pay"] = Json::object();
        for (const auto& [a, x] : *l->pay) leaf["pay"][a] = to_string(x);
      }
      n["leaf"] = std::move(leaf);
    } else {
      throw Error("cannot serialize a multi-way query");
    }
    j["nodes"][id] = std::move(n);
  }
  return j;
}

inline Json to_json(const Mechanism& m) { return to_json(m.to_draft()); }

inline std::string dump_mechanism(const Mechanism& m) { return to_json(m).dump(2) + "\n"; }

inline void save_mechanism(const Mechanism& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << dump_mechanism(m);
}

}  // namespace ospkit
