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

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ospkit {

/// Exact rational number used for types, outcomes and weights.
using Rational = mpq_class;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented size guard was exceeded.
class GuardExceeded : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied precondition does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Parses "p", "-p" or "p/q" into a canonical rational. Returns nullopt on
/// malformed input or a zero denominator.
inline std::optional<Rational> parse_rational(std::string_view text) {
  auto digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  std::string_view body = text;
  if (!body.empty() && (body.front() == '-' || body.front() == '+'))
    body.remove_prefix(1);
  const auto slash = body.find('/');
  if (slash == std::string_view::npos) {
    if (!digits(body)) return std::nullopt;
  } else {
    auto num = body.substr(0, slash);
    auto den = body.substr(slash + 1);
    if (!digits(num) || !digits(den)) return std::nullopt;
    if (den.find_first_not_of('0') == std::string_view::npos)
      return std::nullopt;
  }
  std::string canonical(text);
  if (!canonical.empty() && canonical.front() == '+') canonical.erase(0, 1);
  Rational value;
  if (value.set_str(canonical, 10) != 0) return std::nullopt;
  value.canonicalize();
  return value;
}

/// Like parse_rational but throws Error with context on failure.
inline Rational rational_from_string(std::string_view text) {
  auto value = parse_rational(text);
  if (!value)
    throw Error("malformed rational \"" + std::string(text) + "\"");
  return *value;
}

/// Canonical text form: "p" for integers, "p/q" otherwise.
inline std::string to_string(const Rational& value) { return value.get_str(); }

inline Rational rational(long num, long den = 1) {
  Rational value(num, den);
  value.canonicalize();
  return value;
}

/// Least common multiple of denominators, used to move weights onto an
/// integer lattice without losing exactness.
inline mpz_class common_denominator(const mpz_class& acc, const Rational& value) {
  mpz_class out;
  mpz_lcm(out.get_mpz_t(), acc.get_mpz_t(), value.get_den_mpz_t());
  return out;
}

}  // namespace ospkit
