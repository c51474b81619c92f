#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stz {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt numerator(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator(const Rational& q) { return boost::multiprecision::denominator(q); }

inline bool is_integer(const Rational& q) { return denominator(q) == 1; }

// Largest integer <= q.
inline BigInt floor_to_int(const Rational& q) {
  BigInt n = numerator(q), d = denominator(q);
  BigInt t = n / d;
  if (n < 0 && t * d != n) --t;
  return t;
}

inline BigInt ceil_to_int(const Rational& q) {
  BigInt f = floor_to_int(q);
  return f * denominator(q) == numerator(q) ? f : f + 1;
}

inline std::string to_string(const BigInt& n) { return n.str(); }

// "a" for integers, "a/b" otherwise.
inline std::string to_string(const Rational& q) {
  if (is_integer(q)) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline std::optional<BigInt> parse_integer(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::size_t pos = 0;
  if (text[0] == '-') pos = 1;
  if (pos == text.size()) return std::nullopt;
  for (std::size_t i = pos; i < text.size(); ++i)
    if (text[i] < '0' || text[i] > '9') return std::nullopt;
  return BigInt(std::string(text));
}

// Accepts "a" or "a/b" with b > 0.
inline std::optional<Rational> parse_rational(std::string_view text) {
  std::size_t slash = text.find('/');
  if (slash == std::string_view::npos) {
    auto n = parse_integer(text);
    if (!n) return std::nullopt;
    return Rational(*n);
  }
  auto n = parse_integer(text.substr(0, slash));
  auto d = parse_integer(text.substr(slash + 1));
  if (!n || !d || *d <= 0) return std::nullopt;
  return Rational(*n, *d);
}

inline BigInt int_pow(const BigInt& base, std::uint64_t exp) {
  BigInt r = 1, b = base;
  while (exp > 0) {
    if (exp & 1) r *= b;
    b *= b;
    exp >>= 1;
  }
  return r;
}

}  // namespace stz
