#pragma once

#include "stz/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace stz {

// Exponent in N union {infinity}.
class Exponent {
 public:
  constexpr Exponent() : raw_(0) {}
  static constexpr Exponent finite(std::uint64_t v) { return Exponent(v); }
  static constexpr Exponent infinity() { return Exponent(kInf); }

  bool is_infinite() const { return raw_ == kInf; }
  // Finite value; invalid on the infinite exponent.
  std::uint64_t value() const {
    if (is_infinite()) throw std::domain_error("Exponent: infinite has no finite value");
    return raw_;
  }

  friend bool operator==(Exponent a, Exponent b) { return a.raw_ == b.raw_; }
  friend bool operator!=(Exponent a, Exponent b) { return a.raw_ != b.raw_; }
  friend bool operator<(Exponent a, Exponent b) { return a.raw_ < b.raw_; }
  friend bool operator<=(Exponent a, Exponent b) { return a.raw_ <= b.raw_; }

  Exponent plus(Exponent o) const {
    if (is_infinite() || o.is_infinite()) return infinity();
    return finite(raw_ + o.raw_);
  }
  // Subtraction; infinity absorbs, finite underflow is a domain error.
  Exponent minus(Exponent o) const {
    if (is_infinite()) return infinity();
    if (o.is_infinite() || o.raw_ > raw_) throw std::domain_error("Exponent: negative difference");
    return finite(raw_ - o.raw_);
  }
  static Exponent max(Exponent a, Exponent b) { return a < b ? b : a; }

 private:
  explicit constexpr Exponent(std::uint64_t raw) : raw_(raw) {}
  static constexpr std::uint64_t kInf = ~std::uint64_t{0};
  std::uint64_t raw_;
};

inline constexpr std::uint64_t kDefaultFactorBound = 1'000'000;

// Trial-division factorization, ascending primes. Rejects numbers whose
// unfactored remainder exceeds bound^2 (then it could be composite).
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> factorize(
    BigInt n, std::uint64_t bound = kDefaultFactorBound) {
  if (n <= 0) throw std::domain_error("factorize: argument must be positive");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  auto strip = [&](std::uint64_t p) {
    std::uint64_t e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e > 0) out.emplace_back(p, e);
  };
  strip(2);
  for (std::uint64_t p = 3; p <= bound && BigInt(p) * p <= n; p += 2) strip(p);
  if (n > 1) {
    if (n > BigInt(bound) * bound) throw std::domain_error("factorize: remainder exceeds factor bound");
    out.emplace_back(n.convert_to<std::uint64_t>(), 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::uint64_t valuation(BigInt n, std::uint64_t p) {
  if (n == 0) throw std::domain_error("valuation of zero");
  std::uint64_t v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

inline std::vector<std::uint64_t> primes_up_to(std::uint64_t n) {
  std::vector<std::uint64_t> primes;
  if (n < 2) return primes;
  std::vector<bool> composite(n + 1, false);
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = true;
  }
  return primes;
}

// Formal product prod p^(e_p) with exponents in N union {infinity}, stored as
// an eventually-constant exponent function: a default exponent plus finitely
// many exceptions. Invariant: no stored exception equals the default.
class SteinitzNumber {
 public:
  SteinitzNumber() = default;

  static SteinitzNumber one() { return SteinitzNumber(); }

  static SteinitzNumber from_exponents(Exponent default_exponent,
                                       std::map<std::uint64_t, Exponent> exceptions) {
    SteinitzNumber s;
    s.default_ = default_exponent;
    s.exceptions_ = std::move(exceptions);
    s.normalize();
    return s;
  }

  static SteinitzNumber from_integer(const BigInt& n, std::uint64_t bound = kDefaultFactorBound) {
    std::map<std::uint64_t, Exponent> ex;
    for (auto [p, e] : factorize(n, bound)) ex.emplace(p, Exponent::finite(e));
    return from_exponents(Exponent::finite(0), std::move(ex));
  }

  static SteinitzNumber prime_power(std::uint64_t p, Exponent e) {
    return from_exponents(Exponent::finite(0), {{p, e}});
  }

  Exponent default_exponent() const { return default_; }
  const std::map<std::uint64_t, Exponent>& exceptions() const { return exceptions_; }

  Exponent exponent_of(std::uint64_t prime) const {
    auto it = exceptions_.find(prime);
    return it == exceptions_.end() ? default_ : it->second;
  }

  bool is_one() const { return default_ == Exponent::finite(0) && exceptions_.empty(); }

  // True when the number is an ordinary natural: default exponent 0, all
  // exceptions finite.
  bool is_natural() const {
    if (default_ != Exponent::finite(0)) return false;
    for (const auto& [p, e] : exceptions_)
      if (e.is_infinite()) return false;
    return true;
  }

  bool is_infinite() const {
    if (default_.is_infinite()) return true;
    if (!(default_ == Exponent::finite(0))) return true;  // positive default at all primes
    for (const auto& [p, e] : exceptions_)
      if (e.is_infinite()) return true;
    return false;
  }

  BigInt to_integer() const {
    if (!is_natural()) throw std::domain_error("SteinitzNumber: not a natural number");
    BigInt n = 1;
    for (const auto& [p, e] : exceptions_) n *= int_pow(BigInt(p), e.value());
    return n;
  }

  friend bool operator==(const SteinitzNumber& a, const SteinitzNumber& b) {
    return a.default_ == b.default_ && a.exceptions_ == b.exceptions_;
  }
  friend bool operator!=(const SteinitzNumber& a, const SteinitzNumber& b) { return !(a == b); }

  // Primes (ascending, capped at bound) whose exponent is positive.
  std::vector<std::uint64_t> support_up_to(std::uint64_t bound) const {
    std::vector<std::uint64_t> out;
    if (!(default_ == Exponent::finite(0))) {
      for (std::uint64_t p : primes_up_to(bound))
        if (Exponent::finite(0) < exponent_of(p)) out.push_back(p);
    } else {
      for (const auto& [p, e] : exceptions_)
        if (p <= bound && Exponent::finite(0) < e) out.push_back(p);
    }
    return out;
  }

  std::string to_string() const;

 private:
  void normalize() {
    for (auto it = exceptions_.begin(); it != exceptions_.end();)
      it = (it->second == default_) ? exceptions_.erase(it) : std::next(it);
  }

  Exponent default_{Exponent::finite(0)};
  std::map<std::uint64_t, Exponent> exceptions_;
};

inline SteinitzNumber st_mul(const SteinitzNumber& a, const SteinitzNumber& b) {
  std::map<std::uint64_t, Exponent> ex;
  for (const auto& [p, e] : a.exceptions()) ex[p] = e.plus(b.exponent_of(p));
  for (const auto& [p, e] : b.exceptions())
    if (!ex.count(p)) ex[p] = e.plus(a.exponent_of(p));
  return SteinitzNumber::from_exponents(a.default_exponent().plus(b.default_exponent()), std::move(ex));
}

inline SteinitzNumber st_lcm(const SteinitzNumber& a, const SteinitzNumber& b) {
  std::map<std::uint64_t, Exponent> ex;
  for (const auto& [p, e] : a.exceptions()) ex[p] = Exponent::max(e, b.exponent_of(p));
  for (const auto& [p, e] : b.exceptions())
    if (!ex.count(p)) ex[p] = Exponent::max(e, a.exponent_of(p));
  return SteinitzNumber::from_exponents(Exponent::max(a.default_exponent(), b.default_exponent()),
                                        std::move(ex));
}

// Exponentwise order: a <= b at every prime.
inline bool st_leq(const SteinitzNumber& a, const SteinitzNumber& b) {
  if (!(a.default_exponent() <= b.default_exponent())) return false;
  for (const auto& [p, e] : a.exceptions())
    if (!(e <= b.exponent_of(p))) return false;
  for (const auto& [p, e] : b.exceptions())
    if (!(a.exponent_of(p) <= e)) return false;
  return true;
}

// Whether the natural number n divides s.
inline bool nat_divides(const BigInt& n, const SteinitzNumber& s) {
  for (auto [p, e] : factorize(n))
    if (!(Exponent::finite(e) <= s.exponent_of(p))) return false;
  return true;
}

inline SteinitzNumber st_div_by_nat(const SteinitzNumber& s, const BigInt& n) {
  if (!nat_divides(n, s)) throw std::domain_error("st_div_by_nat: divisor does not divide");
  std::map<std::uint64_t, Exponent> ex = s.exceptions();
  for (auto [p, e] : factorize(n)) {
    auto it = ex.find(p);
    Exponent cur = it == ex.end() ? s.default_exponent() : it->second;
    ex[p] = cur.minus(Exponent::finite(e));
  }
  return SteinitzNumber::from_exponents(s.default_exponent(), std::move(ex));
}

inline SteinitzNumber st_mul_nat(const SteinitzNumber& s, const BigInt& n) {
  return st_mul(s, SteinitzNumber::from_integer(n));
}

// Positive rational q with a = q * b, when one exists. Requires equal default
// exponents, identical infinite positions, and finitely many differing primes;
// the denominator of q then automatically divides b.
inline std::optional<Rational> rationally_connected(const SteinitzNumber& a, const SteinitzNumber& b) {
  if (a.default_exponent() != b.default_exponent()) return std::nullopt;
  Rational q = 1;
  auto fold = [&](std::uint64_t p) -> bool {
    Exponent ea = a.exponent_of(p), eb = b.exponent_of(p);
    if (ea.is_infinite() != eb.is_infinite()) return false;
    if (ea.is_infinite()) return true;
    if (eb < ea)
      q *= Rational(int_pow(BigInt(p), ea.value() - eb.value()));
    else if (ea < eb)
      q /= Rational(int_pow(BigInt(p), eb.value() - ea.value()));
    return true;
  };
  for (const auto& [p, e] : a.exceptions())
    if (!fold(p)) return std::nullopt;
  for (const auto& [p, e] : b.exceptions())
    if (!a.exceptions().count(p) && !fold(p)) return std::nullopt;
  return q;
}

// The natural witness b with s2 = b * s1, when s1 divides s2 with finite ratio.
inline std::optional<BigInt> finitely_divides(const SteinitzNumber& s1, const SteinitzNumber& s2) {
  auto q = rationally_connected(s2, s1);
  if (!q || !is_integer(*q) || *q < 1) return std::nullopt;
  return numerator(*q);
}

// Canonical representative of the rational-connectedness class: finite
// exceptions collapse to the default when the default is finite, and to
// exponent zero when the default is infinite (so infinite positions are kept).
inline SteinitzNumber class_representative(const SteinitzNumber& s) {
  std::map<std::uint64_t, Exponent> ex;
  for (const auto& [p, e] : s.exceptions()) {
    if (e.is_infinite())
      ex.emplace(p, e);
    else if (s.default_exponent().is_infinite())
      ex.emplace(p, Exponent::finite(0));
  }
  return SteinitzNumber::from_exponents(s.default_exponent(), std::move(ex));
}

// Natural divisors of s that are <= bound, ascending.
inline std::vector<BigInt> divisors_up_to(const SteinitzNumber& s, std::uint64_t bound) {
  std::vector<std::uint64_t> primes = s.support_up_to(bound);
  std::vector<BigInt> out;
  std::vector<std::pair<std::uint64_t, Exponent>> caps;
  caps.reserve(primes.size());
  for (std::uint64_t p : primes) caps.emplace_back(p, s.exponent_of(p));
  auto dfs = [&](auto&& self, std::size_t i, BigInt acc) -> void {
    out.push_back(acc);
    for (std::size_t j = i; j < caps.size(); ++j) {
      auto [p, cap] = caps[j];
      BigInt v = acc;
      std::uint64_t used = 0;
      while ((cap.is_infinite() || used < cap.value()) && v * p <= bound) {
        v *= p;
        ++used;
        self(self, j + 1, v);
      }
    }
  };
  dfs(dfs, 0, BigInt(1));
  std::sort(out.begin(), out.end());
  return out;
}

// A positive rational multiple q * s of a Steinitz number. The scale is kept
// exact (no absorption into infinite exponents); equality is canonical-form
// equality, so (1/2) * 2^inf and 2^inf stay distinct.
class ScaledSteinitz {
 public:
  ScaledSteinitz() : scale_(1) {}

  ScaledSteinitz(Rational scale, SteinitzNumber base) : scale_(std::move(scale)), base_(std::move(base)) {
    if (scale_ <= 0) throw std::domain_error("ScaledSteinitz: scale must be positive");
    for (auto [p, e] : factorize(denominator(scale_)))
      if (!(Exponent::finite(e) <= base_.exponent_of(p)))
        throw std::domain_error("ScaledSteinitz: scale denominator does not divide base");
  }

  const Rational& scale() const { return scale_; }
  const SteinitzNumber& base() const { return base_; }

  // Same value expressed over the class representative of the base.
  ScaledSteinitz canonical() const {
    SteinitzNumber rep = class_representative(base_);
    auto q = rationally_connected(base_, rep);
    return ScaledSteinitz(scale_ * *q, std::move(rep));
  }

  friend bool operator==(const ScaledSteinitz& a, const ScaledSteinitz& b) {
    ScaledSteinitz ca = a.canonical(), cb = b.canonical();
    return ca.scale_ == cb.scale_ && ca.base_ == cb.base_;
  }
  friend bool operator!=(const ScaledSteinitz& a, const ScaledSteinitz& b) { return !(a == b); }

  // The underlying exponent function, with the scale absorbed; infinite
  // positions swallow finite adjustments.
  SteinitzNumber raw_value() const {
    std::map<std::uint64_t, Exponent> ex = base_.exceptions();
    auto adjust = [&](std::uint64_t p, std::int64_t delta) {
      auto it = ex.find(p);
      Exponent cur = it == ex.end() ? base_.default_exponent() : it->second;
      if (cur.is_infinite()) return;
      ex[p] = delta >= 0 ? cur.plus(Exponent::finite(static_cast<std::uint64_t>(delta)))
                         : cur.minus(Exponent::finite(static_cast<std::uint64_t>(-delta)));
    };
    for (auto [p, e] : factorize(numerator(scale_))) adjust(p, static_cast<std::int64_t>(e));
    for (auto [p, e] : factorize(denominator(scale_))) adjust(p, -static_cast<std::int64_t>(e));
    return SteinitzNumber::from_exponents(base_.default_exponent(), std::move(ex));
  }

  std::string to_string() const;

 private:
  Rational scale_;
  SteinitzNumber base_;
};

inline ScaledSteinitz scale_by(const ScaledSteinitz& t, const Rational& factor) {
  if (factor <= 0) throw std::domain_error("scale_by: factor must be positive");
  return ScaledSteinitz(t.scale() * factor, t.base());
}

// Re-express t over new_base; empty when the bases are not rationally connected.
inline std::optional<ScaledSteinitz> scaled_rebase(const ScaledSteinitz& t, const SteinitzNumber& new_base) {
  auto q = rationally_connected(t.base(), new_base);
  if (!q) return std::nullopt;
  return ScaledSteinitz(t.scale() * *q, new_base);
}

// Equality after absorbing scales into exponents; coarser than operator==.
inline bool st_exponentwise_equal(const ScaledSteinitz& a, const ScaledSteinitz& b) {
  return a.raw_value() == b.raw_value();
}

// Order on values within one rational-connectedness class: a <= b when
// b = q * a for rational q >= 1. Unconnected values are incomparable.
inline bool scaled_leq(const ScaledSteinitz& a, const ScaledSteinitz& b) {
  auto q = rationally_connected(b.base(), a.base());
  if (!q) return false;
  return a.scale() <= b.scale() * *q;
}

inline std::string SteinitzNumber::to_string() const {
  if (is_natural()) return stz::to_string(to_integer());
  std::string out;
  auto exp_str = [](Exponent e) {
    return e.is_infinite() ? std::string("inf") : std::to_string(e.value());
  };
  if (default_ != Exponent::finite(0)) out = "rest^" + exp_str(default_);
  for (const auto& [p, e] : exceptions_) {
    if (!out.empty()) out += "*";
    out += std::to_string(p);
    if (e != Exponent::finite(1)) out += "^" + exp_str(e);
  }
  return out.empty() ? "1" : out;
}

inline std::string ScaledSteinitz::to_string() const {
  if (scale_ == 1) return base_.to_string();
  return stz::to_string(scale_) + " * " + base_.to_string();
}

}  // namespace stz
