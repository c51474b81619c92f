#pragma once

#include "stz/steinitz.hpp"

#include <functional>
#include <string>
#include <vector>

namespace stz {

// Description of the set of corner invariants of one of the model algebras:
//   Fin(n)      naturals 1..n
//   S(inf; s)   all (a/b) s with b dividing s
//   S(r; s)     those with a/b <= r
//   S+(r; s)    those with a/b < r
class SpectrumDescriptor {
 public:
  enum class Kind { Finite, Unbounded, BoundedClosed, BoundedOpen };

  static SpectrumDescriptor finite(BigInt n) {
    if (n < 1) throw std::domain_error("spectrum Fin(n): n >= 1 required");
    SpectrumDescriptor d;
    d.kind_ = Kind::Finite;
    d.n_ = std::move(n);
    return d;
  }

  static SpectrumDescriptor unbounded(SteinitzNumber s) {
    if (!s.is_infinite()) throw std::domain_error("spectrum S(inf; s): s must be infinite");
    SpectrumDescriptor d;
    d.kind_ = Kind::Unbounded;
    d.base_ = std::move(s);
    return d;
  }

  static SpectrumDescriptor bounded_closed(Rational r, SteinitzNumber s) {
    if (r < 1) throw std::domain_error("spectrum S(r; s): r >= 1 required");
    if (!s.is_infinite()) throw std::domain_error("spectrum S(r; s): s must be infinite");
    SpectrumDescriptor d;
    d.kind_ = Kind::BoundedClosed;
    d.ratio_ = std::move(r);
    d.base_ = std::move(s);
    return d;
  }

  // The bound itself must be a possible value, i.e. denominator(r) divides s;
  // otherwise the open and closed sets coincide and the closed form is the
  // canonical one.
  static SpectrumDescriptor bounded_open(Rational r, SteinitzNumber s) {
    if (r < 1) throw std::domain_error("spectrum S+(r; s): r >= 1 required");
    if (!s.is_infinite()) throw std::domain_error("spectrum S+(r; s): s must be infinite");
    if (!nat_divides(denominator(r), s))
      throw std::domain_error("spectrum S+(r; s): denominator of r must divide s");
    SpectrumDescriptor d;
    d.kind_ = Kind::BoundedOpen;
    d.ratio_ = std::move(r);
    d.base_ = std::move(s);
    return d;
  }

  Kind kind() const { return kind_; }
  bool is_bounded() const { return kind_ == Kind::BoundedClosed || kind_ == Kind::BoundedOpen; }

  const BigInt& bound_n() const {
    if (kind_ != Kind::Finite) throw std::domain_error("bound_n: not a finite spectrum");
    return n_;
  }
  const Rational& ratio() const {
    if (!is_bounded()) throw std::domain_error("ratio: not a bounded spectrum");
    return ratio_;
  }
  const SteinitzNumber& base() const {
    if (kind_ == Kind::Finite) throw std::domain_error("base: finite spectrum has no base");
    return base_;
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Finite:
        return "Fin(" + stz::to_string(n_) + ")";
      case Kind::Unbounded:
        return "S(inf; " + base_.to_string() + ")";
      case Kind::BoundedClosed:
        return "S(" + stz::to_string(ratio_) + "; " + base_.to_string() + ")";
      case Kind::BoundedOpen:
        return "S+(" + stz::to_string(ratio_) + "; " + base_.to_string() + ")";
    }
    throw std::logic_error("unreachable");
  }

 private:
  SpectrumDescriptor() = default;

  Kind kind_ = Kind::Finite;
  BigInt n_ = 1;
  Rational ratio_ = 1;
  SteinitzNumber base_;
};

// Whether the value t belongs to the described set. Reduction: express t over
// the descriptor base as t = (a/b) s in lowest terms; then b divides s exactly
// when t is a possible value, and only the size condition on a/b remains.
inline bool member(const ScaledSteinitz& t, const SpectrumDescriptor& d) {
  if (d.kind() == SpectrumDescriptor::Kind::Finite) {
    auto q = rationally_connected(t.base(), SteinitzNumber::one());
    if (!q) return false;
    Rational v = t.scale() * *q;
    return is_integer(v) && numerator(v) >= 1 && numerator(v) <= d.bound_n();
  }
  auto q = rationally_connected(t.base(), d.base());
  if (!q) return false;
  Rational v = t.scale() * *q;
  if (!nat_divides(denominator(v), d.base())) return false;
  switch (d.kind()) {
    case SpectrumDescriptor::Kind::Unbounded:
      return true;
    case SpectrumDescriptor::Kind::BoundedClosed:
      return v <= d.ratio();
    case SpectrumDescriptor::Kind::BoundedOpen:
      return v < d.ratio();
    default:
      throw std::logic_error("unreachable");
  }
}

// Membership under an irrational bound r, supplied as a comparator returning
// sign(q - r); it must never return 0. Strict and non-strict membership agree
// there, so one predicate covers S(r; s) and S+(r; s).
using RealBoundComparator = std::function<int(const Rational&)>;

inline bool member_real_bound(const ScaledSteinitz& t, const SteinitzNumber& s,
                              const RealBoundComparator& against_bound) {
  if (!s.is_infinite()) throw std::domain_error("member_real_bound: s must be infinite");
  auto q = rationally_connected(t.base(), s);
  if (!q) return false;
  Rational v = t.scale() * *q;
  if (!nat_divides(denominator(v), s)) return false;
  return against_bound(v) < 0;
}

// Comparator from nested rational intervals shrinking to the bound;
// interval(k+1) must be contained in interval(k).
inline RealBoundComparator interval_comparator(
    std::function<std::pair<Rational, Rational>(unsigned)> interval) {
  return [interval = std::move(interval)](const Rational& q) -> int {
    for (unsigned k = 0; k < 64; ++k) {
      auto [lo, hi] = interval(k);
      if (q < lo) return -1;
      if (q > hi) return 1;
      if (lo == hi) return q < lo ? -1 : (q > lo ? 1 : 0);
    }
    throw std::domain_error("interval_comparator: intervals did not separate the query");
  };
}

// Complete invariant for equality of described sets.
struct CanonicalInvariant {
  enum class Kind { Finite, Bounded, Unbounded };

  Kind kind = Kind::Finite;
  BigInt n = 1;              // Finite
  SteinitzNumber class_rep;  // Bounded / Unbounded
  Rational r_star = 1;       // Bounded: the bound expressed over class_rep
  bool attained = false;     // Bounded: whether r_star * class_rep is in the set

  friend bool operator==(const CanonicalInvariant& a, const CanonicalInvariant& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Finite:
        return a.n == b.n;
      case Kind::Unbounded:
        return a.class_rep == b.class_rep;
      case Kind::Bounded:
        return a.class_rep == b.class_rep && a.r_star == b.r_star && a.attained == b.attained;
    }
    return false;
  }
  friend bool operator!=(const CanonicalInvariant& a, const CanonicalInvariant& b) { return !(a == b); }

  std::string to_string() const {
    switch (kind) {
      case Kind::Finite:
        return "finite n=" + stz::to_string(n);
      case Kind::Unbounded:
        return "unbounded class=" + class_rep.to_string();
      case Kind::Bounded:
        return "bounded class=" + class_rep.to_string() + " r*=" + stz::to_string(r_star) +
               " attained=" + (attained ? "true" : "false");
    }
    throw std::logic_error("unreachable");
  }
};

inline CanonicalInvariant canonicalize(const SpectrumDescriptor& d) {
  CanonicalInvariant inv;
  switch (d.kind()) {
    case SpectrumDescriptor::Kind::Finite:
      inv.kind = CanonicalInvariant::Kind::Finite;
      inv.n = d.bound_n();
      return inv;
    case SpectrumDescriptor::Kind::Unbounded:
      inv.kind = CanonicalInvariant::Kind::Unbounded;
      inv.class_rep = class_representative(d.base());
      return inv;
    case SpectrumDescriptor::Kind::BoundedClosed:
    case SpectrumDescriptor::Kind::BoundedOpen: {
      inv.kind = CanonicalInvariant::Kind::Bounded;
      inv.class_rep = class_representative(d.base());
      Rational g = *rationally_connected(d.base(), inv.class_rep);
      inv.r_star = d.ratio() * g;
      inv.attained = d.kind() == SpectrumDescriptor::Kind::BoundedClosed &&
                     nat_divides(denominator(inv.r_star), inv.class_rep);
      return inv;
    }
  }
  throw std::logic_error("unreachable");
}

// Deterministic membership probes drawn from the descriptor: small divisors b
// of the base paired with scales around the bound.
inline std::vector<ScaledSteinitz> descriptor_samples(const SpectrumDescriptor& d, std::size_t count) {
  std::vector<ScaledSteinitz> out;
  auto push = [&](ScaledSteinitz t) {
    for (const auto& u : out)
      if (u == t) return;
    if (out.size() < count) out.push_back(std::move(t));
  };
  if (d.kind() == SpectrumDescriptor::Kind::Finite) {
    for (BigInt k = 1; k <= d.bound_n() + 2 && out.size() < count; ++k)
      push(ScaledSteinitz(Rational(k), SteinitzNumber::one()));
    return out;
  }
  const SteinitzNumber& s = d.base();
  for (const BigInt& b : divisors_up_to(s, 4096)) {
    if (out.size() >= count) break;
    if (d.kind() == SpectrumDescriptor::Kind::Unbounded) {
      push(ScaledSteinitz(Rational(1, b), s));
      push(ScaledSteinitz(Rational(b + 1, b), s));
      push(ScaledSteinitz(Rational(7, b), s));
    } else {
      BigInt a0 = floor_to_int(d.ratio() * b);
      push(ScaledSteinitz(Rational(1, b), s));
      if (a0 >= 2) push(ScaledSteinitz(Rational(a0 - 1, b), s));
      push(ScaledSteinitz(Rational(a0, b), s));
      push(ScaledSteinitz(Rational(a0 + 1, b), s));
    }
  }
  return out;
}

// Equality of described sets, decided by canonical invariants and
// cross-checked by membership agreement on samples from both sides.
inline bool spectra_equal(const SpectrumDescriptor& d1, const SpectrumDescriptor& d2) {
  bool eq = canonicalize(d1) == canonicalize(d2);
  if (eq) {
    std::vector<ScaledSteinitz> probes = descriptor_samples(d1, 32);
    for (auto& t : descriptor_samples(d2, 32)) probes.push_back(std::move(t));
    for (const auto& t : probes)
      if (member(t, d1) != member(t, d2))
        throw std::logic_error("spectra_equal: canonical invariants contradict membership");
  }
  return eq;
}

// A value in exactly one of the two described sets, when one can be found by
// the deterministic probe search.
inline std::optional<ScaledSteinitz> separating_witness(const SpectrumDescriptor& d1,
                                                        const SpectrumDescriptor& d2) {
  std::vector<ScaledSteinitz> probes = descriptor_samples(d1, 64);
  for (auto& t : descriptor_samples(d2, 64)) probes.push_back(std::move(t));
  for (const auto& t : probes)
    if (member(t, d1) != member(t, d2)) return t;
  // Same class, different bounds: scan divisor denominators for a value
  // between the bounds.
  if (d1.is_bounded() && d2.is_bounded()) {
    for (const BigInt& b : divisors_up_to(class_representative(d1.base()), 65536)) {
      CanonicalInvariant c1 = canonicalize(d1), c2 = canonicalize(d2);
      if (c1.class_rep != c2.class_rep) break;
      Rational lo = c1.r_star < c2.r_star ? c1.r_star : c2.r_star;
      Rational hi = c1.r_star < c2.r_star ? c2.r_star : c1.r_star;
      for (BigInt a = floor_to_int(hi * b); a >= 1 && a > floor_to_int(lo * b) - 2; --a) {
        if (a <= 0) break;
        ScaledSteinitz t(Rational(a, b), c1.class_rep);
        if (member(t, d1) != member(t, d2)) return t;
      }
    }
  }
  return std::nullopt;
}

// Saturation of a set of values, probed on the given samples:
//   1. members are pairwise rationally connected;
//   2. closed under division by naturals dividing the value;
//   3. t, n*t in the set forces k*t in the set for 1 <= k <= n.
struct SaturationOptions {
  std::uint64_t divisor_bound = 64;
  std::uint64_t interpolation_cap = 64;
};

struct SaturationViolation {
  std::string axiom;  // "connectedness" | "division" | "interpolation"
  std::string detail;
};

struct SaturationReport {
  std::vector<SaturationViolation> violations;
  bool ok() const { return violations.empty(); }
};

using MembershipPredicate = std::function<bool(const ScaledSteinitz&)>;

inline SaturationReport saturated_check(const MembershipPredicate& in_set,
                                        const std::vector<ScaledSteinitz>& samples,
                                        const SaturationOptions& opts = {}) {
  SaturationReport report;
  std::vector<ScaledSteinitz> members;
  for (const auto& t : samples)
    if (in_set(t)) members.push_back(t);

  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      if (!rationally_connected(members[i].base(), members[j].base()) ||
          class_representative(members[i].base()) != class_representative(members[j].base()))
        report.violations.push_back({"connectedness", members[i].to_string() + " vs " + members[j].to_string()});

  for (const auto& t : members)
    for (const BigInt& b : divisors_up_to(t.raw_value(), opts.divisor_bound)) {
      if (b == 1) continue;
      ScaledSteinitz u(t.scale() / Rational(b), t.base());
      if (!in_set(u))
        report.violations.push_back({"division", t.to_string() + " / " + stz::to_string(b)});
    }

  for (const auto& t1 : members)
    for (const auto& t2 : members) {
      auto q = rationally_connected(t2.base(), t1.base());
      if (!q) continue;
      Rational ratio = t2.scale() * *q / t1.scale();
      if (!is_integer(ratio) || numerator(ratio) < 3) continue;
      BigInt n = numerator(ratio);
      std::vector<BigInt> ks;
      if (n - 1 <= opts.interpolation_cap) {
        for (BigInt k = 2; k < n; ++k) ks.push_back(k);
      } else {
        for (BigInt k = 2; k <= opts.interpolation_cap; ++k) ks.push_back(k);
        ks.push_back(n - 1);
      }
      for (const BigInt& k : ks)
        if (!in_set(scale_by(t1, Rational(k))))
          report.violations.push_back(
              {"interpolation", stz::to_string(k) + " * " + t1.to_string() + " missing between 1x and " +
                                    stz::to_string(n) + "x"});
    }
  return report;
}

// Spectrum of the canonical unital algebra with invariant s.
inline SpectrumDescriptor unital_spectrum(const SteinitzNumber& s) {
  if (s.is_natural()) return SpectrumDescriptor::finite(s.to_integer());
  return SpectrumDescriptor::bounded_closed(1, s);
}

// Unit existence from the spectrum shape: finite spectra and attained bounds
// only.
inline bool unitality_criterion(const SpectrumDescriptor& d) {
  switch (d.kind()) {
    case SpectrumDescriptor::Kind::Finite:
      return true;
    case SpectrumDescriptor::Kind::Unbounded:
      return false;
    default:
      return canonicalize(d).attained;
  }
}

}  // namespace stz
