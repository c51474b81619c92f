#pragma once

#include "stz/measure_algebra.hpp"
#include "stz/steinitz.hpp"

#include <boost/dynamic_bitset.hpp>

#include <numeric>
#include <set>
#include <string>

namespace stz {

// Periodic 0/1 word on positions 1, 2, 3, ... stored over its minimal period.
class PeriodicWord {
 public:
  PeriodicWord() : bits_(1) {}  // the zero word

  static PeriodicWord from_bits(std::size_t period, AtomSet bits) {
    if (period == 0 || bits.size() != period) throw std::domain_error("PeriodicWord: bad period");
    PeriodicWord w;
    w.bits_ = std::move(bits);
    w.normalize();
    return w;
  }

  static PeriodicWord zero() { return PeriodicWord(); }
  static PeriodicWord one(std::size_t period = 1) {
    AtomSet b(period);
    b.set();
    return from_bits(period, std::move(b));
  }

  std::size_t period() const { return bits_.size(); }
  const AtomSet& bits() const { return bits_; }
  // Bit at 1-based position.
  bool at(std::uint64_t position) const {
    if (position == 0) throw std::domain_error("PeriodicWord: positions start at 1");
    return bits_.test((position - 1) % bits_.size());
  }
  bool is_zero() const { return bits_.none(); }

  std::size_t popcount() const { return bits_.count(); }

  friend bool operator==(const PeriodicWord& a, const PeriodicWord& b) { return a.bits_ == b.bits_; }
  friend bool operator!=(const PeriodicWord& a, const PeriodicWord& b) { return !(a == b); }

  std::string to_string() const {
    std::string s = std::to_string(period()) + ":";
    for (std::size_t i = 0; i < period(); ++i) s += bits_.test(i) ? '1' : '0';
    return s;
  }

 private:
  // Shrink to the minimal period (smallest divisor d such that the word is
  // d-periodic).
  void normalize() {
    std::size_t k = bits_.size();
    for (std::size_t d = 1; d < k; ++d) {
      if (k % d != 0) continue;
      bool periodic = true;
      for (std::size_t i = d; i < k && periodic; ++i) periodic = bits_.test(i) == bits_.test(i % d);
      if (periodic) {
        AtomSet small(d);
        for (std::size_t i = 0; i < d; ++i)
          if (bits_.test(i)) small.set(i);
        bits_ = std::move(small);
        return;
      }
    }
  }

  AtomSet bits_;
};

namespace detail {
inline PeriodicWord pw_combine(const PeriodicWord& a, const PeriodicWord& b, bool use_xor) {
  std::size_t k = std::lcm(a.period(), b.period());
  AtomSet bits(k);
  for (std::size_t i = 0; i < k; ++i) {
    bool x = a.at(i + 1), y = b.at(i + 1);
    if (use_xor ? (x != y) : (x && y)) bits.set(i);
  }
  return PeriodicWord::from_bits(k, std::move(bits));
}
}  // namespace detail

inline PeriodicWord pw_add(const PeriodicWord& a, const PeriodicWord& b) {
  return detail::pw_combine(a, b, true);
}
inline PeriodicWord pw_mul(const PeriodicWord& a, const PeriodicWord& b) {
  return detail::pw_combine(a, b, false);
}

// Density: ones per period.
inline Rational pw_measure(const PeriodicWord& w) {
  return Rational(w.popcount(), w.period());
}

inline Rational pw_distance(const PeriodicWord& a, const PeriodicWord& b) {
  return pw_measure(pw_add(a, b));
}

// Whether w lies in the algebra of words with period dividing u.
inline bool pw_in_algebra(const PeriodicWord& w, const SteinitzNumber& u) {
  return nat_divides(BigInt(w.period()), u);
}

// Image of St_n inside the periodic-word algebra of u: atom i (0-based) is the
// n-periodic indicator of positions congruent to i + 1 mod n.
class WordEmbedding {
 public:
  WordEmbedding(std::size_t n, SteinitzNumber u) : n_(n), u_(std::move(u)) {
    if (n_ == 0) throw std::domain_error("WordEmbedding: n >= 1");
    if (!nat_divides(BigInt(n_), u_)) throw std::domain_error("WordEmbedding: n must divide u");
  }

  std::size_t source_atoms() const { return n_; }
  const SteinitzNumber& modulus() const { return u_; }

  PeriodicWord atom_word(std::size_t atom) const {
    if (atom >= n_) throw std::domain_error("WordEmbedding: atom out of range");
    AtomSet bits(n_);
    bits.set(atom);
    return PeriodicWord::from_bits(n_, std::move(bits));
  }

  PeriodicWord push(const AtomSet& atoms) const {
    if (atoms.size() != n_) throw std::domain_error("WordEmbedding: atom set size mismatch");
    return PeriodicWord::from_bits(n_, AtomSet(atoms));
  }

  PeriodicWord push(const Element& x) const { return push(x.atoms()); }

 private:
  std::size_t n_;
  SteinitzNumber u_;
};

inline WordEmbedding embed_standard(std::size_t n, const SteinitzNumber& u) {
  return WordEmbedding(n, u);
}

// Finite sets of positions under symmetric difference/intersection, with the
// counting measure. Locally standard pieces, but the measure is unbounded.
using FiniteSupportSet = std::set<std::uint64_t>;

inline FiniteSupportSet fs_add(const FiniteSupportSet& a, const FiniteSupportSet& b) {
  FiniteSupportSet out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::inserter(out, out.end()));
  return out;
}

inline FiniteSupportSet fs_mul(const FiniteSupportSet& a, const FiniteSupportSet& b) {
  FiniteSupportSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

inline Rational fs_measure(const FiniteSupportSet& a) { return Rational(a.size()); }

}  // namespace stz
