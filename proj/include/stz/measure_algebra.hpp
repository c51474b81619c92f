#pragma once

#include "stz/steinitz.hpp"

#include <boost/dynamic_bitset.hpp>

#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

namespace stz {

using AtomSet = boost::dynamic_bitset<>;

// Finite Boolean algebra with a strictly positive measure on atoms.
class MeasureAlgebra {
 public:
  explicit MeasureAlgebra(std::vector<Rational> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw std::domain_error("MeasureAlgebra: needs at least one atom");
    for (const auto& w : weights_)
      if (w <= 0) throw std::domain_error("MeasureAlgebra: atom weights must be positive");
    uniform_ = std::all_of(weights_.begin(), weights_.end(),
                           [&](const Rational& w) { return w == weights_[0]; });
    total_ = std::accumulate(weights_.begin(), weights_.end(), Rational(0));
  }

  // St_n: n atoms of weight 1/n.
  static std::shared_ptr<const MeasureAlgebra> standard(std::size_t n) {
    if (n == 0) throw std::domain_error("standard algebra needs n >= 1");
    return std::make_shared<const MeasureAlgebra>(std::vector<Rational>(n, Rational(1, n)));
  }

  std::size_t atom_count() const { return weights_.size(); }
  const std::vector<Rational>& weights() const { return weights_; }
  const Rational& weight(std::size_t atom) const { return weights_.at(atom); }
  const Rational& total() const { return total_; }
  bool is_uniform() const { return uniform_; }
  bool is_standard() const { return uniform_ && total_ == 1; }

  friend bool operator==(const MeasureAlgebra& a, const MeasureAlgebra& b) {
    return a.weights_ == b.weights_;
  }
  friend bool operator!=(const MeasureAlgebra& a, const MeasureAlgebra& b) { return !(a == b); }

 private:
  std::vector<Rational> weights_;
  Rational total_;
  bool uniform_;
};

using AlgebraPtr = std::shared_ptr<const MeasureAlgebra>;

// Element of a MeasureAlgebra, i.e. a set of its atoms.
class Element {
 public:
  Element(AlgebraPtr algebra, AtomSet atoms) : algebra_(std::move(algebra)), atoms_(std::move(atoms)) {
    if (!algebra_) throw std::domain_error("Element: null algebra");
    if (atoms_.size() != algebra_->atom_count()) throw std::domain_error("Element: atom set size mismatch");
  }

  static Element zero(AlgebraPtr algebra) {
    AtomSet s(algebra->atom_count());
    return Element(std::move(algebra), std::move(s));
  }
  static Element top(AlgebraPtr algebra) {
    AtomSet s(algebra->atom_count());
    s.set();
    return Element(std::move(algebra), std::move(s));
  }
  static Element atom(AlgebraPtr algebra, std::size_t index) {
    AtomSet s(algebra->atom_count());
    s.set(index);
    return Element(std::move(algebra), std::move(s));
  }
  // Bit string "0110...", atom 1 first.
  static Element from_bits(AlgebraPtr algebra, std::string_view bits) {
    if (bits.size() != algebra->atom_count()) throw std::invalid_argument("element bits: length mismatch");
    AtomSet s(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1')
        s.set(i);
      else if (bits[i] != '0')
        throw std::invalid_argument("element bits: expected 0/1");
    }
    return Element(std::move(algebra), std::move(s));
  }

  const AlgebraPtr& algebra() const { return algebra_; }
  const AtomSet& atoms() const { return atoms_; }
  std::size_t count() const { return atoms_.count(); }
  bool is_zero() const { return atoms_.none(); }
  bool is_top() const { return atoms_.all(); }

  std::vector<std::uint32_t> atom_indices() const {
    std::vector<std::uint32_t> out;
    out.reserve(count());
    for (std::size_t i = atoms_.find_first(); i != AtomSet::npos; i = atoms_.find_next(i))
      out.push_back(static_cast<std::uint32_t>(i));
    return out;
  }

  std::string to_bits() const {
    std::string s(atoms_.size(), '0');
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      if (atoms_.test(i)) s[i] = '1';
    return s;
  }

  friend bool operator==(const Element& a, const Element& b) {
    return *a.algebra_ == *b.algebra_ && a.atoms_ == b.atoms_;
  }
  friend bool operator!=(const Element& a, const Element& b) { return !(a == b); }

 private:
  AlgebraPtr algebra_;
  AtomSet atoms_;
};

inline void require_same_algebra(const Element& a, const Element& b) {
  if (a.algebra() != b.algebra() && *a.algebra() != *b.algebra())
    throw std::domain_error("elements belong to different algebras");
}

// Boolean ring operations: addition is symmetric difference, multiplication
// is intersection.
inline Element elem_add(const Element& a, const Element& b) {
  require_same_algebra(a, b);
  return Element(a.algebra(), a.atoms() ^ b.atoms());
}

inline Element elem_mul(const Element& a, const Element& b) {
  require_same_algebra(a, b);
  return Element(a.algebra(), a.atoms() & b.atoms());
}

inline Element elem_or(const Element& a, const Element& b) {
  require_same_algebra(a, b);
  return Element(a.algebra(), a.atoms() | b.atoms());
}

inline Element elem_not(const Element& a) { return Element(a.algebra(), ~a.atoms()); }

inline bool elem_leq(const Element& a, const Element& b) {
  require_same_algebra(a, b);
  return a.atoms().is_subset_of(b.atoms());
}

inline Rational measure_of(const Element& a) {
  const MeasureAlgebra& alg = *a.algebra();
  if (alg.is_uniform()) return alg.weight(0) * static_cast<std::uint64_t>(a.count());
  Rational m = 0;
  for (std::size_t i = a.atoms().find_first(); i != AtomSet::npos; i = a.atoms().find_next(i))
    m += alg.weight(i);
  return m;
}

// Measure metric d(a, b) = mu(a xor b).
inline Rational distance(const Element& a, const Element& b) { return measure_of(elem_add(a, b)); }

// Corner algebra at a nonzero element h: atoms of h with inherited weights.
// parent_atoms[i] is the parent index of corner atom i.
struct Corner {
  AlgebraPtr algebra;
  std::vector<std::uint32_t> parent_atoms;

  Element restrict(const Element& parent_elem) const {
    AtomSet s(parent_atoms.size());
    std::size_t found = 0;
    for (std::size_t i = 0; i < parent_atoms.size(); ++i)
      if (parent_elem.atoms().test(parent_atoms[i])) {
        s.set(i);
        ++found;
      }
    if (found != parent_elem.atoms().count())
      throw std::domain_error("Corner::restrict: element is not below the corner");
    return Element(algebra, std::move(s));
  }
  Element embed(AlgebraPtr parent, const Element& corner_elem) const {
    AtomSet s(parent->atom_count());
    for (std::size_t i = 0; i < parent_atoms.size(); ++i)
      if (corner_elem.atoms().test(i)) s.set(parent_atoms[i]);
    return Element(std::move(parent), std::move(s));
  }
};

inline Corner corner_algebra(const Element& h) {
  if (h.is_zero()) throw std::domain_error("corner_algebra: corner at zero");
  std::vector<std::uint32_t> idx = h.atom_indices();
  std::vector<Rational> w;
  w.reserve(idx.size());
  for (std::uint32_t i : idx) w.push_back(h.algebra()->weight(i));
  return Corner{std::make_shared<const MeasureAlgebra>(std::move(w)), std::move(idx)};
}

// Steinitz invariant of a corner, given the invariant of the ambient algebra
// and the normalized measure of the corner element.
inline ScaledSteinitz corner_steinitz(const ScaledSteinitz& st, const Rational& mu_h) {
  if (mu_h <= 0 || mu_h > 1) throw std::domain_error("corner_steinitz: measure must lie in (0, 1]");
  return scale_by(st, mu_h);
}

// Tensor product: atom (i, j) of A (x) B gets index i * B.atom_count() + j and
// weight w_A(i) * w_B(j).
inline AlgebraPtr tensor_algebra(const AlgebraPtr& a, const AlgebraPtr& b) {
  std::vector<Rational> w;
  w.reserve(a->atom_count() * b->atom_count());
  for (const auto& wa : a->weights())
    for (const auto& wb : b->weights()) w.push_back(wa * wb);
  return std::make_shared<const MeasureAlgebra>(std::move(w));
}

inline Element tensor_element(const AlgebraPtr& prod, const Element& a, const Element& b) {
  std::size_t nb = b.algebra()->atom_count();
  AtomSet s(prod->atom_count());
  for (std::size_t i = a.atoms().find_first(); i != AtomSet::npos; i = a.atoms().find_next(i))
    for (std::size_t j = b.atoms().find_first(); j != AtomSet::npos; j = b.atoms().find_next(j))
      s.set(i * nb + j);
  return Element(prod, std::move(s));
}

// Measure-scaling bijection of atoms: target weight = alpha * source weight
// under bijection[i]. alpha is forced to mu2(top) / mu1(top).
struct ScalarEquivalence {
  Rational alpha;
  std::vector<std::uint32_t> bijection;
};

inline std::optional<ScalarEquivalence> scalar_equivalent(const MeasureAlgebra& a, const MeasureAlgebra& b) {
  if (a.atom_count() != b.atom_count()) return std::nullopt;
  Rational alpha = b.total() / a.total();
  std::size_t n = a.atom_count();
  std::vector<std::uint32_t> ia(n), ib(n);
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  auto by_weight = [](const std::vector<Rational>& w) {
    return [&w](std::uint32_t x, std::uint32_t y) { return w[x] != w[y] ? w[x] < w[y] : x < y; };
  };
  std::sort(ia.begin(), ia.end(), by_weight(a.weights()));
  std::sort(ib.begin(), ib.end(), by_weight(b.weights()));
  std::vector<std::uint32_t> bij(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (b.weight(ib[k]) != alpha * a.weight(ia[k])) return std::nullopt;
    bij[ia[k]] = ib[k];
  }
  return ScalarEquivalence{std::move(alpha), std::move(bij)};
}

// Injective measure-scaling homomorphism between algebras, given by pairwise
// disjoint nonempty images of source atoms. mu_t(image(i)) = lambda * w_s(i).
class AtomMap {
 public:
  AtomMap(AlgebraPtr source, AlgebraPtr target, std::vector<std::vector<std::uint32_t>> images)
      : source_(std::move(source)), target_(std::move(target)), images_(std::move(images)) {
    if (images_.size() != source_->atom_count()) throw std::domain_error("AtomMap: one image per source atom");
    AtomSet seen(target_->atom_count());
    for (auto& img : images_) {
      if (img.empty()) throw std::domain_error("AtomMap: empty atom image");
      std::sort(img.begin(), img.end());
      for (std::uint32_t t : img) {
        if (t >= target_->atom_count()) throw std::domain_error("AtomMap: image atom out of range");
        if (seen.test(t)) throw std::domain_error("AtomMap: atom images overlap");
        seen.set(t);
      }
    }
    lambda_ = image_measure(0) / source_->weight(0);
    for (std::size_t i = 1; i < images_.size(); ++i)
      if (image_measure(i) != lambda_ * source_->weight(i))
        throw std::domain_error("AtomMap: measure scaling is not constant across atoms");
  }

  static AtomMap identity(AlgebraPtr algebra) {
    std::vector<std::vector<std::uint32_t>> img(algebra->atom_count());
    for (std::uint32_t i = 0; i < algebra->atom_count(); ++i) img[i] = {i};
    return AtomMap(algebra, algebra, std::move(img));
  }

  const AlgebraPtr& source() const { return source_; }
  const AlgebraPtr& target() const { return target_; }
  const Rational& lambda() const { return lambda_; }
  const std::vector<std::uint32_t>& image_of(std::size_t atom) const { return images_.at(atom); }
  const std::vector<std::vector<std::uint32_t>>& images() const { return images_; }

  bool covers_target() const {
    std::size_t n = 0;
    for (const auto& img : images_) n += img.size();
    return n == target_->atom_count();
  }

  bool is_permutation() const {
    if (source_->atom_count() != target_->atom_count()) return false;
    for (const auto& img : images_)
      if (img.size() != 1) return false;
    return true;
  }

  Element push(const Element& x) const {
    AtomSet s(target_->atom_count());
    for (std::size_t i = x.atoms().find_first(); i != AtomSet::npos; i = x.atoms().find_next(i))
      for (std::uint32_t t : images_[i]) s.set(t);
    return Element(target_, std::move(s));
  }

  // Preimage when x is exactly a union of atom images.
  std::optional<Element> pull(const Element& x) const {
    AtomSet s(source_->atom_count());
    std::size_t covered = 0;
    for (std::size_t i = 0; i < images_.size(); ++i) {
      bool all = true;
      for (std::uint32_t t : images_[i])
        if (!x.atoms().test(t)) {
          all = false;
          break;
        }
      if (all) {
        s.set(i);
        covered += images_[i].size();
      }
    }
    if (covered != x.count()) return std::nullopt;
    return Element(source_, std::move(s));
  }

  // Composition source -> target -> next.target.
  AtomMap then(const AtomMap& next) const {
    if (*next.source_ != *target_) throw std::domain_error("AtomMap: composition mismatch");
    std::vector<std::vector<std::uint32_t>> img(images_.size());
    for (std::size_t i = 0; i < images_.size(); ++i)
      for (std::uint32_t mid : images_[i])
        for (std::uint32_t t : next.images_[mid]) img[i].push_back(t);
    return AtomMap(source_, next.target_, std::move(img));
  }

 private:
  Rational image_measure(std::size_t i) const {
    Rational m = 0;
    for (std::uint32_t t : images_[i]) m += target_->weight(t);
    return m;
  }

  AlgebraPtr source_;
  AlgebraPtr target_;
  std::vector<std::vector<std::uint32_t>> images_;
  Rational lambda_;
};

// Block embedding of standard algebras: atom i of St_n goes to the i-th block
// of c = m / n consecutive atoms of St_m.
inline AtomMap standard_embedding(const AlgebraPtr& src, const AlgebraPtr& tgt) {
  if (!src->is_standard() || !tgt->is_standard())
    throw std::domain_error("standard_embedding: both algebras must be standard");
  std::size_t n = src->atom_count(), m = tgt->atom_count();
  if (m % n != 0) throw std::domain_error("standard_embedding: atom counts must divide");
  std::size_t c = m / n;
  std::vector<std::vector<std::uint32_t>> img(n);
  for (std::size_t i = 0; i < n; ++i) {
    img[i].reserve(c);
    for (std::size_t t = 0; t < c; ++t) img[i].push_back(static_cast<std::uint32_t>(i * c + t));
  }
  return AtomMap(src, tgt, std::move(img));
}

inline bool is_standard_block_embedding(const AtomMap& f) {
  if (!f.source()->is_standard() || !f.target()->is_standard()) return false;
  std::size_t n = f.source()->atom_count(), m = f.target()->atom_count();
  if (m % n != 0) return false;
  std::size_t c = m / n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& img = f.image_of(i);
    if (img.size() != c) return false;
    for (std::size_t t = 0; t < c; ++t)
      if (img[t] != i * c + t) return false;
  }
  return true;
}

// Extends an atom permutation of St_n along the standard block embedding into
// St_m, permuting blocks wholesale: atom i*c + t goes to perm(i)*c + t.
inline AtomMap extend_automorphism(const AtomMap& perm, const AtomMap& emb) {
  if (!perm.is_permutation() || *perm.source() != *perm.target())
    throw std::domain_error("extend_automorphism: first argument must be an automorphism");
  if (*perm.source() != *emb.source())
    throw std::domain_error("extend_automorphism: automorphism and embedding sources differ");
  if (!is_standard_block_embedding(emb))
    throw std::domain_error("extend_automorphism: embedding must be a standard block embedding");
  std::size_t n = emb.source()->atom_count(), m = emb.target()->atom_count();
  std::size_t c = m / n;
  std::vector<std::vector<std::uint32_t>> img(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t j = perm.image_of(i)[0];
    for (std::size_t t = 0; t < c; ++t) img[i * c + t] = {static_cast<std::uint32_t>(j * c + t)};
  }
  return AtomMap(emb.target(), emb.target(), std::move(img));
}

// Automorphism of a standard algebra carrying a to b (and the complement to
// the complement), matching atoms in index order.
inline AtomMap mapping_automorphism(const Element& a, const Element& b) {
  require_same_algebra(a, b);
  if (!a.algebra()->is_standard())
    throw std::domain_error("mapping_automorphism: algebra must be standard");
  if (a.count() != b.count())
    throw std::domain_error("mapping_automorphism: elements have different measures");
  std::size_t n = a.algebra()->atom_count();
  std::vector<std::vector<std::uint32_t>> img(n);
  auto match = [&](const AtomSet& from, const AtomSet& to) {
    std::size_t j = to.find_first();
    for (std::size_t i = from.find_first(); i != AtomSet::npos; i = from.find_next(i)) {
      img[i] = {static_cast<std::uint32_t>(j)};
      j = to.find_next(j);
    }
  };
  match(a.atoms(), b.atoms());
  match(~a.atoms(), ~b.atoms());
  return AtomMap(a.algebra(), a.algebra(), std::move(img));
}

// Spectrum of a standard St_n: the corner sizes 1..n.
inline std::vector<BigInt> finite_spectrum(const MeasureAlgebra& alg) {
  if (!alg.is_standard()) throw std::domain_error("finite_spectrum: algebra must be standard");
  std::vector<BigInt> out;
  out.reserve(alg.atom_count());
  for (std::size_t k = 1; k <= alg.atom_count(); ++k) out.emplace_back(k);
  return out;
}

}  // namespace stz
