#pragma once

#include "stz/measure_algebra.hpp"
#include "stz/spectrum.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stz {

// Reconstruction from a finite prefix could not settle on a descriptor.
struct PrefixInconclusive : std::domain_error {
  using std::domain_error::domain_error;
};

class DominationError : public std::domain_error {
 public:
  enum class Kind {
    ViolatesStLeq,    // target is below the corner invariant of h (or disconnected)
    PrefixTooShort,   // no stage in the prefix realizes the target
  };
  DominationError(Kind kind, const std::string& what) : std::domain_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Increasing sequence of finite measure algebras with measure-scaling
// embeddings. alpha_i renormalizes stage measures into one limit measure:
// mu(x realized at stage i) = mu_i(x) / alpha_i, alpha_1 = 1,
// alpha_{i+1} = alpha_i * lambda_i.
class ChainPresentation {
 public:
  ChainPresentation(std::vector<AlgebraPtr> stages, std::vector<AtomMap> embeddings, bool unital)
      : stages_(std::move(stages)), embeddings_(std::move(embeddings)), unital_(unital) {
    if (stages_.empty()) throw std::domain_error("chain: needs at least one stage");
    if (embeddings_.size() + 1 != stages_.size())
      throw std::domain_error("chain: needs one embedding per adjacent stage pair");
    for (std::size_t i = 0; i < embeddings_.size(); ++i) {
      if (*embeddings_[i].source() != *stages_[i] || *embeddings_[i].target() != *stages_[i + 1])
        throw std::domain_error("chain: embedding endpoints do not match stages");
    }
    alphas_.reserve(stages_.size());
    alphas_.push_back(1);
    for (const auto& f : embeddings_) alphas_.push_back(alphas_.back() * f.lambda());
  }

  std::size_t depth() const { return stages_.size(); }
  bool unital_flag() const { return unital_; }
  // Stages and embeddings are 1-based; embedding(i) maps stage i into i+1.
  const AlgebraPtr& stage(std::size_t i) const { return stages_.at(i - 1); }
  const AtomMap& embedding(std::size_t i) const { return embeddings_.at(i - 1); }
  const Rational& alpha(std::size_t i) const { return alphas_.at(i - 1); }

 private:
  std::vector<AlgebraPtr> stages_;
  std::vector<AtomMap> embeddings_;
  std::vector<Rational> alphas_;
  bool unital_;
};

// Element of the limit algebra, realized at a stage of the presentation.
struct ChainElement {
  std::size_t stage = 1;
  AtomSet atoms;

  std::string to_string() const {
    std::string s = std::to_string(stage) + ":";
    for (std::size_t i = 0; i < atoms.size(); ++i) s += atoms.test(i) ? '1' : '0';
    return s;
  }
};

inline void check_element(const ChainPresentation& c, const ChainElement& x) {
  if (x.stage < 1 || x.stage > c.depth()) throw std::domain_error("chain element: stage out of range");
  if (x.atoms.size() != c.stage(x.stage)->atom_count())
    throw std::domain_error("chain element: atom set does not match stage size");
}

inline Element stage_element(const ChainPresentation& c, const ChainElement& x) {
  check_element(c, x);
  return Element(c.stage(x.stage), x.atoms);
}

inline ChainElement push_to(const ChainPresentation& c, ChainElement x, std::size_t stage) {
  check_element(c, x);
  if (stage < x.stage || stage > c.depth()) throw std::domain_error("push_to: bad target stage");
  Element cur = stage_element(c, x);
  for (std::size_t i = x.stage; i < stage; ++i) cur = c.embedding(i).push(cur);
  return ChainElement{stage, cur.atoms()};
}

inline std::optional<ChainElement> pull_once(const ChainPresentation& c, const ChainElement& x) {
  check_element(c, x);
  if (x.stage == 1) return std::nullopt;
  auto y = c.embedding(x.stage - 1).pull(stage_element(c, x));
  if (!y) return std::nullopt;
  return ChainElement{x.stage - 1, y->atoms()};
}

// Earliest-stage realization of the same limit element.
inline ChainElement minimal_form(const ChainPresentation& c, ChainElement x) {
  while (auto y = pull_once(c, x)) x = *y;
  return x;
}

inline bool chain_elements_equal(const ChainPresentation& c, const ChainElement& x, const ChainElement& y) {
  ChainElement mx = minimal_form(c, x), my = minimal_form(c, y);
  return mx.stage == my.stage && mx.atoms == my.atoms;
}

inline bool chain_elem_leq(const ChainPresentation& c, const ChainElement& x, const ChainElement& y) {
  std::size_t k = std::max(x.stage, y.stage);
  return push_to(c, x, k).atoms.is_subset_of(push_to(c, y, k).atoms);
}

// Limit measure of a realized element.
inline Rational chain_measure(const ChainPresentation& c, const ChainElement& x) {
  return measure_of(stage_element(c, x)) / c.alpha(x.stage);
}

struct ChainValidation {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

inline ChainValidation validate_chain(const ChainPresentation& c) {
  ChainValidation v;
  for (std::size_t i = 1; i < c.depth(); ++i) {
    const AtomMap& f = c.embedding(i);
    if (f.lambda() > 1)
      v.problems.push_back("embedding " + std::to_string(i) + ": measure scale exceeds 1");
    bool covers = f.covers_target();
    if (c.unital_flag() && !covers)
      v.problems.push_back("embedding " + std::to_string(i) + ": unital chain but unit is not preserved");
    if (!c.unital_flag() && covers)
      v.problems.push_back("embedding " + std::to_string(i) + ": unit preserved in a chain marked non-unital");
    // Limit measure must not depend on the realizing stage.
    Element top = Element::top(c.stage(i));
    Rational here = measure_of(top) / c.alpha(i);
    Rational there = measure_of(f.push(top)) / c.alpha(i + 1);
    if (here != there)
      v.problems.push_back("embedding " + std::to_string(i) + ": stage normalizers are inconsistent");
  }
  return v;
}

// Stage sizes b_i for model construction: either geometric (b_i = c^i) or an
// explicit divisor sequence.
class StageSizeRule {
 public:
  static StageSizeRule geometric(BigInt ratio) {
    if (ratio < 1) throw std::domain_error("stage size rule: ratio >= 1 required");
    StageSizeRule r;
    r.ratio_ = std::move(ratio);
    return r;
  }
  static StageSizeRule explicit_list(std::vector<BigInt> values) {
    if (values.empty()) throw std::domain_error("stage size rule: empty list");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] < 1) throw std::domain_error("stage size rule: entries must be positive");
      if (i > 0 && values[i] % values[i - 1] != 0)
        throw std::domain_error("stage size rule: each entry must divide the next");
    }
    StageSizeRule r;
    r.list_ = std::move(values);
    return r;
  }

  bool is_geometric() const { return list_.empty(); }

  BigInt value(std::size_t i) const {  // 1-based
    if (is_geometric()) return int_pow(ratio_, i);
    if (i < 1 || i > list_.size()) throw std::domain_error("stage size rule: index beyond explicit list");
    return list_[i - 1];
  }

  std::string to_string() const {
    if (is_geometric()) return stz::to_string(ratio_) + "^i";
    std::string s;
    for (std::size_t i = 0; i < list_.size(); ++i) {
      if (i) s += ",";
      s += stz::to_string(list_[i]);
    }
    return s;
  }

 private:
  StageSizeRule() = default;
  BigInt ratio_ = 1;
  std::vector<BigInt> list_;
};

inline constexpr std::size_t kMaxStageAtoms = std::size_t{1} << 20;

// A chain presentation together with the symbolic data that produced it:
// the target spectrum, the base s, and per-stage sizes b_i (atoms carry
// measure (1/b_i) s) and m_i (atom count). Stage invariant: (m_i / b_i) s.
class SymbolicChain {
 public:
  SymbolicChain(SpectrumDescriptor target, SteinitzNumber base, StageSizeRule rule,
                std::vector<BigInt> b, std::vector<BigInt> m, ChainPresentation presentation)
      : target_(std::move(target)),
        base_(std::move(base)),
        rule_(std::move(rule)),
        b_(std::move(b)),
        m_(std::move(m)),
        presentation_(std::move(presentation)) {}

  const SpectrumDescriptor& target() const { return target_; }
  const SteinitzNumber& base() const { return base_; }
  const StageSizeRule& rule() const { return rule_; }
  const ChainPresentation& presentation() const { return presentation_; }
  std::size_t depth() const { return presentation_.depth(); }
  const BigInt& stage_b(std::size_t i) const { return b_.at(i - 1); }
  const BigInt& stage_m(std::size_t i) const { return m_.at(i - 1); }

  // Invariant of the full stage-i corner.
  ScaledSteinitz stage_top_invariant(std::size_t i) const {
    return ScaledSteinitz(Rational(stage_m(i), stage_b(i)), base_);
  }

 private:
  SpectrumDescriptor target_;
  SteinitzNumber base_;
  StageSizeRule rule_;
  std::vector<BigInt> b_;
  std::vector<BigInt> m_;
  ChainPresentation presentation_;
};

// Invariant of the corner at a nonzero realized element h: mu_i(h) times the
// stage invariant, which is |h| / b_i over the base.
inline ScaledSteinitz stage_invariant(const SymbolicChain& sc, const ChainElement& h) {
  check_element(sc.presentation(), h);
  if (h.atoms.none()) throw std::domain_error("stage_invariant: corner at zero");
  return ScaledSteinitz(Rational(h.atoms.count(), sc.stage_b(h.stage)), sc.base());
}

// Standard model of a described spectrum, cut at the given depth. Stage i is
// St_{m_i} with atoms of measure (1/b_i) s; the embedding sends atom j to the
// j-th block of b_{i+1}/b_i atoms, leaving any defect at the top end.
inline SymbolicChain construct_model(const SpectrumDescriptor& d, std::size_t depth,
                                     const StageSizeRule& rule) {
  if (depth < 1) throw std::domain_error("construct_model: depth >= 1");
  const bool finite = d.kind() == SpectrumDescriptor::Kind::Finite;
  SteinitzNumber s = finite ? SteinitzNumber::one() : d.base();

  std::vector<BigInt> b(depth), m(depth);
  for (std::size_t i = 1; i <= depth; ++i) {
    b[i - 1] = finite ? BigInt(1) : rule.value(i);
    if (!finite && !nat_divides(b[i - 1], s))
      throw std::domain_error("construct_model: b_" + std::to_string(i) + " does not divide the base");
    if (i > 1 && b[i - 1] % b[i - 2] != 0)
      throw std::domain_error("construct_model: stage sizes must form a divisor chain");
    switch (d.kind()) {
      case SpectrumDescriptor::Kind::Finite:
        m[i - 1] = d.bound_n();
        break;
      case SpectrumDescriptor::Kind::Unbounded:
        m[i - 1] = BigInt(i) * b[i - 1];
        break;
      case SpectrumDescriptor::Kind::BoundedClosed:
        m[i - 1] = floor_to_int(d.ratio() * b[i - 1]);
        break;
      case SpectrumDescriptor::Kind::BoundedOpen: {
        Rational rb = d.ratio() * b[i - 1];
        m[i - 1] = is_integer(rb) ? numerator(rb) - 1 : floor_to_int(rb);
        break;
      }
    }
    if (m[i - 1] < 1)
      throw std::domain_error("construct_model: stage " + std::to_string(i) +
                              " is empty; use a larger b_" + std::to_string(i));
    if (m[i - 1] > kMaxStageAtoms)
      throw std::domain_error("construct_model: stage " + std::to_string(i) + " exceeds the atom limit");
  }

  bool unital = true;
  std::vector<AlgebraPtr> stages;
  stages.reserve(depth);
  for (std::size_t i = 0; i < depth; ++i)
    stages.push_back(MeasureAlgebra::standard(m[i].convert_to<std::size_t>()));

  std::vector<AtomMap> embeddings;
  embeddings.reserve(depth - 1);
  for (std::size_t i = 0; i + 1 < depth; ++i) {
    BigInt c = b[i + 1] / b[i];
    if (m[i] * c > m[i + 1]) throw std::logic_error("construct_model: corner condition failed");
    if (m[i] * c != m[i + 1]) unital = false;
    std::size_t cc = c.convert_to<std::size_t>();
    std::size_t n = m[i].convert_to<std::size_t>();
    std::vector<std::vector<std::uint32_t>> img(n);
    for (std::size_t j = 0; j < n; ++j) {
      img[j].reserve(cc);
      for (std::size_t t = 0; t < cc; ++t) img[j].push_back(static_cast<std::uint32_t>(j * cc + t));
    }
    embeddings.emplace_back(stages[i], stages[i + 1], std::move(img));
  }

  ChainPresentation pres(std::move(stages), std::move(embeddings), unital);
  return SymbolicChain(d, std::move(s), rule, std::move(b), std::move(m), std::move(pres));
}

// Rational with the smallest denominator (then numerator) in [lo, hi].
inline Rational simplest_rational_in(const Rational& lo, const Rational& hi) {
  if (lo > hi) throw std::domain_error("simplest_rational_in: empty interval");
  if (ceil_to_int(lo) <= floor_to_int(hi)) return Rational(ceil_to_int(lo));
  BigInt fl = floor_to_int(lo);
  Rational inner = simplest_rational_in(1 / (hi - fl), 1 / (lo - fl));
  return Rational(fl) + 1 / inner;
}

// Recover the descriptor from the symbolic prefix data (b_i, m_i over base s).
// Precedence: constant m_i/b_i reads as a unital chain; otherwise a bound
// consistent with every stage is fitted; otherwise sustained growth reads as
// the unbounded spectrum. Anything else is inconclusive, never guessed.
inline SpectrumDescriptor symbolic_spectrum(const std::vector<BigInt>& b, const std::vector<BigInt>& m,
                                            const SteinitzNumber& s) {
  std::size_t depth = b.size();
  if (depth == 0 || m.size() != depth) throw std::domain_error("symbolic_spectrum: bad prefix data");
  std::vector<Rational> rho(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    if (b[i] < 1 || m[i] < 1) throw std::domain_error("symbolic_spectrum: bad prefix data");
    rho[i] = Rational(m[i], b[i]);
  }

  bool constant = std::all_of(rho.begin(), rho.end(), [&](const Rational& r) { return r == rho[0]; });
  if (constant) {
    ScaledSteinitz t = ScaledSteinitz(rho[0], s).canonical();
    if (t.base().is_one()) {
      if (!is_integer(t.scale()))
        throw PrefixInconclusive("constant stage invariant is not a natural number");
      return SpectrumDescriptor::finite(numerator(t.scale()));
    }
    if (rho[0] >= 1) return SpectrumDescriptor::bounded_closed(rho[0], s);
    throw PrefixInconclusive("constant stage invariant below 1");
  }

  Rational lo = rho[0], hi = Rational(m[0] + 1, b[0]);
  for (std::size_t i = 1; i < depth; ++i) {
    if (rho[i] > lo) lo = rho[i];
    Rational h = Rational(m[i] + 1, b[i]);
    if (h < hi) hi = h;
  }
  if (lo <= hi && lo >= 1) {
    Rational r = simplest_rational_in(lo, hi);
    bool open_evidence = false, closed_evidence = false, consistent = true;
    for (std::size_t i = 0; i < depth && consistent; ++i) {
      Rational rb = r * b[i];
      if (is_integer(rb)) {
        if (m[i] == numerator(rb) - 1)
          open_evidence = true;
        else if (m[i] == numerator(rb))
          closed_evidence = true;
        else
          consistent = false;
      } else {
        consistent = m[i] == floor_to_int(rb);
      }
    }
    if (consistent && !(open_evidence && closed_evidence)) {
      if (open_evidence) return SpectrumDescriptor::bounded_open(r, s);
      return SpectrumDescriptor::bounded_closed(r, s);
    }
  }

  bool growing = depth >= 2;
  for (std::size_t i = 0; i + 1 < depth && growing; ++i) growing = rho[i + 1] - rho[i] >= 1;
  if (growing) return SpectrumDescriptor::unbounded(s);

  throw PrefixInconclusive("prefix fits no single descriptor");
}

inline SpectrumDescriptor symbolic_spectrum(const SymbolicChain& sc) {
  std::vector<BigInt> b, m;
  for (std::size_t i = 1; i <= sc.depth(); ++i) {
    b.push_back(sc.stage_b(i));
    m.push_back(sc.stage_m(i));
  }
  return symbolic_spectrum(b, m, sc.base());
}

// Smallest realized element above h whose corner invariant equals target.
// Deterministic: earliest stage first, then lowest-index free atoms.
inline ChainElement find_dominating(const SymbolicChain& sc, const ChainElement& h,
                                    const ScaledSteinitz& target) {
  const ChainPresentation& c = sc.presentation();
  check_element(c, h);
  auto q = rationally_connected(target.base(), sc.base());
  if (!q)
    throw DominationError(DominationError::Kind::ViolatesStLeq,
                          "find_dominating: target is not rationally connected to the chain base");
  Rational v = target.scale() * *q;  // target = v * s
  ChainElement start = minimal_form(c, h);
  if (h.atoms.any() && !scaled_leq(stage_invariant(sc, start), target))
    throw DominationError(DominationError::Kind::ViolatesStLeq,
                          "find_dominating: target is below the corner invariant of h");
  for (std::size_t k = start.stage; k <= c.depth(); ++k) {
    ChainElement at_k = push_to(c, start, k);
    Rational need = v * sc.stage_b(k);
    if (!is_integer(need)) continue;
    BigInt want = numerator(need);
    if (want < at_k.atoms.count() || want > sc.stage_m(k)) continue;
    std::size_t take = want.convert_to<std::size_t>() - at_k.atoms.count();
    for (std::size_t a = 0; take > 0; ++a) {
      if (!at_k.atoms.test(a)) {
        at_k.atoms.set(a);
        --take;
      }
    }
    return at_k;
  }
  throw DominationError(DominationError::Kind::PrefixTooShort,
                        "find_dominating: no stage in the prefix realizes the target");
}

// Limit elements in a canonical order: by minimal stage, then by the counting
// order of atom sets (atom 1 least significant). Skips elements already seen
// at earlier stages; the zero element is not produced.
class ElementEnumerator {
 public:
  explicit ElementEnumerator(const ChainPresentation& c) : chain_(&c) {}

  std::optional<ChainElement> next() {
    while (true) {
      if (stage_ > chain_->depth()) return std::nullopt;
      std::size_t n = chain_->stage(stage_)->atom_count();
      if (n >= 63 ? false : counter_ >= (std::uint64_t{1} << n)) {
        ++stage_;
        counter_ = 0;
        continue;
      }
      std::uint64_t raw = counter_++;
      if (raw == 0) continue;  // zero element
      AtomSet atoms(n);
      for (std::size_t j = 0; j < n && j < 64; ++j)
        if (raw & (std::uint64_t{1} << j)) atoms.set(j);
      ChainElement x{stage_, std::move(atoms)};
      if (stage_ > 1 && pull_once(*chain_, x)) continue;  // seen at an earlier stage
      return x;
    }
  }

 private:
  const ChainPresentation* chain_;
  std::size_t stage_ = 1;
  std::uint64_t counter_ = 0;
};

// One matched pair of the partial isomorphism, with limit measures.
struct MatchedPair {
  ChainElement a, b;
  Rational mu_a, mu_b;
};

// Atom bijection between the corners at a matched pair, realized at aligned
// stages: a_atoms[t] corresponds to b_atoms[mapping[t]].
struct StageMapEntry {
  std::size_t a_stage = 1, b_stage = 1;
  std::vector<std::uint32_t> a_atoms, b_atoms;
  std::vector<std::uint32_t> mapping;
};

struct BackAndForthResult {
  std::vector<MatchedPair> pairs;  // pairs[0] is the zero pair
  std::vector<StageMapEntry> maps;
  std::optional<Rational> alpha;
  bool complete = false;
  std::string note;
};

namespace detail {

// Realization stages (k, l) for the new pair: both monotone, equal corner
// sizes, and equal refinement factors over the previous realization so the
// previous atom bijection extends blockwise.
inline std::optional<std::pair<std::size_t, std::size_t>> align_stages(
    const SymbolicChain& A, const SymbolicChain& B, const ChainElement& a, const ChainElement& b,
    std::size_t klo, std::size_t llo, const BigInt& bk_prev, const BigInt& bl_prev, bool constrain) {
  for (std::size_t k = std::max(klo, a.stage); k <= A.depth(); ++k) {
    BigInt ca = push_to(A.presentation(), a, k).atoms.count();
    for (std::size_t l = std::max(llo, b.stage); l <= B.depth(); ++l) {
      BigInt cb = push_to(B.presentation(), b, l).atoms.count();
      if (ca != cb) continue;
      if (constrain && A.stage_b(k) * bl_prev != B.stage_b(l) * bk_prev) continue;
      return std::make_pair(k, l);
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline void verify_back_and_forth(const SymbolicChain& A, const SymbolicChain& B,
                                  const BackAndForthResult& r);

// Alternating construction of a measure-scaling partial isomorphism between
// the limits of two presentations of the same spectrum. Each round realizes
// the next enumerated element on one side and answers it on the other with an
// element of equal corner invariant; the atom bijections refine blockwise.
inline BackAndForthResult back_and_forth(const SymbolicChain& A, const SymbolicChain& B,
                                         std::size_t steps) {
  if (!spectra_equal(A.target(), B.target()))
    throw std::domain_error("back_and_forth: the chains present different spectra");

  const ChainPresentation& CA = A.presentation();
  const ChainPresentation& CB = B.presentation();
  BackAndForthResult result;
  result.pairs.push_back({ChainElement{1, AtomSet(CA.stage(1)->atom_count())},
                          ChainElement{1, AtomSet(CB.stage(1)->atom_count())}, 0, 0});
  result.maps.push_back({});

  ElementEnumerator enumA(CA), enumB(CB);
  std::size_t klo = 1, llo = 1;

  for (std::size_t round = 1; round <= steps; ++round) {
    const MatchedPair& prev = result.pairs.back();
    auto stop = [&](const std::string& why) {
      result.note = why;
      result.complete = false;
    };

    auto ha = enumA.next();
    if (!ha) {
      stop("side A has no further elements in the prefix");
      break;
    }
    std::size_t kx = std::max(prev.a.stage, ha->stage);
    ChainElement x{kx, push_to(CA, prev.a, kx).atoms | push_to(CA, *ha, kx).atoms};

    ChainElement y{1, AtomSet()};
    try {
      y = find_dominating(B, prev.b, stage_invariant(A, x));
    } catch (const DominationError& e) {
      stop(std::string("answering on side B failed: ") + e.what());
      break;
    }

    auto hb = enumB.next();
    if (!hb) {
      stop("side B has no further elements in the prefix");
      break;
    }
    std::size_t lz = std::max(y.stage, hb->stage);
    ChainElement z{lz, push_to(CB, y, lz).atoms | push_to(CB, *hb, lz).atoms};

    ChainElement t{1, AtomSet()};
    try {
      t = find_dominating(A, x, stage_invariant(B, z));
    } catch (const DominationError& e) {
      stop(std::string("answering on side A failed: ") + e.what());
      break;
    }

    ChainElement a_new = minimal_form(CA, t);
    ChainElement b_new = minimal_form(CB, z);
    Rational mu_a = chain_measure(CA, a_new), mu_b = chain_measure(CB, b_new);
    if (!result.alpha)
      result.alpha = mu_b / mu_a;
    else if (mu_b != *result.alpha * mu_a)
      throw std::logic_error("back_and_forth: measure ratio drifted between rounds");

    const StageMapEntry& pm = result.maps.back();
    bool constrain = !pm.a_atoms.empty();
    auto kl = detail::align_stages(A, B, a_new, b_new, klo, llo,
                                   constrain ? A.stage_b(pm.a_stage) : BigInt(1),
                                   constrain ? B.stage_b(pm.b_stage) : BigInt(1), constrain);
    if (!kl) {
      stop("no aligned realization stages in the prefix for the new pair");
      break;
    }
    auto [k, l] = *kl;

    StageMapEntry entry;
    entry.a_stage = k;
    entry.b_stage = l;
    entry.a_atoms = Element(CA.stage(k), push_to(CA, a_new, k).atoms).atom_indices();
    entry.b_atoms = Element(CB.stage(l), push_to(CB, b_new, l).atoms).atom_indices();
    entry.mapping.assign(entry.a_atoms.size(), 0);

    std::vector<std::uint32_t> b_pos(CB.stage(l)->atom_count(), 0);
    for (std::size_t p = 0; p < entry.b_atoms.size(); ++p) b_pos[entry.b_atoms[p]] = static_cast<std::uint32_t>(p);
    std::vector<bool> a_done(entry.a_atoms.size(), false), b_used(entry.b_atoms.size(), false);
    std::vector<std::uint32_t> a_pos(CA.stage(k)->atom_count(), 0);
    for (std::size_t p = 0; p < entry.a_atoms.size(); ++p) a_pos[entry.a_atoms[p]] = static_cast<std::uint32_t>(p);

    if (constrain) {
      std::size_t ca = (A.stage_b(k) / A.stage_b(pm.a_stage)).convert_to<std::size_t>();
      std::size_t cb = (B.stage_b(l) / B.stage_b(pm.b_stage)).convert_to<std::size_t>();
      if (ca != cb) throw std::logic_error("back_and_forth: refinement factors differ after alignment");
      for (std::size_t i = 0; i < pm.a_atoms.size(); ++i) {
        std::size_t u = pm.a_atoms[i], w = pm.b_atoms[pm.mapping[i]];
        for (std::size_t tt = 0; tt < ca; ++tt) {
          std::uint32_t pa = a_pos[u * ca + tt], pb = b_pos[w * cb + tt];
          entry.mapping[pa] = pb;
          a_done[pa] = true;
          b_used[pb] = true;
        }
      }
    }
    std::size_t nb = 0;
    for (std::size_t pa = 0; pa < entry.a_atoms.size(); ++pa) {
      if (a_done[pa]) continue;
      while (b_used[nb]) ++nb;
      entry.mapping[pa] = static_cast<std::uint32_t>(nb);
      b_used[nb] = true;
    }

    result.pairs.push_back({a_new, b_new, mu_a, mu_b});
    result.maps.push_back(std::move(entry));
    klo = k;
    llo = l;
    if (round == steps) result.complete = true;
  }

  verify_back_and_forth(A, B, result);
  return result;
}

// Machine checks on a constructed partial isomorphism: nested pairs, equal
// corner invariants, consistent refinement of the atom bijections, Boolean
// operation preservation on probe subsets, and one exact measure ratio.
inline void verify_back_and_forth(const SymbolicChain& A, const SymbolicChain& B,
                                  const BackAndForthResult& r) {
  const ChainPresentation& CA = A.presentation();
  const ChainPresentation& CB = B.presentation();
  auto fail = [](const std::string& what) {
    throw std::logic_error("back_and_forth verification: " + what);
  };
  for (std::size_t i = 0; i + 1 < r.pairs.size(); ++i) {
    if (!chain_elem_leq(CA, r.pairs[i].a, r.pairs[i + 1].a) ||
        !chain_elem_leq(CB, r.pairs[i].b, r.pairs[i + 1].b))
      fail("pairs are not nested");
  }
  for (std::size_t i = 1; i < r.pairs.size(); ++i) {
    const MatchedPair& p = r.pairs[i];
    if (stage_invariant(A, p.a) != stage_invariant(B, p.b)) fail("corner invariants differ in a pair");
    if (chain_measure(CA, p.a) != p.mu_a || chain_measure(CB, p.b) != p.mu_b)
      fail("recorded measures are stale");
    if (r.alpha && p.mu_b != *r.alpha * p.mu_a) fail("measure ratio is not constant");
    const StageMapEntry& e = r.maps[i];
    if (e.a_atoms.size() != e.b_atoms.size() || e.mapping.size() != e.a_atoms.size())
      fail("atom bijection has mismatched sizes");
    std::vector<bool> used(e.b_atoms.size(), false);
    for (std::uint32_t pos : e.mapping) {
      if (pos >= used.size() || used[pos]) fail("atom mapping is not a bijection");
      used[pos] = true;
    }
    if (push_to(CA, r.pairs[i].a, e.a_stage).atoms != [&] {
          AtomSet s(CA.stage(e.a_stage)->atom_count());
          for (std::uint32_t atom : e.a_atoms) s.set(atom);
          return s;
        }())
      fail("a-side atoms do not realize the pair");
    // Per-atom measure scaling.
    for (std::size_t pa = 0; pa < e.a_atoms.size(); ++pa) {
      AtomSet sa(CA.stage(e.a_stage)->atom_count());
      sa.set(e.a_atoms[pa]);
      AtomSet sb(CB.stage(e.b_stage)->atom_count());
      sb.set(e.b_atoms[e.mapping[pa]]);
      Rational ma = chain_measure(CA, ChainElement{e.a_stage, std::move(sa)});
      Rational mb = chain_measure(CB, ChainElement{e.b_stage, std::move(sb)});
      if (r.alpha && mb != *r.alpha * ma) fail("atom images do not scale by alpha");
    }
    // Blockwise refinement of the previous bijection.
    const StageMapEntry& pe = r.maps[i - 1];
    if (!pe.a_atoms.empty()) {
      std::size_t ca = (A.stage_b(e.a_stage) / A.stage_b(pe.a_stage)).convert_to<std::size_t>();
      std::size_t cb = (B.stage_b(e.b_stage) / B.stage_b(pe.b_stage)).convert_to<std::size_t>();
      if (ca != cb) fail("refinement factors differ");
      std::vector<std::uint32_t> a_pos(CA.stage(e.a_stage)->atom_count(), 0);
      for (std::size_t p = 0; p < e.a_atoms.size(); ++p) a_pos[e.a_atoms[p]] = static_cast<std::uint32_t>(p);
      for (std::size_t u = 0; u < pe.a_atoms.size(); ++u) {
        std::uint32_t w = pe.b_atoms[pe.mapping[u]];
        for (std::size_t tt = 0; tt < ca; ++tt) {
          std::uint32_t pa = a_pos[pe.a_atoms[u] * ca + tt];
          if (e.b_atoms[e.mapping[pa]] != w * cb + tt) fail("bijection does not refine the previous round");
        }
      }
    }
    // Boolean structure on probe subsets of the corner.
    std::size_t n = e.a_atoms.size();
    if (n >= 2) {
      auto lift_a = [&](std::uint64_t mask) {
        AtomSet s(CA.stage(e.a_stage)->atom_count());
        for (std::size_t j = 0; j < n && j < 64; ++j)
          if (mask & (std::uint64_t{1} << j)) s.set(e.a_atoms[j]);
        return s;
      };
      auto phi = [&](const AtomSet& sa) {
        AtomSet sb(CB.stage(e.b_stage)->atom_count());
        for (std::size_t p = 0; p < n; ++p)
          if (sa.test(e.a_atoms[p])) sb.set(e.b_atoms[e.mapping[p]]);
        return sb;
      };
      std::uint64_t full = n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
      std::uint64_t m1 = full & 0x5555555555555555ULL, m2 = full & 0x0F0F0F0F0F0F0F0FULL;
      if (phi(lift_a(m1) ^ lift_a(m2)) != (phi(lift_a(m1)) ^ phi(lift_a(m2))) ||
          phi(lift_a(m1) & lift_a(m2)) != (phi(lift_a(m1)) & phi(lift_a(m2))))
        fail("atom lift does not respect Boolean operations");
    }
  }
}

}  // namespace stz
