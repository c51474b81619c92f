#pragma once

#include "stz/chain.hpp"
#include "stz/matrix.hpp"
#include "stz/measure_algebra.hpp"
#include "stz/periodic.hpp"
#include "stz/spectrum.hpp"
#include "stz/steinitz.hpp"

#include <bit>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace stz::selftest {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

namespace detail {

inline AtomSet mask_to_set(std::uint64_t mask, std::size_t n) {
  AtomSet s(n);
  for (std::size_t j = 0; j < n; ++j)
    if (mask & (std::uint64_t{1} << j)) s.set(j);
  return s;
}

inline CheckResult pass(std::string name, std::string detail) {
  return {std::move(name), true, std::move(detail)};
}
inline CheckResult fail(std::string name, std::string detail) {
  return {std::move(name), false, std::move(detail)};
}

}  // namespace detail

// Finitely additive strictly positive measures: modular law, zero, total, and
// positivity, exhaustively on small algebras and on periodic words.
inline CheckResult check_measure_axioms() {
  const std::string name = "measure-axioms";
  std::size_t algebra_pairs = 0;
  {
    std::vector<Rational> w;
    for (std::size_t i = 1; i <= 10; ++i) w.emplace_back(i, 55);
    std::vector<AlgebraPtr> algs = {MeasureAlgebra::standard(10),
                                    std::make_shared<const MeasureAlgebra>(std::move(w))};
    for (const auto& alg : algs) {
      std::size_t n = alg->atom_count();
      std::vector<Rational> mu(std::size_t{1} << n);
      for (std::uint64_t m = 0; m < mu.size(); ++m)
        mu[m] = measure_of(Element(alg, detail::mask_to_set(m, n)));
      if (mu[0] != 0) return detail::fail(name, "empty element has nonzero measure");
      if (mu[mu.size() - 1] != alg->total()) return detail::fail(name, "top measure differs from total");
      for (std::size_t j = 0; j < n; ++j)
        if (mu[std::uint64_t{1} << j] <= 0) return detail::fail(name, "atom with nonpositive measure");
      for (std::uint64_t a = 0; a < mu.size(); ++a)
        for (std::uint64_t b = 0; b < mu.size(); ++b) {
          if (mu[a | b] + mu[a & b] != mu[a] + mu[b])
            return detail::fail(name, "modular law fails on algebra elements");
          ++algebra_pairs;
        }
    }
  }
  std::size_t word_pairs = 0;
  {
    std::vector<PeriodicWord> words;
    for (std::size_t k = 1; k <= 4; ++k)
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << k); ++m)
        words.push_back(PeriodicWord::from_bits(k, detail::mask_to_set(m, k)));
    std::mt19937_64 rng(811);
    for (int i = 0; i < 200; ++i) {
      std::size_t k = 1 + rng() % 32;
      std::uint64_t m = rng();
      words.push_back(PeriodicWord::from_bits(k, detail::mask_to_set(m & ((k >= 64 ? 0 : std::uint64_t{1} << k) - 1), k)));
    }
    for (const auto& x : words)
      for (const auto& y : words) {
        PeriodicWord sum = pw_add(x, y), prod = pw_mul(x, y);
        PeriodicWord join = pw_add(sum, prod);
        if (pw_measure(join) + pw_measure(prod) != pw_measure(x) + pw_measure(y))
          return detail::fail(name, "modular law fails on periodic words");
        if (pw_measure(x) < 0 || pw_measure(x) > 1)
          return detail::fail(name, "word density out of range");
        ++word_pairs;
      }
  }
  std::ostringstream d;
  d << algebra_pairs << " algebra pairs, " << word_pairs << " word pairs";
  return detail::pass(name, d.str());
}

// The measure metric on St_n is normalized Hamming distance.
inline CheckResult check_standard_metric() {
  const std::string name = "standard-metric";
  std::size_t pairs = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    AlgebraPtr alg = MeasureAlgebra::standard(n);
    std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t a = 0; a < count; ++a)
      for (std::uint64_t b = 0; b < count; ++b) {
        Rational got = distance(Element(alg, detail::mask_to_set(a, n)),
                                Element(alg, detail::mask_to_set(b, n)));
        Rational want(std::popcount(a ^ b), n);
        if (got != want) return detail::fail(name, "distance differs from Hamming/n");
        ++pairs;
      }
  }
  for (std::size_t n = 2; n <= 4; ++n) {
    AlgebraPtr alg = MeasureAlgebra::standard(n);
    std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t a = 0; a < count; ++a)
      for (std::uint64_t b = 0; b < count; ++b)
        for (std::uint64_t c = 0; c < count; ++c) {
          Element ea(alg, detail::mask_to_set(a, n)), eb(alg, detail::mask_to_set(b, n)),
              ec(alg, detail::mask_to_set(c, n));
          if (distance(ea, ec) > distance(ea, eb) + distance(eb, ec))
            return detail::fail(name, "triangle inequality fails");
        }
  }
  return detail::pass(name, std::to_string(pairs) + " pairs across n<=6");
}

// St_m (x) St_n is St_mn up to a measure-preserving atom bijection, and pure
// tensors multiply measures.
inline CheckResult check_tensor_product() {
  const std::string name = "tensor-product";
  std::size_t cases = 0;
  for (std::size_t m = 1; m <= 8; ++m)
    for (std::size_t n = 1; n <= 8; ++n) {
      AlgebraPtr am = MeasureAlgebra::standard(m), an = MeasureAlgebra::standard(n);
      AlgebraPtr prod = tensor_algebra(am, an);
      auto se = scalar_equivalent(*prod, *MeasureAlgebra::standard(m * n));
      if (!se) return detail::fail(name, "tensor of standards is not scalar-equivalent to St_mn");
      if (se->alpha != 1) return detail::fail(name, "tensor equivalence has alpha != 1");
      std::vector<bool> used(m * n, false);
      for (std::uint32_t t : se->bijection) {
        if (t >= m * n || used[t]) return detail::fail(name, "tensor bijection is not a bijection");
        used[t] = true;
      }
      std::uint64_t lim_m = std::uint64_t{1} << std::min<std::size_t>(m, 4);
      std::uint64_t lim_n = std::uint64_t{1} << std::min<std::size_t>(n, 4);
      for (std::uint64_t a = 0; a < lim_m; ++a)
        for (std::uint64_t b = 0; b < lim_n; ++b) {
          Element ea(am, detail::mask_to_set(a, m)), eb(an, detail::mask_to_set(b, n));
          if (measure_of(tensor_element(prod, ea, eb)) != measure_of(ea) * measure_of(eb))
            return detail::fail(name, "pure tensor measure does not multiply");
        }
      ++cases;
    }
  return detail::pass(name, std::to_string(cases) + " (m, n) cases");
}

namespace detail {

// Existential membership oracle: scan divisors b of the base for a witness
// representation (a/b) s satisfying the descriptor's size condition. Any
// minimal witness denominator divides den(scale) * den(q), so that product
// bounds the scan.
inline bool member_oracle(const ScaledSteinitz& t, const SpectrumDescriptor& d) {
  if (d.kind() == SpectrumDescriptor::Kind::Finite) {
    for (BigInt k = 1; k <= d.bound_n(); ++k)
      if (ScaledSteinitz(Rational(k), SteinitzNumber::one()) == t) return true;
    return false;
  }
  auto q = rationally_connected(t.base(), d.base());
  if (!q) return false;
  BigInt cap = denominator(t.scale()) * denominator(*q);
  std::uint64_t bound = cap > 50'000'000 ? 50'000'000 : std::max<std::uint64_t>(cap.convert_to<std::uint64_t>(), 256);
  for (const BigInt& b : divisors_up_to(d.base(), bound)) {
    Rational v = t.scale() * *q;
    Rational ab = v;  // candidate a/b must equal the value of t over the base
    BigInt a = numerator(ab * b);
    if (denominator(ab * b) != 1 || a < 1) continue;
    if (ScaledSteinitz(Rational(a, b), d.base()) != t) continue;
    switch (d.kind()) {
      case SpectrumDescriptor::Kind::Unbounded:
        return true;
      case SpectrumDescriptor::Kind::BoundedClosed:
        if (ab <= d.ratio()) return true;
        break;
      case SpectrumDescriptor::Kind::BoundedOpen:
        if (ab < d.ratio()) return true;
        break;
      default:
        break;
    }
  }
  return false;
}

}  // namespace detail

// Reduction-based membership agrees with the existential oracle on >= 2000
// generated (value, descriptor) pairs.
inline CheckResult check_membership_bruteforce() {
  const std::string name = "membership-bruteforce";
  std::mt19937_64 rng(20260813);
  std::vector<SteinitzNumber> bases;
  const std::uint64_t primes[4] = {2, 3, 5, 7};
  for (int pick = 0; pick < 12; ++pick) {
    std::map<std::uint64_t, Exponent> ex;
    bool infinite = false;
    for (std::uint64_t p : primes) {
      switch (rng() % 5) {
        case 0:
          break;
        case 4:
          ex.emplace(p, Exponent::infinity());
          infinite = true;
          break;
        default:
          ex.emplace(p, Exponent::finite(1 + rng() % 3));
          break;
      }
    }
    if (!infinite) ex[2] = Exponent::infinity();
    bases.push_back(SteinitzNumber::from_exponents(Exponent::finite(0), std::move(ex)));
  }
  std::vector<SpectrumDescriptor> descriptors;
  const Rational ratios[5] = {Rational(1), Rational(3, 2), Rational(2), Rational(9, 4), Rational(7, 3)};
  for (const auto& s : bases) {
    descriptors.push_back(SpectrumDescriptor::unbounded(s));
    for (const auto& r : ratios) {
      descriptors.push_back(SpectrumDescriptor::bounded_closed(r, s));
      if (nat_divides(denominator(r), s)) descriptors.push_back(SpectrumDescriptor::bounded_open(r, s));
    }
  }
  descriptors.push_back(SpectrumDescriptor::finite(1));
  descriptors.push_back(SpectrumDescriptor::finite(2));
  descriptors.push_back(SpectrumDescriptor::finite(5));
  descriptors.push_back(SpectrumDescriptor::finite(12));

  std::size_t trials = 0;
  for (std::size_t i = 0; i < 2200; ++i) {
    const SpectrumDescriptor& d = descriptors[rng() % descriptors.size()];
    const SteinitzNumber& s = bases[rng() % bases.size()];
    ScaledSteinitz t = [&] {
      if (rng() % 5 == 0) return ScaledSteinitz(Rational(1 + rng() % 200), SteinitzNumber::one());
      std::vector<BigInt> divs = divisors_up_to(s, 200);
      BigInt b = divs[rng() % divs.size()];
      BigInt a = 1 + rng() % 200;
      return ScaledSteinitz(Rational(a, b), s);
    }();
    bool got = member(t, d);
    bool want = detail::member_oracle(t, d);
    if (got != want)
      return detail::fail(name, "disagreement on " + t.to_string() + " vs " + d.to_string());
    ++trials;
  }
  return detail::pass(name, std::to_string(trials) + " pairs, 100% agreement");
}

// Saturation holds for described spectra and the planted non-saturated set is
// rejected by the interpolation axiom.
inline CheckResult check_saturation() {
  const std::string name = "saturation";
  SteinitzNumber two_inf = SteinitzNumber::prime_power(2, Exponent::infinity());
  std::vector<SpectrumDescriptor> ds = {
      SpectrumDescriptor::finite(5), SpectrumDescriptor::unbounded(two_inf),
      SpectrumDescriptor::bounded_closed(Rational(3, 2), two_inf),
      SpectrumDescriptor::bounded_open(Rational(2), two_inf)};
  for (const auto& d : ds) {
    std::vector<ScaledSteinitz> samples = descriptor_samples(d, 100);
    SaturationReport report = saturated_check([&](const ScaledSteinitz& t) { return member(t, d); }, samples);
    if (!report.ok())
      return detail::fail(name, d.to_string() + ": " + report.violations[0].axiom + " " +
                                    report.violations[0].detail);
  }
  ScaledSteinitz s0(1, SteinitzNumber::one());
  ScaledSteinitz s2 = scale_by(s0, 2), s3 = scale_by(s0, 3);
  auto planted = [&](const ScaledSteinitz& t) { return t == s0 || t == s3; };
  SaturationReport rejected = saturated_check(planted, {s0, s2, s3});
  bool interp = false;
  for (const auto& v : rejected.violations) interp = interp || v.axiom == "interpolation";
  if (!interp) return detail::fail(name, "planted counterexample {s, 3s} was not rejected");
  return detail::pass(name, "4 spectra saturated, counterexample rejected");
}

// Relative rank is multiplicative along block embeddings, exactly.
inline CheckResult check_rank_multiplicativity() {
  const std::string name = "rank-multiplicativity";
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<BlockEmbedding> embs = {BlockEmbedding(n, 1, n), BlockEmbedding(n, 2, 2 * n),
                                        BlockEmbedding(n, 3, 3 * n + 2), BlockEmbedding(n, 2, 2 * n + 3)};
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      RationalMatrix a(n, n);
      std::size_t rank = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (std::uint64_t{1} << i)) {
          a.at(i, i) = 1;
          ++rank;
        }
      if (matrix_rank(a) != rank) return detail::fail(name, "diagonal rank mismatch");
      for (const auto& f : embs) {
        if (!embed_and_check(a, f).holds) return detail::fail(name, "relation fails on a diagonal idempotent");
        ++cases;
      }
    }
  }
  std::mt19937_64 rng(1901);
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 2 + rng() % 5;
    std::size_t rank = rng() % (n + 1);
    RationalMatrix a = random_idempotent(n, rank, rng);
    if (!a.is_idempotent()) return detail::fail(name, "conjugated matrix is not idempotent");
    if (matrix_rank(a) != rank) return detail::fail(name, "conjugation changed the rank");
    std::size_t copies = 1 + rng() % 3;
    BlockEmbedding g(n, copies, copies * n + rng() % 4);
    if (!embed_and_check(a, g).holds) return detail::fail(name, "relation fails on a random idempotent");
    ++cases;
  }
  return detail::pass(name, std::to_string(cases) + " embeddings checked");
}

// Model construction reproduces the expected stage sizes and satisfies the
// corner condition; reconstruction from the prefix gives back the spectrum.
inline CheckResult check_model_construction() {
  const std::string name = "model-construction";
  SteinitzNumber five_inf = SteinitzNumber::prime_power(5, Exponent::infinity());
  SteinitzNumber two_inf = SteinitzNumber::prime_power(2, Exponent::infinity());
  SpectrumDescriptor d1 = SpectrumDescriptor::bounded_closed(Rational(3, 2), five_inf);
  SymbolicChain sc1 = construct_model(d1, 6, StageSizeRule::geometric(5));
  const BigInt want1[6] = {7, 37, 187, 937, 4687, 23437};
  for (std::size_t i = 1; i <= 6; ++i)
    if (sc1.stage_m(i) != want1[i - 1])
      return detail::fail(name, "stage sizes of the 3/2 model are wrong");
  for (std::size_t i = 1; i < 6; ++i) {
    BigInt c = sc1.stage_b(i + 1) / sc1.stage_b(i);
    if (sc1.stage_m(i) * c > sc1.stage_m(i + 1)) return detail::fail(name, "corner condition fails");
  }
  if (sc1.stage_m(1) * 5 != 35 || sc1.stage_m(2) != 37)
    return detail::fail(name, "expected 35 <= 37 at the first corner");
  if (!spectra_equal(symbolic_spectrum(sc1), d1))
    return detail::fail(name, "round trip of the 3/2 model failed");

  SpectrumDescriptor d2 = SpectrumDescriptor::bounded_open(Rational(2), two_inf);
  SymbolicChain sc2 = construct_model(d2, 6, StageSizeRule::geometric(2));
  for (std::size_t i = 1; i <= 6; ++i)
    if (sc2.stage_m(i) != int_pow(BigInt(2), i + 1) - 1)
      return detail::fail(name, "open-bound model stage sizes are wrong");
  if (!spectra_equal(symbolic_spectrum(sc2), d2))
    return detail::fail(name, "round trip of the open-bound model failed");
  return detail::pass(name, "m = 7,37,...,23437 and m_i = 2^(i+1)-1 verified");
}

// The alternating matcher pairs two presentations of the same spectrum with
// one exact measure ratio.
inline CheckResult check_back_and_forth() {
  const std::string name = "back-and-forth";
  SteinitzNumber two_inf = SteinitzNumber::prime_power(2, Exponent::infinity());
  SteinitzNumber five_inf = SteinitzNumber::prime_power(5, Exponent::infinity());

  SpectrumDescriptor unital2 = SpectrumDescriptor::bounded_closed(1, two_inf);
  SymbolicChain a1 = construct_model(unital2, 10, StageSizeRule::geometric(2));
  SymbolicChain b1 = construct_model(unital2, 5, StageSizeRule::geometric(4));
  BackAndForthResult r1 = back_and_forth(a1, b1, 5);
  if (!r1.complete) return detail::fail(name, "doubling vs quadrupling stopped early: " + r1.note);
  if (!r1.alpha || *r1.alpha != 1) return detail::fail(name, "doubling vs quadrupling alpha != 1");

  SpectrumDescriptor bd = SpectrumDescriptor::bounded_closed(Rational(3, 2), five_inf);
  SymbolicChain a2 = construct_model(bd, 6, StageSizeRule::geometric(5));
  SymbolicChain b2 = construct_model(bd, 3, StageSizeRule::geometric(25));
  BackAndForthResult r2 = back_and_forth(a2, b2, 4);
  if (!r2.complete) return detail::fail(name, "two 3/2 presentations stopped early: " + r2.note);
  if (!r2.alpha || *r2.alpha != Rational(35, 37))
    return detail::fail(name, "expected alpha = 35/37, got " +
                                  (r2.alpha ? stz::to_string(*r2.alpha) : std::string("none")));
  for (std::size_t i = 1; i < r2.pairs.size(); ++i)
    if (r2.pairs[i].mu_b != *r2.alpha * r2.pairs[i].mu_a)
      return detail::fail(name, "ratio is not constant across pairs");
  return detail::pass(name, "alpha = 1 and alpha = 35/37, both exact");
}

// Extending an atom permutation along a standard block embedding commutes
// with the embedding, for every permutation of St_n, n <= 5, and block count
// k <= 4.
inline CheckResult check_automorphism_extension() {
  const std::string name = "automorphism-extension";
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    AlgebraPtr src = MeasureAlgebra::standard(n);
    std::vector<std::uint32_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
    do {
      std::vector<std::vector<std::uint32_t>> img(n);
      for (std::size_t i = 0; i < n; ++i) img[i] = {perm[i]};
      AtomMap p(src, src, std::move(img));
      for (std::size_t k = 1; k <= 4; ++k) {
        AlgebraPtr tgt = MeasureAlgebra::standard(n * k);
        AtomMap emb = standard_embedding(src, tgt);
        AtomMap ext = extend_automorphism(p, emb);
        if (!ext.is_permutation() || ext.lambda() != 1)
          return detail::fail(name, "extension is not measure-preserving");
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
          Element x(src, detail::mask_to_set(mask, n));
          if (ext.push(emb.push(x)) != emb.push(p.push(x)))
            return detail::fail(name, "extension does not commute with the embedding");
        }
        ++cases;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return detail::pass(name, std::to_string(cases) + " permutation/embedding cases");
}

// Canonical invariants separate distinct spectra over one class and identify
// equal ones across bases.
inline CheckResult check_canonical_invariants() {
  const std::string name = "canonical-invariants";
  SteinitzNumber two_inf = SteinitzNumber::prime_power(2, Exponent::infinity());
  SteinitzNumber three_two_inf = st_mul_nat(two_inf, 3);
  SpectrumDescriptor d1 = SpectrumDescriptor::bounded_closed(1, two_inf);
  SpectrumDescriptor d2 = SpectrumDescriptor::bounded_closed(Rational(3, 2), two_inf);
  SpectrumDescriptor d3 = SpectrumDescriptor::unbounded(two_inf);
  SpectrumDescriptor d4 = SpectrumDescriptor::unbounded(three_two_inf);
  const SpectrumDescriptor* trio[3] = {&d1, &d2, &d3};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      if (spectra_equal(*trio[i], *trio[j]))
        return detail::fail(name, trio[i]->to_string() + " and " + trio[j]->to_string() + " not separated");
      auto w = separating_witness(*trio[i], *trio[j]);
      if (!w) return detail::fail(name, "no separating witness for " + trio[i]->to_string() + " vs " +
                                            trio[j]->to_string());
      if (member(*w, *trio[i]) == member(*w, *trio[j]))
        return detail::fail(name, "witness does not separate");
    }
  if (!spectra_equal(d3, d4))
    return detail::fail(name, d3.to_string() + " and " + d4.to_string() + " should be equal");
  return detail::pass(name, "three spectra separated, equal pair identified");
}

inline std::vector<CheckResult> run_all() {
  return {check_measure_axioms(),     check_standard_metric(),    check_tensor_product(),
          check_membership_bruteforce(), check_saturation(),      check_rank_multiplicativity(),
          check_model_construction(), check_back_and_forth(),     check_automorphism_extension(),
          check_canonical_invariants()};
}

inline int report(const std::vector<CheckResult>& results, std::ostream& os) {
  std::size_t passed = 0;
  for (const auto& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) os << " (" << r.detail << ")";
    os << "\n";
    if (r.passed) ++passed;
  }
  os << "RESULT " << passed << "/" << results.size() << " passed\n";
  return passed == results.size() ? 0 : 1;
}

}  // namespace stz::selftest
