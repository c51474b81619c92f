#include "stz/measure_algebra.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>

using namespace stz;

namespace {

AtomSet mask_set(std::uint64_t mask, std::size_t n) {
  AtomSet s(n);
  for (std::size_t j = 0; j < n; ++j)
    if (mask & (std::uint64_t{1} << j)) s.set(j);
  return s;
}

Element elem(const AlgebraPtr& alg, std::uint64_t mask) {
  return Element(alg, mask_set(mask, alg->atom_count()));
}

AlgebraPtr weighted() {
  return std::make_shared<const MeasureAlgebra>(
      std::vector<Rational>{Rational(1, 2), Rational(1, 3), Rational(1, 12), Rational(1, 12)});
}

}  // namespace

TEST_CASE("algebra construction validates weights") {
  CHECK_THROWS_AS(MeasureAlgebra(std::vector<Rational>{}), std::domain_error);
  CHECK_THROWS_AS(MeasureAlgebra({Rational(1), Rational(0)}), std::domain_error);
  CHECK_THROWS_AS(MeasureAlgebra({Rational(-1, 2)}), std::domain_error);
  AlgebraPtr st = MeasureAlgebra::standard(4);
  CHECK(st->atom_count() == 4);
  CHECK(st->is_uniform());
  CHECK(st->is_standard());
  CHECK(st->total() == 1);
  AlgebraPtr w = weighted();
  CHECK_FALSE(w->is_uniform());
  CHECK(w->total() == 1);
  CHECK_THROWS_AS(MeasureAlgebra::standard(0), std::domain_error);
}

TEST_CASE("element operations match set operations on masks") {
  AlgebraPtr alg = MeasureAlgebra::standard(5);
  for (std::uint64_t a = 0; a < 32; ++a)
    for (std::uint64_t b = 0; b < 32; ++b) {
      CHECK(elem_add(elem(alg, a), elem(alg, b)) == elem(alg, a ^ b));
      CHECK(elem_mul(elem(alg, a), elem(alg, b)) == elem(alg, a & b));
      CHECK(elem_or(elem(alg, a), elem(alg, b)) == elem(alg, a | b));
      CHECK(elem_leq(elem(alg, a), elem(alg, b)) == ((a & ~b) == 0));
    }
  CHECK(elem_not(elem(alg, 0b10110)) == elem(alg, 0b01001));
  CHECK(Element::zero(alg).is_zero());
  CHECK(Element::top(alg).is_top());
  CHECK(Element::atom(alg, 2) == elem(alg, 0b00100));
  CHECK(elem(alg, 0b01101).atom_indices() == std::vector<std::uint32_t>{0, 2, 3});
}

TEST_CASE("operations across different algebras are rejected") {
  AlgebraPtr a = MeasureAlgebra::standard(3);
  AlgebraPtr b = MeasureAlgebra::standard(4);
  CHECK_THROWS_AS(elem_add(Element::top(a), Element::top(b)), std::domain_error);
  CHECK_THROWS_AS(elem_mul(Element::top(a), Element::top(b)), std::domain_error);
  AlgebraPtr w = weighted();  // same atom count as b, different weights
  CHECK_THROWS_AS(elem_or(Element::top(w), Element::top(b)), std::domain_error);
}

TEST_CASE("measure sums atom weights") {
  AlgebraPtr w = weighted();
  CHECK(measure_of(Element::zero(w)) == 0);
  CHECK(measure_of(Element::top(w)) == 1);
  CHECK(measure_of(elem(w, 0b0011)) == Rational(5, 6));
  CHECK(measure_of(elem(w, 0b1100)) == Rational(1, 6));
  for (std::uint64_t m = 0; m < 16; ++m) {
    Rational expect = 0;
    for (std::size_t j = 0; j < 4; ++j)
      if (m & (std::uint64_t{1} << j)) expect += w->weight(j);
    CHECK(measure_of(elem(w, m)) == expect);
  }
}

TEST_CASE("distance is a metric on the weighted algebra") {
  AlgebraPtr w = weighted();
  for (std::uint64_t a = 0; a < 16; ++a)
    for (std::uint64_t b = 0; b < 16; ++b) {
      Rational dab = distance(elem(w, a), elem(w, b));
      CHECK(dab == distance(elem(w, b), elem(w, a)));
      CHECK((dab == 0) == (a == b));
      for (std::uint64_t c = 0; c < 16; ++c)
        CHECK(distance(elem(w, a), elem(w, c)) <= dab + distance(elem(w, b), elem(w, c)));
    }
}

TEST_CASE("corner algebra restricts weights and round trips") {
  AlgebraPtr w = weighted();
  Element h = elem(w, 0b1011);
  Corner c = corner_algebra(h);
  REQUIRE(c.algebra->atom_count() == 3);
  CHECK(c.algebra->weights() ==
        std::vector<Rational>{Rational(1, 2), Rational(1, 3), Rational(1, 12)});
  Element inner(c.algebra, mask_set(0b101, 3));
  Element outer = c.embed(w, inner);
  CHECK(outer.algebra() == w);
  CHECK(outer == elem(w, 0b1001));
  CHECK(c.restrict(outer) == inner);
  CHECK(measure_of(outer) == measure_of(inner));
  CHECK_THROWS_AS(c.restrict(elem(w, 0b0100)), std::domain_error);
  CHECK_THROWS_AS(corner_algebra(Element::zero(w)), std::domain_error);
}

TEST_CASE("corner invariant scales by the corner measure") {
  SteinitzNumber two_inf = SteinitzNumber::prime_power(2, Exponent::infinity());
  ScaledSteinitz st(Rational(3, 2), two_inf);
  ScaledSteinitz c = corner_steinitz(st, Rational(1, 4));
  CHECK(c.scale() == Rational(3, 8));
  CHECK(c.base() == two_inf);
  CHECK_THROWS_AS(corner_steinitz(st, Rational(0)), std::domain_error);
}

TEST_CASE("tensor product multiplies measures and combines atoms") {
  AlgebraPtr a = MeasureAlgebra::standard(3);
  AlgebraPtr b = weighted();
  AlgebraPtr prod = tensor_algebra(a, b);
  REQUIRE(prod->atom_count() == 12);
  CHECK(prod->total() == a->total() * b->total());
  for (std::uint64_t ma = 0; ma < 8; ++ma)
    for (std::uint64_t mb = 0; mb < 16; ++mb) {
      Element t = tensor_element(prod, elem(a, ma), elem(b, mb));
      CHECK(measure_of(t) == measure_of(elem(a, ma)) * measure_of(elem(b, mb)));
    }
  // Tensor respects the lattice structure on pure tensors with a fixed side.
  Element x = elem(a, 0b011), y = elem(a, 0b110), z = elem(b, 0b0101);
  CHECK(tensor_element(prod, elem_mul(x, y), z) ==
        elem_mul(tensor_element(prod, x, z), tensor_element(prod, y, z)));
}

TEST_CASE("scalar equivalence finds the weight-matching bijection") {
  AlgebraPtr st6 = MeasureAlgebra::standard(6);
  AlgebraPtr prod = tensor_algebra(MeasureAlgebra::standard(2), MeasureAlgebra::standard(3));
  auto se = scalar_equivalent(*prod, *st6);
  REQUIRE(se.has_value());
  CHECK(se->alpha == 1);

  AlgebraPtr doubled = std::make_shared<const MeasureAlgebra>(std::vector<Rational>(6, Rational(1, 3)));
  auto se2 = scalar_equivalent(*st6, *doubled);
  REQUIRE(se2.has_value());
  CHECK(se2->alpha == 2);

  CHECK_FALSE(scalar_equivalent(*st6, *MeasureAlgebra::standard(5)).has_value());
  CHECK_FALSE(scalar_equivalent(*weighted(), *MeasureAlgebra::standard(4)).has_value());

  // Same atom count and total but mismatched weight multiset.
  AlgebraPtr w2 = std::make_shared<const MeasureAlgebra>(
      std::vector<Rational>{Rational(1, 2), Rational(1, 4), Rational(1, 8), Rational(1, 8)});
  CHECK_FALSE(scalar_equivalent(*weighted(), *w2).has_value());
}

TEST_CASE("atom maps validate their images") {
  AlgebraPtr src = MeasureAlgebra::standard(2);
  AlgebraPtr tgt = MeasureAlgebra::standard(6);
  using Img = std::vector<std::vector<std::uint32_t>>;
  CHECK_THROWS_AS(AtomMap(src, tgt, Img{{0, 1, 2}}), std::domain_error);           // missing image
  CHECK_THROWS_AS(AtomMap(src, tgt, Img{{0, 1, 2}, {}}), std::domain_error);       // empty image
  CHECK_THROWS_AS(AtomMap(src, tgt, Img{{0, 1, 2}, {2, 3, 4}}), std::domain_error);  // overlap
  CHECK_THROWS_AS(AtomMap(src, tgt, Img{{0, 1, 2}, {3, 4, 6}}), std::domain_error);  // out of range
  CHECK_THROWS_AS(AtomMap(src, tgt, Img{{0, 1}, {2, 3, 4}}), std::domain_error);   // lambda varies
  CHECK_NOTHROW(AtomMap(src, tgt, Img{{0, 4, 2}, {3, 1, 5}}));                     // any disjoint triples
}

TEST_CASE("atom maps push and pull elements") {
  AlgebraPtr src = MeasureAlgebra::standard(2);
  AlgebraPtr tgt = MeasureAlgebra::standard(6);
  AtomMap f = standard_embedding(src, tgt);
  CHECK(f.lambda() == 1);  // 3 atoms of weight 1/6 per source atom of weight 1/2
  CHECK(f.covers_target());
  CHECK_FALSE(f.is_permutation());
  CHECK(f.push(elem(src, 0b01)) == elem(tgt, 0b000111));
  CHECK(f.push(elem(src, 0b10)) == elem(tgt, 0b111000));
  CHECK(f.push(Element::top(src)).is_top());

  auto back = f.pull(elem(tgt, 0b000111));
  REQUIRE(back.has_value());
  CHECK(*back == elem(src, 0b01));
  CHECK_FALSE(f.pull(elem(tgt, 0b000011)).has_value());
  CHECK_FALSE(f.pull(elem(tgt, 0b001111)).has_value());
  auto zero = f.pull(Element::zero(tgt));
  REQUIRE(zero.has_value());
  CHECK(zero->is_zero());

  // Push preserves joins and measure up to lambda.
  for (std::uint64_t a = 0; a < 4; ++a) {
    CHECK(measure_of(f.push(elem(src, a))) == f.lambda() * measure_of(elem(src, a)));
    for (std::uint64_t b = 0; b < 4; ++b)
      CHECK(f.push(elem_or(elem(src, a), elem(src, b))) ==
            elem_or(f.push(elem(src, a)), f.push(elem(src, b))));
  }
}

TEST_CASE("atom map composition multiplies lambdas") {
  AlgebraPtr a = MeasureAlgebra::standard(2);
  AlgebraPtr b = MeasureAlgebra::standard(4);
  AlgebraPtr c = MeasureAlgebra::standard(12);
  AtomMap f = standard_embedding(a, b);
  AtomMap g = standard_embedding(b, c);
  AtomMap h = f.then(g);
  CHECK(h.lambda() == f.lambda() * g.lambda());
  for (std::uint64_t m = 0; m < 4; ++m) CHECK(h.push(elem(a, m)) == g.push(f.push(elem(a, m))));
}

TEST_CASE("standard embeddings are recognized, shuffles are not") {
  AlgebraPtr src = MeasureAlgebra::standard(2);
  AlgebraPtr tgt = MeasureAlgebra::standard(6);
  CHECK(is_standard_block_embedding(standard_embedding(src, tgt)));
  AtomMap shuffled(src, tgt, {{0, 2, 4}, {1, 3, 5}});
  CHECK_FALSE(is_standard_block_embedding(shuffled));
  CHECK(is_standard_block_embedding(AtomMap::identity(src)));
  CHECK_THROWS_AS(standard_embedding(src, MeasureAlgebra::standard(5)), std::domain_error);
}

TEST_CASE("permutations extend along standard embeddings") {
  AlgebraPtr src = MeasureAlgebra::standard(2);
  AlgebraPtr tgt = MeasureAlgebra::standard(4);
  AtomMap swap(src, src, {{1}, {0}});
  AtomMap emb = standard_embedding(src, tgt);
  AtomMap ext = extend_automorphism(swap, emb);
  CHECK(ext.is_permutation());
  CHECK(ext.lambda() == 1);
  CHECK(ext.push(elem(tgt, 0b0011)) == elem(tgt, 0b1100));
  CHECK(ext.push(elem(tgt, 0b0001)) == elem(tgt, 0b0100));
  for (std::uint64_t m = 0; m < 4; ++m)
    CHECK(ext.push(emb.push(elem(src, m))) == emb.push(swap.push(elem(src, m))));
}

TEST_CASE("mapping automorphism carries one element to another of equal measure") {
  AlgebraPtr alg = MeasureAlgebra::standard(5);
  Element a = elem(alg, 0b00111), b = elem(alg, 0b11010);
  AtomMap g = mapping_automorphism(a, b);
  CHECK(g.is_permutation());
  CHECK(g.lambda() == 1);
  CHECK(g.push(a) == b);
  CHECK_THROWS_AS(mapping_automorphism(elem(alg, 0b1), elem(alg, 0b11)), std::domain_error);
  CHECK(mapping_automorphism(elem(alg, 0b00111), elem(alg, 0b00111)).push(elem(alg, 0b00101)) ==
        elem(alg, 0b00101));

  // Only standard algebras support atomwise rematching.
  AlgebraPtr w = weighted();
  CHECK_THROWS_AS(mapping_automorphism(elem(w, 0b0100), elem(w, 0b1000)), std::domain_error);
}

TEST_CASE("finite spectrum of a standard algebra is 1..n") {
  std::vector<BigInt> got = finite_spectrum(*MeasureAlgebra::standard(5));
  CHECK(got == std::vector<BigInt>{1, 2, 3, 4, 5});
  CHECK_THROWS_AS(finite_spectrum(*weighted()), std::domain_error);
}
