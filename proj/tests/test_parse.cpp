#include "stz/parse.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace stz;

namespace {

SteinitzNumber two_inf() { return SteinitzNumber::prime_power(2, Exponent::infinity()); }
SteinitzNumber five_inf() { return SteinitzNumber::prime_power(5, Exponent::infinity()); }

}  // namespace

TEST_CASE("steinitz literals round trip") {
  CHECK(parse_steinitz("1") == SteinitzNumber::one());
  CHECK(parse_steinitz("12") == SteinitzNumber::from_integer(12));
  CHECK(parse_steinitz("2*2*3") == SteinitzNumber::from_integer(12));
  CHECK(parse_steinitz("6*10") == SteinitzNumber::from_integer(60));
  CHECK(parse_steinitz("2^1*2^2*3") == SteinitzNumber::from_integer(24));
  CHECK(parse_steinitz(" 2 * 3 ") == SteinitzNumber::from_integer(6));
  CHECK(parse_steinitz("2^inf") == two_inf());
  CHECK(parse_steinitz("2^inf*2^3") == two_inf());  // infinity absorbs

  for (const char* lit : {"1", "12", "2^inf", "2^inf*3^2", "rest^inf", "rest^1*2^inf",
                          "rest^2*3^0*5^inf"}) {
    CAPTURE(lit);
    SteinitzNumber s = parse_steinitz(lit);
    CHECK(parse_steinitz(s.to_string()) == s);
  }
  CHECK(parse_steinitz("2^inf*3^2").to_string() == "2^inf*3^2");
  CHECK(parse_steinitz("3^2*2^inf").to_string() == "2^inf*3^2");
}

TEST_CASE("steinitz literals reject malformed input") {
  CHECK_THROWS_AS(parse_steinitz(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_steinitz("  "), std::invalid_argument);
  CHECK_THROWS_AS(parse_steinitz("4^2"), std::invalid_argument);  // base must be prime
  CHECK_THROWS_AS(parse_steinitz("6^inf"), std::invalid_argument);
  CHECK_THROWS_AS(parse_steinitz("rest"), std::invalid_argument);
  CHECK_THROWS_AS(parse_steinitz("rest^1*rest^2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_steinitz("2^-1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_steinitz("0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_steinitz("x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_steinitz("2**3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_steinitz("2^"), std::invalid_argument);
}

TEST_CASE("scaled literals separate scale from base") {
  CHECK(parse_scaled("3/2 * 2^inf") == ScaledSteinitz(Rational(3, 2), two_inf()));
  CHECK(parse_scaled("5/4*2^inf") == ScaledSteinitz(Rational(5, 4), two_inf()));
  CHECK(parse_scaled("3/2 * 2^inf * 3") == ScaledSteinitz(Rational(9, 2), two_inf()));
  // An integer head is just another factor of the base.
  CHECK(parse_scaled("7 * 5^inf") == ScaledSteinitz(7, five_inf()));
  CHECK(parse_scaled("12") == ScaledSteinitz(1, SteinitzNumber::from_integer(12)));
  // Scale and base stay distinguishable even when values agree exponentwise.
  ScaledSteinitz half = parse_scaled("1/2 * 2^inf");
  CHECK(half.scale() == Rational(1, 2));
  CHECK(half != ScaledSteinitz(1, two_inf()));
  CHECK(st_exponentwise_equal(half, ScaledSteinitz(1, two_inf())));

  // A fractional scale needs a base absorbing its denominator.
  CHECK_THROWS_AS(parse_scaled("3/2"), std::domain_error);
  CHECK_THROWS_AS(parse_scaled("3/2 * 5^inf"), std::domain_error);
  CHECK_THROWS_AS(parse_scaled("x/2 * 2^inf"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scaled(""), std::invalid_argument);
}

TEST_CASE("descriptor literals cover all four kinds") {
  CHECK(spectra_equal(parse_descriptor("Fin(12)"), SpectrumDescriptor::finite(12)));
  CHECK(spectra_equal(parse_descriptor("S(inf; 2^inf)"), SpectrumDescriptor::unbounded(two_inf())));
  CHECK(spectra_equal(parse_descriptor("S(3/2; 5^inf)"),
                      SpectrumDescriptor::bounded_closed(Rational(3, 2), five_inf())));
  CHECK(spectra_equal(parse_descriptor("S+(2; 2^inf)"),
                      SpectrumDescriptor::bounded_open(2, two_inf())));
  CHECK(spectra_equal(parse_descriptor("  S( 3/2 ;  5^inf ) "),
                      SpectrumDescriptor::bounded_closed(Rational(3, 2), five_inf())));

  for (const char* lit : {"Fin(5)", "S(inf; 2^inf)", "S(3/2; 5^inf)", "S+(2; 2^inf)"}) {
    CAPTURE(lit);
    SpectrumDescriptor d = parse_descriptor(lit);
    CHECK(spectra_equal(parse_descriptor(d.to_string()), d));
  }

  CHECK_THROWS_AS(parse_descriptor("T(1; 2^inf)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_descriptor("S(3/2)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_descriptor("Fin(x)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_descriptor("S(x; 2^inf)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_descriptor("S+(inf; 2^inf)"), std::invalid_argument);
  // Well-formed literals still pass through descriptor validation.
  CHECK_THROWS_AS(parse_descriptor("S(1/2; 2^inf)"), std::domain_error);
  CHECK_THROWS_AS(parse_descriptor("S(3/2; 12)"), std::domain_error);
}

TEST_CASE("word literals normalize to the minimal period") {
  CHECK(parse_word("4:0110").to_string() == "4:0110");
  CHECK(parse_word("4:1010").to_string() == "2:10");
  CHECK(parse_word("6:110110").to_string() == "3:110");
  CHECK(parse_word("1:0").to_string() == "1:0");
  CHECK(parse_word("3:101").at(5) == false);  // position 5 is bit 2 of "101"

  CHECK_THROWS_AS(parse_word("0110"), std::invalid_argument);
  CHECK_THROWS_AS(parse_word("3:0110"), std::invalid_argument);
  CHECK_THROWS_AS(parse_word("4:01x0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_word("0:"), std::invalid_argument);
}

TEST_CASE("set literals hold 1-based positions") {
  FiniteSupportSet s = parse_fset("{2,5,9}");
  CHECK(s.contains(2));
  CHECK(s.contains(9));
  CHECK_FALSE(s.contains(3));
  CHECK(parse_fset("{}").size() == 0);
  CHECK(parse_fset("{ 3 , 1 }").contains(1));

  CHECK_THROWS_AS(parse_fset("2,5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_fset("{0}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_fset("{a}"), std::invalid_argument);
}

TEST_CASE("matrix literals use semicolon rows and space entries") {
  RationalMatrix m = parse_matrix("1 0; 1/2 1");
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m.at(1, 0) == Rational(1, 2));
  CHECK(m.at(0, 1) == 0);
  RationalMatrix k = parse_matrix("1 2; 3 4");
  CHECK(parse_matrix(k.to_string()).to_string() == k.to_string());

  CHECK_THROWS_AS(parse_matrix(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_matrix("1 2; 3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_matrix("1 x"), std::invalid_argument);
}

TEST_CASE("chain element literals are validated against the presentation") {
  SymbolicChain sc = construct_model(SpectrumDescriptor::bounded_closed(1, two_inf()), 2,
                                     StageSizeRule::geometric(2));
  const ChainPresentation& c = sc.presentation();
  ChainElement x = parse_chain_element("1:10", c);
  CHECK(x.stage == 1);
  CHECK(x.atoms.test(0));
  CHECK_FALSE(x.atoms.test(1));
  CHECK(parse_chain_element(" 2:0110 ", c).atoms.count() == 2);
  CHECK(parse_chain_element(x.to_string(), c).atoms == x.atoms);

  CHECK_THROWS_AS(parse_chain_element("10", c), std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_element("3:10", c), std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_element("1:101", c), std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_element("1:1x", c), std::invalid_argument);
}

TEST_CASE("stage rules parse in both forms") {
  StageSizeRule g = parse_stage_rule("5^i");
  CHECK(g.is_geometric());
  CHECK(g.value(2) == 25);
  StageSizeRule e = parse_stage_rule("5,25,625");
  CHECK_FALSE(e.is_geometric());
  CHECK(e.value(3) == 625);
  CHECK(parse_stage_rule(g.to_string()).value(3) == 125);

  CHECK_THROWS_AS(parse_stage_rule("x^i"), std::invalid_argument);
  CHECK_THROWS_AS(parse_stage_rule("5,x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_stage_rule("5,7"), std::domain_error);  // not a divisor chain
}

TEST_CASE("chain documents round trip byte for byte") {
  SymbolicChain sc = construct_model(SpectrumDescriptor::bounded_closed(Rational(3, 2), five_inf()),
                                     2, StageSizeRule::geometric(5));
  std::string text = chain_to_text(sc);
  ChainDocument doc = parse_chain_document(text);
  REQUIRE(doc.model.has_value());
  CHECK(doc.chain.depth() == 2);
  CHECK_FALSE(doc.chain.unital_flag());
  CHECK(doc.chain.stage(1)->atom_count() == 7);
  CHECK(doc.chain.stage(2)->atom_count() == 37);
  CHECK(spectra_equal(doc.model->target(), sc.target()));
  CHECK(chain_to_text(*doc.model) == text);

  // Without the model header only the presentation survives.
  std::string bare = chain_to_text(sc.presentation());
  ChainDocument doc2 = parse_chain_document(bare);
  CHECK_FALSE(doc2.model.has_value());
  CHECK(chain_to_text(doc2.chain) == bare);

  // Finite models carry no stage size rule.
  SymbolicChain fin = construct_model(SpectrumDescriptor::finite(3), 2, StageSizeRule::geometric(1));
  std::string fin_text = chain_to_text(fin);
  CHECK(fin_text.find("model Fin(3)\n") != std::string::npos);
  CHECK(chain_to_text(*parse_chain_document(fin_text).model) == fin_text);
}

TEST_CASE("chain documents tolerate comments and blank lines") {
  SymbolicChain sc = construct_model(SpectrumDescriptor::bounded_closed(1, two_inf()), 2,
                                     StageSizeRule::geometric(2));
  std::string text = chain_to_text(sc);
  std::string noisy = "# produced for a round-trip check\n\n" + text + "\n# trailing note\n";
  ChainDocument doc = parse_chain_document(noisy);
  CHECK(chain_to_text(*doc.model) == text);
}

TEST_CASE("weighted stages survive a document round trip") {
  std::string text = "chain unital=false\nstage 1 weights=1/2,1/3\n";
  ChainDocument doc = parse_chain_document(text);
  CHECK(doc.chain.depth() == 1);
  CHECK_FALSE(doc.chain.stage(1)->is_standard());
  CHECK(doc.chain.stage(1)->weight(0) == Rational(1, 2));
  CHECK(chain_to_text(doc.chain) == text);
}

TEST_CASE("chain documents reject structural damage") {
  CHECK_THROWS_AS(parse_chain_document("stage 1 standard=2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_document("chain unital=maybe\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_document("chain unital=true\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_document("chain unital=true\nstage 2 standard=4\n"),
                  std::invalid_argument);  // stage 1 missing
  CHECK_THROWS_AS(
      parse_chain_document("chain unital=true\nstage 1 standard=2\nstage 2 standard=2\n"),
      std::invalid_argument);  // embed 1 missing
  CHECK_THROWS_AS(parse_chain_document("chain unital=true\nstage 1 atoms=2\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_document("banana 1\n"), std::invalid_argument);

  std::string base = "chain unital=true\nstage 1 standard=2\nstage 2 standard=2\n";
  CHECK_THROWS_AS(parse_chain_document(base + "embed 1 1->{0},2->{2}\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_document(base + "embed 1 1->{1},1->{2}\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_document(base + "embed 1 3->{1}\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_chain_document(base + "embed 1 1->2\n"), std::invalid_argument);
  // A source with no image is a malformed atom map.
  CHECK_THROWS_AS(parse_chain_document(base + "embed 1 1->{1}\n"), std::domain_error);
}

TEST_CASE("model headers must agree with the stage data") {
  // Stage size contradicts the rebuilt model.
  CHECK_THROWS_AS(
      parse_chain_document("chain unital=false\nmodel S(3/2; 5^inf) b=5^i\nstage 1 standard=8\n"),
      std::invalid_argument);
  // Stages agree but the embedding blocks are rearranged.
  SymbolicChain sc = construct_model(SpectrumDescriptor::bounded_closed(1, two_inf()), 2,
                                     StageSizeRule::geometric(2));
  std::string good = chain_to_text(sc);
  std::string tampered = good;
  std::size_t at = tampered.find("embed 1 1->{1,2},2->{3,4}");
  REQUIRE(at != std::string::npos);
  tampered.replace(at, std::string("embed 1 1->{1,2},2->{3,4}").size(),
                   "embed 1 1->{3,4},2->{1,2}");
  CHECK_NOTHROW(parse_chain_document(good));
  CHECK_THROWS_AS(parse_chain_document(tampered), std::invalid_argument);
  // The unital flag is part of the model contract.
  std::string flipped = good;
  flipped.replace(flipped.find("unital=true"), std::string("unital=true").size(), "unital=false");
  CHECK_THROWS_AS(parse_chain_document(flipped), std::invalid_argument);
}
