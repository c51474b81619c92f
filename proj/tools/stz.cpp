// Command line front end for the Steinitz / measure-algebra toolkit.
//
// Exit codes: 0 success, 1 domain error, 2 parse or usage error.

#include "stz/chain.hpp"
#include "stz/parse.hpp"
#include "stz/selftest.hpp"
#include "stz/spectrum.hpp"
#include "stz/steinitz.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace stz;

const char* kUsage = R"USAGE(usage: stz <verb> [args] [flags]

  st eval <s>              canonical form of a Steinitz literal
  st lcm <s1> <s2>         least common multiple
  st div <s> <n>           divide by a natural number
  st leq <s1> <s2>         exponentwise order, prints true/false
  st connected <s1> <s2>   rational q with s1 = q * s2, or none

  spec member <t> <d>      membership of a scaled value in a spectrum
  spec equal <d1> <d2>     equality of two described spectra
  spec canon <d>           canonical invariant of a spectrum

  chain build <d>          standard model chain file for a spectrum
                           flags: --depth N (default 8), --b RULE, --out FILE
  chain classify <file>    prefix facts, plus spectrum when a model is declared
  chain measure <file> <x> normalized measure of element "stage:bits"

  equiv <fileA> <fileB>    match two model chains, print pairs and alpha
                           flags: --steps N (default 6)

  selftest                 run the built-in acceptance checks

Literals: "2^inf*3^2", "rest^1*2^inf", scaled "3/2 * 5^inf",
spectra "Fin(5)", "S(inf; 2^inf)", "S(3/2; 5^inf)", "S+(2; 2^inf)".
)USAGE";

struct Flags {
  std::size_t depth = 8;
  std::size_t steps = 6;
  std::optional<std::string> rule;
  std::optional<std::string> out;
};

std::size_t parse_count_flag(const std::string& name, const std::string& value) {
  auto n = parse_integer(value);
  if (!n || *n < 1 || *n > 64) throw std::invalid_argument(name + ": expected a count in 1..64");
  return static_cast<std::size_t>(*n);
}

// Splits positional arguments from --flag value pairs.
Flags extract_flags(std::vector<std::string>& args) {
  Flags f;
  std::vector<std::string> positional;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) {
      positional.push_back(a);
      continue;
    }
    if (i + 1 >= args.size()) throw std::invalid_argument(a + ": missing value");
    const std::string& v = args[++i];
    if (a == "--depth")
      f.depth = parse_count_flag(a, v);
    else if (a == "--steps")
      f.steps = parse_count_flag(a, v);
    else if (a == "--b")
      f.rule = v;
    else if (a == "--out")
      f.out = v;
    else
      throw std::invalid_argument("unknown flag " + a);
  }
  args = std::move(positional);
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::domain_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void expect_args(const std::vector<std::string>& args, std::size_t n, const char* what) {
  if (args.size() != n) throw std::invalid_argument(std::string(what) + ": wrong number of arguments");
}

const char* bool_word(bool b) { return b ? "true" : "false"; }

// Smallest prime dividing the base, as the default geometric stage ratio.
StageSizeRule default_rule(const SpectrumDescriptor& d) {
  if (d.kind() == SpectrumDescriptor::Kind::Finite) return StageSizeRule::geometric(1);
  const SteinitzNumber& s = d.base();
  for (std::uint64_t p : primes_up_to(1000))
    if (s.exponent_of(p) != Exponent::finite(0)) return StageSizeRule::geometric(p);
  return StageSizeRule::geometric(1);
}

// Elements in wide stages are abbreviated to their atom count.
std::string element_label(const ChainElement& x) {
  if (x.atoms.size() <= 64) return x.to_string();
  return std::to_string(x.stage) + ":#" + std::to_string(x.atoms.count());
}

int run_st(std::vector<std::string> args) {
  if (args.empty()) throw std::invalid_argument("st: missing subcommand");
  std::string sub = args.front();
  args.erase(args.begin());
  if (sub == "eval") {
    expect_args(args, 1, "st eval");
    std::cout << parse_steinitz(args[0]).to_string() << "\n";
  } else if (sub == "lcm") {
    expect_args(args, 2, "st lcm");
    std::cout << st_lcm(parse_steinitz(args[0]), parse_steinitz(args[1])).to_string() << "\n";
  } else if (sub == "div") {
    expect_args(args, 2, "st div");
    auto n = parse_integer(args[1]);
    if (!n || *n < 1) throw std::invalid_argument("st div: expected a positive integer divisor");
    std::cout << st_div_by_nat(parse_steinitz(args[0]), *n).to_string() << "\n";
  } else if (sub == "leq") {
    expect_args(args, 2, "st leq");
    std::cout << bool_word(st_leq(parse_steinitz(args[0]), parse_steinitz(args[1]))) << "\n";
  } else if (sub == "connected") {
    expect_args(args, 2, "st connected");
    auto q = rationally_connected(parse_steinitz(args[0]), parse_steinitz(args[1]));
    std::cout << (q ? stz::to_string(*q) : std::string("none")) << "\n";
  } else {
    throw std::invalid_argument("st: unknown subcommand " + sub);
  }
  return 0;
}

int run_spec(std::vector<std::string> args) {
  if (args.empty()) throw std::invalid_argument("spec: missing subcommand");
  std::string sub = args.front();
  args.erase(args.begin());
  if (sub == "member") {
    expect_args(args, 2, "spec member");
    std::cout << bool_word(member(parse_scaled(args[0]), parse_descriptor(args[1]))) << "\n";
  } else if (sub == "equal") {
    expect_args(args, 2, "spec equal");
    std::cout << bool_word(spectra_equal(parse_descriptor(args[0]), parse_descriptor(args[1]))) << "\n";
  } else if (sub == "canon") {
    expect_args(args, 1, "spec canon");
    std::cout << canonicalize(parse_descriptor(args[0])).to_string() << "\n";
  } else {
    throw std::invalid_argument("spec: unknown subcommand " + sub);
  }
  return 0;
}

int run_chain(std::vector<std::string> args, const Flags& flags) {
  if (args.empty()) throw std::invalid_argument("chain: missing subcommand");
  std::string sub = args.front();
  args.erase(args.begin());
  if (sub == "build") {
    expect_args(args, 1, "chain build");
    SpectrumDescriptor d = parse_descriptor(args[0]);
    StageSizeRule rule = flags.rule ? parse_stage_rule(*flags.rule) : default_rule(d);
    SymbolicChain sc = construct_model(d, flags.depth, rule);
    std::string text = chain_to_text(sc);
    if (flags.out) {
      std::ofstream out(*flags.out, std::ios::binary);
      if (!out) throw std::domain_error("cannot write " + *flags.out);
      out << text;
    } else {
      std::cout << text;
    }
    return 0;
  }
  if (sub == "classify") {
    expect_args(args, 1, "chain classify");
    ChainDocument doc = parse_chain_document(read_file(args[0]));
    const ChainPresentation& c = doc.chain;
    std::cout << "depth: " << c.depth() << "\n";
    std::cout << "unital: " << bool_word(c.unital_flag()) << "\n";
    std::cout << "stages: ";
    for (std::size_t i = 1; i <= c.depth(); ++i)
      std::cout << (i > 1 ? "," : "") << c.stage(i)->atom_count();
    std::cout << "\n";
    if (c.depth() > 1) {
      std::cout << "lambda: ";
      for (std::size_t i = 1; i < c.depth(); ++i)
        std::cout << (i > 1 ? "," : "") << stz::to_string(c.embedding(i).lambda());
      std::cout << "\n";
    }
    if (doc.model) {
      try {
        SpectrumDescriptor got = symbolic_spectrum(*doc.model);
        std::cout << "spectrum: " << got.to_string() << "\n";
        std::cout << "canonical: " << canonicalize(got).to_string() << "\n";
      } catch (const PrefixInconclusive& e) {
        std::cout << "spectrum: inconclusive (" << e.what() << ")\n";
      }
    }
    return 0;
  }
  if (sub == "measure") {
    expect_args(args, 2, "chain measure");
    ChainDocument doc = parse_chain_document(read_file(args[0]));
    ChainElement x = parse_chain_element(args[1], doc.chain);
    std::cout << stz::to_string(chain_measure(doc.chain, x)) << "\n";
    return 0;
  }
  throw std::invalid_argument("chain: unknown subcommand " + sub);
}

int run_equiv(std::vector<std::string> args, const Flags& flags) {
  expect_args(args, 2, "equiv");
  ChainDocument da = parse_chain_document(read_file(args[0]));
  ChainDocument db = parse_chain_document(read_file(args[1]));
  if (!da.model || !db.model)
    throw std::domain_error("equiv: both files must declare a model line");
  BackAndForthResult r = back_and_forth(*da.model, *db.model, flags.steps);
  verify_back_and_forth(*da.model, *db.model, r);
  std::cout << "step a b mu_a mu_b ratio\n";
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    const MatchedPair& p = r.pairs[i];
    std::cout << i << " " << element_label(p.a) << " " << element_label(p.b) << " "
              << stz::to_string(p.mu_a) << " " << stz::to_string(p.mu_b) << " ";
    if (p.mu_a == 0)
      std::cout << "-";
    else
      std::cout << stz::to_string(p.mu_b / p.mu_a);
    std::cout << "\n";
  }
  if (!r.complete) {
    std::cout << "incomplete: " << r.note << "\n";
    return 1;
  }
  std::cout << "alpha = " << stz::to_string(*r.alpha) << "\n";
  return 0;
}

int run(std::vector<std::string> args) {
  Flags flags = extract_flags(args);
  if (args.empty()) throw std::invalid_argument("missing verb");
  std::string verb = args.front();
  args.erase(args.begin());
  if (verb == "help") {
    std::cout << kUsage;
    return 0;
  }
  if (verb == "st") return run_st(std::move(args));
  if (verb == "spec") return run_spec(std::move(args));
  if (verb == "chain") return run_chain(std::move(args), flags);
  if (verb == "equiv") return run_equiv(std::move(args), flags);
  if (verb == "selftest") {
    expect_args(args, 0, "selftest");
    return selftest::report(selftest::run_all(), std::cout);
  }
  throw std::invalid_argument("unknown verb " + verb);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) {
    std::cerr << kUsage;
    return 2;
  }
  if (args[0] == "--help" || args[0] == "-h") {
    std::cout << kUsage;
    return 0;
  }
  try {
    return run(std::move(args));
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run 'stz help' for usage\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
