#pragma once

#include "stz/chain.hpp"
#include "stz/matrix.hpp"
#include "stz/measure_algebra.hpp"
#include "stz/periodic.hpp"
#include "stz/spectrum.hpp"
#include "stz/steinitz.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace stz {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline bool looks_rational(std::string_view s) {
  if (s.empty()) return false;
  bool slash = false;
  for (char c : s) {
    if (c == '/') {
      if (slash) return false;
      slash = true;
    } else if (c < '0' || c > '9') {
      return false;
    }
  }
  return s.front() != '/' && s.back() != '/';
}

inline std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\r') out += c;
  return out;
}

}  // namespace detail

// Literal: '*'-separated factors `p^e`, `p^inf`, plain naturals, and at most
// one `rest^e` giving the default exponent. Example: "rest^1*2^inf*3^2".
inline SteinitzNumber parse_steinitz(std::string_view text) {
  text = detail::trim(text);
  if (text.empty()) throw std::invalid_argument("steinitz literal: empty");
  std::optional<Exponent> def;
  std::map<std::uint64_t, Exponent> ex;
  auto add_exp = [](std::optional<Exponent> cur, Exponent e) {
    return cur ? cur->plus(e) : e;
  };
  auto parse_exp = [](std::string_view s) -> Exponent {
    if (s == "inf") return Exponent::infinity();
    auto n = parse_integer(s);
    if (!n || *n < 0) throw std::invalid_argument("steinitz literal: bad exponent");
    return Exponent::finite(n->convert_to<std::uint64_t>());
  };
  for (std::string_view term : detail::split(text, '*')) {
    term = detail::trim(term);
    if (term.empty()) throw std::invalid_argument("steinitz literal: empty factor");
    std::size_t caret = term.find('^');
    std::string_view base = caret == std::string_view::npos ? term : term.substr(0, caret);
    if (base == "rest") {
      if (caret == std::string_view::npos) throw std::invalid_argument("steinitz literal: rest needs an exponent");
      if (def) throw std::invalid_argument("steinitz literal: repeated rest factor");
      def = parse_exp(term.substr(caret + 1));
      continue;
    }
    auto b = parse_integer(base);
    if (!b || *b < 1) throw std::invalid_argument("steinitz literal: bad factor base");
    if (caret == std::string_view::npos) {
      for (auto [p, e] : factorize(*b)) {
        std::optional<Exponent> cur;
        if (auto it = ex.find(p); it != ex.end()) cur = it->second;
        ex[p] = add_exp(cur, Exponent::finite(e));
      }
    } else {
      auto fs = factorize(*b);
      if (fs.size() != 1 || fs[0].second != 1)
        throw std::invalid_argument("steinitz literal: exponent base must be prime");
      std::uint64_t p = fs[0].first;
      std::optional<Exponent> cur;
      if (auto it = ex.find(p); it != ex.end()) cur = it->second;
      ex[p] = add_exp(cur, parse_exp(term.substr(caret + 1)));
    }
  }
  return SteinitzNumber::from_exponents(def.value_or(Exponent::finite(0)), std::move(ex));
}

// Literal: `q * s`, `q`, or `s`; a leading rational factor is the scale.
inline ScaledSteinitz parse_scaled(std::string_view text) {
  text = detail::trim(text);
  std::vector<std::string_view> tokens = detail::split(text, '*');
  std::string_view head = detail::trim(tokens[0]);
  if (detail::looks_rational(head) && head.find('/') != std::string_view::npos) {
    auto q = parse_rational(head);
    if (!q) throw std::invalid_argument("scaled literal: bad scale");
    std::string rest;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      if (i > 1) rest += "*";
      rest += std::string(detail::trim(tokens[i]));
    }
    SteinitzNumber base = rest.empty() ? SteinitzNumber::one() : parse_steinitz(rest);
    return ScaledSteinitz(*q, std::move(base));
  }
  // An integer head denotes the same value either way; fold it into the base.
  return ScaledSteinitz(1, parse_steinitz(text));
}

// Literals: `Fin(12)`, `S(inf; s)`, `S(r; s)`, `S+(r; s)`.
inline SpectrumDescriptor parse_descriptor(std::string_view text) {
  text = detail::trim(text);
  auto inner_of = [&](std::string_view prefix) -> std::optional<std::string_view> {
    if (text.size() >= prefix.size() + 1 && text.substr(0, prefix.size()) == prefix && text.back() == ')')
      return text.substr(prefix.size(), text.size() - prefix.size() - 1);
    return std::nullopt;
  };
  if (auto inner = inner_of("Fin(")) {
    auto n = parse_integer(detail::trim(*inner));
    if (!n) throw std::invalid_argument("descriptor: bad Fin argument");
    return SpectrumDescriptor::finite(*n);
  }
  bool open = false;
  std::optional<std::string_view> inner = inner_of("S+(");
  if (inner)
    open = true;
  else
    inner = inner_of("S(");
  if (!inner) throw std::invalid_argument("descriptor: expected Fin(...), S(...), or S+(...)");
  std::size_t semi = inner->find(';');
  if (semi == std::string_view::npos) throw std::invalid_argument("descriptor: expected ';'");
  std::string_view left = detail::trim(inner->substr(0, semi));
  SteinitzNumber s = parse_steinitz(detail::trim(inner->substr(semi + 1)));
  if (!open && left == "inf") return SpectrumDescriptor::unbounded(std::move(s));
  auto r = parse_rational(left);
  if (!r) throw std::invalid_argument("descriptor: bad bound");
  return open ? SpectrumDescriptor::bounded_open(*r, std::move(s))
              : SpectrumDescriptor::bounded_closed(*r, std::move(s));
}

// Literal: `period:bits`, e.g. "4:0110".
inline PeriodicWord parse_word(std::string_view text) {
  text = detail::trim(text);
  std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("word literal: expected period:bits");
  auto k = parse_integer(text.substr(0, colon));
  std::string_view bits = text.substr(colon + 1);
  if (!k || *k < 1 || BigInt(bits.size()) != *k) throw std::invalid_argument("word literal: bad period");
  AtomSet b(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      b.set(i);
    else if (bits[i] != '0')
      throw std::invalid_argument("word literal: bits must be 0/1");
  }
  return PeriodicWord::from_bits(bits.size(), std::move(b));
}

// Literal: `{2,5,9}` with 1-based positions.
inline FiniteSupportSet parse_fset(std::string_view text) {
  text = detail::trim(text);
  if (text.size() < 2 || text.front() != '{' || text.back() != '}')
    throw std::invalid_argument("set literal: expected {...}");
  std::string_view body = detail::trim(text.substr(1, text.size() - 2));
  FiniteSupportSet out;
  if (body.empty()) return out;
  for (std::string_view item : detail::split(body, ',')) {
    auto n = parse_integer(detail::trim(item));
    if (!n || *n < 1) throw std::invalid_argument("set literal: positions are naturals >= 1");
    out.insert(n->convert_to<std::uint64_t>());
  }
  return out;
}

// Literal: rows separated by ';', entries by spaces: "1 0; 1/2 1".
inline RationalMatrix parse_matrix(std::string_view text) {
  std::vector<std::vector<Rational>> rows;
  for (std::string_view row : detail::split(text, ';')) {
    std::vector<Rational> entries;
    for (std::string_view cell : detail::split(detail::trim(row), ' ')) {
      cell = detail::trim(cell);
      if (cell.empty()) continue;
      auto q = parse_rational(cell);
      if (!q) throw std::invalid_argument("matrix literal: bad entry");
      entries.push_back(*q);
    }
    if (!entries.empty()) rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw std::invalid_argument("matrix literal: empty");
  RationalMatrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw std::invalid_argument("matrix literal: ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

// Literal: `stage:bits`, e.g. "2:0110100".
inline ChainElement parse_chain_element(std::string_view text, const ChainPresentation& c) {
  text = detail::trim(text);
  std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("chain element: expected stage:bits");
  auto k = parse_integer(text.substr(0, colon));
  if (!k || *k < 1 || *k > c.depth()) throw std::invalid_argument("chain element: bad stage");
  std::size_t stage = k->convert_to<std::size_t>();
  std::string_view bits = text.substr(colon + 1);
  if (bits.size() != c.stage(stage)->atom_count())
    throw std::invalid_argument("chain element: bit count does not match the stage");
  AtomSet atoms(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      atoms.set(i);
    else if (bits[i] != '0')
      throw std::invalid_argument("chain element: bits must be 0/1");
  }
  return ChainElement{stage, std::move(atoms)};
}

// Chain documents: a presentation, optionally carrying the symbolic model
// header it was built from.
//
//   chain unital=false
//   model S(3/2; 5^inf) b=5^i
//   stage 1 standard=7
//   stage 2 standard=37
//   embed 1 1->{1,2,3,4,5},2->{6,7,8,9,10},...
struct ChainDocument {
  ChainPresentation chain;
  std::optional<SymbolicChain> model;
};

inline StageSizeRule parse_stage_rule(std::string_view text) {
  text = detail::trim(text);
  if (text.size() > 2 && text.substr(text.size() - 2) == "^i") {
    auto c = parse_integer(text.substr(0, text.size() - 2));
    if (!c || *c < 1) throw std::invalid_argument("stage rule: bad ratio");
    return StageSizeRule::geometric(*c);
  }
  std::vector<BigInt> values;
  for (std::string_view item : detail::split(text, ',')) {
    auto v = parse_integer(detail::trim(item));
    if (!v) throw std::invalid_argument("stage rule: bad entry");
    values.push_back(*v);
  }
  return StageSizeRule::explicit_list(std::move(values));
}

inline std::string chain_to_text(const ChainPresentation& c,
                                 const SymbolicChain* model = nullptr) {
  std::ostringstream out;
  out << "chain unital=" << (c.unital_flag() ? "true" : "false") << "\n";
  if (model) {
    out << "model " << model->target().to_string();
    if (model->target().kind() != SpectrumDescriptor::Kind::Finite)
      out << " b=" << model->rule().to_string();
    out << "\n";
  }
  for (std::size_t i = 1; i <= c.depth(); ++i) {
    const MeasureAlgebra& alg = *c.stage(i);
    out << "stage " << i;
    if (alg.is_standard()) {
      out << " standard=" << alg.atom_count() << "\n";
    } else {
      out << " weights=";
      for (std::size_t j = 0; j < alg.atom_count(); ++j) {
        if (j) out << ",";
        out << stz::to_string(alg.weight(j));
      }
      out << "\n";
    }
  }
  for (std::size_t i = 1; i < c.depth(); ++i) {
    out << "embed " << i << " ";
    const AtomMap& f = c.embedding(i);
    for (std::size_t j = 0; j < f.images().size(); ++j) {
      if (j) out << ",";
      out << (j + 1) << "->{";
      const auto& img = f.image_of(j);
      for (std::size_t t = 0; t < img.size(); ++t) {
        if (t) out << ",";
        out << (img[t] + 1);
      }
      out << "}";
    }
    out << "\n";
  }
  return out.str();
}

inline std::string chain_to_text(const SymbolicChain& sc) {
  return chain_to_text(sc.presentation(), &sc);
}

inline ChainDocument parse_chain_document(std::string_view text) {
  std::optional<bool> unital;
  std::optional<std::string> model_line;
  std::map<std::size_t, AlgebraPtr> stages;
  std::map<std::size_t, std::string> embeds;

  for (std::string_view raw : detail::split(text, '\n')) {
    std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::size_t sp = line.find(' ');
    std::string_view head = sp == std::string_view::npos ? line : line.substr(0, sp);
    std::string_view rest = sp == std::string_view::npos ? std::string_view{} : detail::trim(line.substr(sp + 1));
    if (head == "chain") {
      if (rest == "unital=true")
        unital = true;
      else if (rest == "unital=false")
        unital = false;
      else
        throw std::invalid_argument("chain file: expected 'chain unital=<bool>'");
    } else if (head == "model") {
      model_line = std::string(rest);
    } else if (head == "stage") {
      std::size_t sp2 = rest.find(' ');
      if (sp2 == std::string_view::npos) throw std::invalid_argument("chain file: bad stage line");
      auto idx = parse_integer(rest.substr(0, sp2));
      if (!idx || *idx < 1) throw std::invalid_argument("chain file: bad stage index");
      std::string body = detail::strip_spaces(rest.substr(sp2 + 1));
      AlgebraPtr alg;
      if (body.rfind("standard=", 0) == 0) {
        auto n = parse_integer(std::string_view(body).substr(9));
        if (!n || *n < 1) throw std::invalid_argument("chain file: bad standard size");
        alg = MeasureAlgebra::standard(n->convert_to<std::size_t>());
      } else if (body.rfind("weights=", 0) == 0) {
        std::vector<Rational> w;
        for (std::string_view item : detail::split(std::string_view(body).substr(8), ',')) {
          auto q = parse_rational(item);
          if (!q) throw std::invalid_argument("chain file: bad weight");
          w.push_back(*q);
        }
        alg = std::make_shared<const MeasureAlgebra>(std::move(w));
      } else {
        throw std::invalid_argument("chain file: stage needs standard= or weights=");
      }
      stages[idx->convert_to<std::size_t>()] = std::move(alg);
    } else if (head == "embed") {
      std::size_t sp2 = rest.find(' ');
      if (sp2 == std::string_view::npos) throw std::invalid_argument("chain file: bad embed line");
      auto idx = parse_integer(rest.substr(0, sp2));
      if (!idx || *idx < 1) throw std::invalid_argument("chain file: bad embed index");
      embeds[idx->convert_to<std::size_t>()] = detail::strip_spaces(rest.substr(sp2 + 1));
    } else {
      throw std::invalid_argument("chain file: unknown directive '" + std::string(head) + "'");
    }
  }

  if (!unital) throw std::invalid_argument("chain file: missing 'chain unital=<bool>' header");
  if (stages.empty()) throw std::invalid_argument("chain file: no stages");
  std::size_t depth = stages.rbegin()->first;
  std::vector<AlgebraPtr> stage_list;
  for (std::size_t i = 1; i <= depth; ++i) {
    auto it = stages.find(i);
    if (it == stages.end()) throw std::invalid_argument("chain file: missing stage " + std::to_string(i));
    stage_list.push_back(it->second);
  }
  std::vector<AtomMap> embed_list;
  for (std::size_t i = 1; i < depth; ++i) {
    auto it = embeds.find(i);
    if (it == embeds.end()) throw std::invalid_argument("chain file: missing embed " + std::to_string(i));
    std::vector<std::vector<std::uint32_t>> images(stage_list[i - 1]->atom_count());
    std::vector<bool> seen(images.size(), false);
    // Entries j->{t1,t2,...} separated by top-level commas.
    std::string_view body = it->second;
    std::size_t start = 0;
    int depth_braces = 0;
    std::vector<std::string_view> entries;
    for (std::size_t p = 0; p <= body.size(); ++p) {
      if (p == body.size() || (body[p] == ',' && depth_braces == 0)) {
        if (p > start) entries.push_back(body.substr(start, p - start));
        start = p + 1;
      } else if (body[p] == '{') {
        ++depth_braces;
      } else if (body[p] == '}') {
        --depth_braces;
      }
    }
    for (std::string_view entry : entries) {
      std::size_t arrow = entry.find("->");
      if (arrow == std::string_view::npos || entry.size() < arrow + 4 || entry[arrow + 2] != '{' ||
          entry.back() != '}')
        throw std::invalid_argument("chain file: bad embed entry");
      auto j = parse_integer(entry.substr(0, arrow));
      if (!j || *j < 1 || *j > images.size()) throw std::invalid_argument("chain file: embed source out of range");
      std::size_t src = j->convert_to<std::size_t>() - 1;
      if (seen[src]) throw std::invalid_argument("chain file: repeated embed source");
      seen[src] = true;
      for (std::string_view cell : detail::split(entry.substr(arrow + 3, entry.size() - arrow - 4), ',')) {
        auto t = parse_integer(cell);
        if (!t || *t < 1) throw std::invalid_argument("chain file: bad embed target atom");
        images[src].push_back(t->convert_to<std::uint32_t>() - 1);
      }
    }
    embed_list.emplace_back(stage_list[i - 1], stage_list[i], std::move(images));
  }

  ChainPresentation chain(std::move(stage_list), std::move(embed_list), *unital);
  ChainDocument doc{std::move(chain), std::nullopt};

  if (model_line) {
    std::string_view rest = detail::trim(*model_line);
    std::size_t bpos = rest.rfind(" b=");
    SpectrumDescriptor d = parse_descriptor(bpos == std::string_view::npos ? rest : rest.substr(0, bpos));
    StageSizeRule rule = bpos == std::string_view::npos
                             ? StageSizeRule::geometric(1)
                             : parse_stage_rule(rest.substr(bpos + 3));
    SymbolicChain rebuilt = construct_model(d, depth, rule);
    const ChainPresentation& rc = rebuilt.presentation();
    bool matches = rc.unital_flag() == doc.chain.unital_flag();
    for (std::size_t i = 1; matches && i <= depth; ++i)
      matches = *rc.stage(i) == *doc.chain.stage(i);
    for (std::size_t i = 1; matches && i < depth; ++i)
      matches = rc.embedding(i).images() == doc.chain.embedding(i).images();
    if (!matches)
      throw std::invalid_argument("chain file: model header is inconsistent with the stage data");
    doc.model = std::move(rebuilt);
  }
  return doc;
}

}  // namespace stz
