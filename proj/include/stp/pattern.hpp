#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace stp {

using Letter = std::int64_t;
using VarId = std::uint32_t;
using Word = std::vector<Letter>;

enum class Mode : std::uint8_t { Sequence, Set, Multiset };

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t offset, const std::string& what)
      : std::runtime_error("offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class PatternError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Atom {
  enum class Kind : std::uint8_t { Const, Var, RevVar };
  Kind kind = Kind::Var;
  std::int64_t value = 0;  // letter for Const, variable id otherwise

  static Atom constant(Letter a) { return {Kind::Const, a}; }
  static Atom var(VarId x) { return {Kind::Var, static_cast<std::int64_t>(x)}; }
  static Atom rev(VarId x) { return {Kind::RevVar, static_cast<std::int64_t>(x)}; }

  bool is_const() const { return kind == Kind::Const; }
  bool is_var() const { return kind == Kind::Var; }
  bool is_rev() const { return kind == Kind::RevVar; }
  bool has_var() const { return kind != Kind::Const; }
  VarId var_id() const { return static_cast<VarId>(value); }
  Letter letter() const { return value; }

  Atom reversed() const {
    switch (kind) {
      case Kind::Var: return rev(var_id());
      case Kind::RevVar: return var(var_id());
      default: return *this;
    }
  }

  auto operator<=>(const Atom&) const = default;
};

using PatternString = std::vector<Atom>;

// (p1 p2)^R = p2^R p1^R, a^R = a, (x^R)^R = x
inline PatternString reverse(const PatternString& p) {
  PatternString out;
  out.reserve(p.size());
  for (auto it = p.rbegin(); it != p.rend(); ++it) out.push_back(it->reversed());
  return out;
}

inline bool is_prefix(const PatternString& pre, const PatternString& s) {
  return pre.size() <= s.size() && std::equal(pre.begin(), pre.end(), s.begin());
}

inline bool is_suffix(const PatternString& suf, const PatternString& s) {
  return suf.size() <= s.size() && std::equal(suf.begin(), suf.end(), s.end() - static_cast<std::ptrdiff_t>(suf.size()));
}

inline bool is_prefix(const Word& pre, const Word& s) {
  return pre.size() <= s.size() && std::equal(pre.begin(), pre.end(), s.begin());
}

inline bool is_suffix(const Word& suf, const Word& s) {
  return suf.size() <= s.size() && std::equal(suf.begin(), suf.end(), s.end() - static_cast<std::ptrdiff_t>(suf.size()));
}

inline Word reversed(Word w) {
  std::reverse(w.begin(), w.end());
  return w;
}

// sorted-vector multiset helpers, shared by the collection modes
namespace ms {

template <class T>
bool contains(const std::vector<T>& big, const std::vector<T>& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

template <class T>
std::vector<T> minus(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

template <class T>
std::vector<T> sum(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

template <class T>
bool disjoint(const std::vector<T>& a, const std::vector<T>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else return false;
  }
  return true;
}

template <class T>
bool has_duplicates(const std::vector<T>& a) {
  return std::adjacent_find(a.begin(), a.end()) != a.end();
}

}  // namespace ms

class TuplePattern {
public:
  TuplePattern() = default;
  explicit TuplePattern(std::vector<PatternString> elems, Mode mode = Mode::Sequence)
      : elems_(std::move(elems)), mode_(mode) {
    canonicalize();
  }

  // build without renaming, for intermediate states whose variable ids matter
  static TuplePattern raw(std::vector<PatternString> elems, Mode mode = Mode::Sequence) {
    TuplePattern t;
    t.elems_ = std::move(elems);
    t.mode_ = mode;
    return t;
  }

  std::size_t arity() const { return elems_.size(); }
  Mode mode() const { return mode_; }
  const std::vector<PatternString>& elements() const { return elems_; }
  const PatternString& operator[](std::size_t i) const { return elems_[i]; }

  std::size_t atom_count() const {
    std::size_t n = 0;
    for (const auto& e : elems_) n += e.size();
    return n;
  }

  // |p1...pn| + n
  std::size_t measure() const { return atom_count() + arity(); }

  bool has_reverse() const {
    for (const auto& e : elems_)
      for (const auto& a : e)
        if (a.is_rev()) return true;
    return false;
  }

  // variables in order of first occurrence
  std::vector<VarId> variables() const {
    std::vector<VarId> out;
    for (const auto& e : elems_)
      for (const auto& a : e)
        if (a.has_var() && std::find(out.begin(), out.end(), a.var_id()) == out.end()) out.push_back(a.var_id());
    return out;
  }

  // each element a single variable (possibly reversed, which ranges over all words too), no sharing
  bool is_distinct_vars() const {
    std::vector<VarId> seen;
    for (const auto& e : elems_) {
      if (e.size() != 1 || !e[0].has_var()) return false;
      if (std::find(seen.begin(), seen.end(), e[0].var_id()) != seen.end()) return false;
      seen.push_back(e[0].var_id());
    }
    return true;
  }

  TuplePattern canonical() const {
    TuplePattern t = *this;
    t.canonicalize();
    return t;
  }

  friend bool operator==(const TuplePattern& a, const TuplePattern& b) {
    return a.mode_ == b.mode_ && a.elems_ == b.elems_;
  }
  friend bool operator<(const TuplePattern& a, const TuplePattern& b) {
    if (a.mode_ != b.mode_) return a.mode_ < b.mode_;
    return a.elems_ < b.elems_;
  }

private:
  static void rename_first_occurrence(std::vector<PatternString>& elems) {
    std::unordered_map<VarId, VarId> ren;
    for (auto& e : elems)
      for (auto& a : e)
        if (a.has_var()) {
          auto [it, fresh] = ren.try_emplace(a.var_id(), static_cast<VarId>(ren.size()));
          a.value = it->second;
        }
  }

  void canonicalize() {
    if (mode_ == Mode::Sequence) {
      rename_first_occurrence(elems_);
      return;
    }
    // collections: minimise over variable permutations of the sorted form
    rename_first_occurrence(elems_);
    auto vars = variables();
    std::vector<VarId> perm(vars.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<VarId>(i);
    std::optional<std::vector<PatternString>> best;
    auto apply = [&](const std::vector<VarId>& p) {
      auto es = elems_;
      for (auto& e : es) {
        for (auto& a : e)
          if (a.has_var()) a.value = p[a.var_id()];
        std::sort(e.begin(), e.end());
      }
      return es;
    };
    if (perm.size() > 7) {
      best = apply(perm);  // too many to search; still a valid (sorted) representative
    } else {
      do {
        auto cand = apply(perm);
        if (!best || cand < *best) best = std::move(cand);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    elems_ = std::move(*best);
  }

  std::vector<PatternString> elems_;
  Mode mode_ = Mode::Sequence;
};

inline std::size_t measure(const TuplePattern& t) { return t.measure(); }

// ---- text form -------------------------------------------------------------

inline std::string render_letter(Letter a) {
  if ((a >= '0' && a <= '9') || (a >= 'a' && a <= 'z') || (a >= 'A' && a <= 'Z'))
    return std::string("'") + static_cast<char>(a);
  return "'{" + std::to_string(a) + "}";
}

inline std::string render(const PatternString& p) {
  if (p.empty()) return "eps";
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ' ';
    const Atom& a = p[i];
    if (a.is_const()) out += render_letter(a.letter());
    else {
      out += "x" + std::to_string(a.var_id());
      if (a.is_rev()) out += "^R";
    }
  }
  return out;
}

inline std::string render(const TuplePattern& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) out += ", ";
    out += render(t[i]);
  }
  return out + ")";
}

struct ParseOptions {
  bool allow_reverse = true;
  Mode mode = Mode::Sequence;
};

namespace detail {

class PatternParser {
public:
  PatternParser(std::string_view s, ParseOptions opt) : s_(s), opt_(opt) {}

  TuplePattern parse() {
    skip_ws();
    expect('(');
    std::vector<PatternString> elems;
    skip_ws();
    if (peek() == ')') {
      ++pos_;
    } else {
      while (true) {
        elems.push_back(element());
        skip_ws();
        if (peek() == ',') { ++pos_; continue; }
        if (peek() == ')') { ++pos_; break; }
        fail(at_end() ? "expected ',' or ')'" : std::string("unexpected '") + s_[pos_] + "'");
      }
    }
    skip_ws();
    if (!at_end()) fail("trailing input");
    return TuplePattern(std::move(elems), opt_.mode);
  }

private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  void skip_ws() {
    while (!at_end() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n')) ++pos_;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  PatternString element() {
    skip_ws();
    PatternString out;
    bool saw_eps = false;
    while (true) {
      skip_ws();
      char c = peek();
      if (c == '\'') {
        ++pos_;
        if (peek() == '{') {
          ++pos_;
          std::size_t start = pos_;
          if (peek() == '-') ++pos_;
          while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
          if (pos_ == start) fail("expected integer letter");
          Letter v = std::stoll(std::string(s_.substr(start, pos_ - start)));
          expect('}');
          out.push_back(Atom::constant(v));
        } else if (std::isalnum(static_cast<unsigned char>(c = peek()))) {
          ++pos_;
          out.push_back(Atom::constant(static_cast<unsigned char>(c)));
        } else {
          fail("expected letter after quote");
        }
      } else if (ident_start(c)) {
        std::size_t start = pos_;
        while (ident_char(peek())) ++pos_;
        std::string name(s_.substr(start, pos_ - start));
        bool rev = false;
        if (peek() == '^') {
          std::size_t caret = pos_;
          ++pos_;
          if (peek() != 'R') fail("expected 'R' after '^'");
          ++pos_;
          if (!opt_.allow_reverse) throw ParseError(caret, "reversed variable while reverse is disabled");
          rev = true;
        }
        if (name == "eps" && !rev) {
          saw_eps = true;
          continue;
        }
        auto [it, fresh] = names_.try_emplace(name, static_cast<VarId>(names_.size()));
        out.push_back(rev ? Atom::rev(it->second) : Atom::var(it->second));
      } else {
        break;
      }
    }
    if (out.empty() && !saw_eps) fail("expected element");
    return out;
  }

  std::string_view s_;
  ParseOptions opt_;
  std::size_t pos_ = 0;
  std::map<std::string, VarId> names_;
};

}  // namespace detail

inline TuplePattern parse_pattern(std::string_view text, ParseOptions opt = {}) {
  return detail::PatternParser(text, opt).parse();
}

// ---- substitution ----------------------------------------------------------

using SequenceTuple = std::vector<Word>;

// row of a witness substitution; for collection modes words are sorted multisets
using SubstitutionRow = std::map<VarId, Word>;

inline Word apply_substitution(const SubstitutionRow& theta, const PatternString& p, Mode mode = Mode::Sequence) {
  Word out;
  for (const Atom& a : p) {
    if (a.is_const()) {
      Word one{a.letter()};
      if (mode == Mode::Sequence) out.push_back(a.letter());
      else {
        if (mode == Mode::Set && !ms::disjoint(out, one)) throw PatternError("set union of non-disjoint sets");
        out = ms::sum(out, one);
      }
      continue;
    }
    auto it = theta.find(a.var_id());
    if (it == theta.end()) throw PatternError("unbound variable x" + std::to_string(a.var_id()));
    if (mode == Mode::Sequence) {
      if (a.is_rev()) out.insert(out.end(), it->second.rbegin(), it->second.rend());
      else out.insert(out.end(), it->second.begin(), it->second.end());
    } else {
      if (mode == Mode::Set && !ms::disjoint(out, it->second)) throw PatternError("set union of non-disjoint sets");
      out = ms::sum(out, it->second);
    }
  }
  return out;
}

inline SequenceTuple apply_substitution(const SubstitutionRow& theta, const TuplePattern& t) {
  SequenceTuple out;
  out.reserve(t.arity());
  for (const auto& e : t.elements()) out.push_back(apply_substitution(theta, e, t.mode()));
  return out;
}

// the tuple (v1,...,vn) read as a pattern of constants
inline TuplePattern constant_pattern(const SequenceTuple& v, Mode mode = Mode::Sequence) {
  std::vector<PatternString> elems;
  for (const auto& w : v) {
    PatternString p;
    for (Letter a : w) p.push_back(Atom::constant(a));
    if (mode != Mode::Sequence) std::sort(p.begin(), p.end());
    elems.push_back(std::move(p));
  }
  return TuplePattern::raw(std::move(elems), mode);
}

// words in text: ASCII letters/digits, "eps" or empty for epsilon
inline Word word_from_chars(std::string_view s) {
  if (s == "eps") return {};
  Word w;
  for (char c : s) w.push_back(static_cast<unsigned char>(c));
  return w;
}

inline std::string word_to_chars(const Word& w) {
  std::string s;
  for (Letter a : w) s += static_cast<char>(a);
  return s;
}

}  // namespace stp
