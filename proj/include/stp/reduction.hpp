#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stp/pattern.hpp"

namespace stp {

// In collection modes Prefix/CPrefix/Epsilon play the roles of Subset/CSubset/Empty.
enum class Rule : std::uint8_t { Epsilon, Prefix, CPrefix, Postfix, CPostfix, RPrefix, RPostfix };

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Epsilon: return "Epsilon";
    case Rule::Prefix: return "Prefix";
    case Rule::CPrefix: return "CPrefix";
    case Rule::Postfix: return "Postfix";
    case Rule::CPostfix: return "CPostfix";
    case Rule::RPrefix: return "RPrefix";
    case Rule::RPostfix: return "RPostfix";
  }
  return "?";
}

inline bool has_aux(Rule r) {
  return r == Rule::Prefix || r == Rule::Postfix || r == Rule::RPrefix || r == Rule::RPostfix;
}
inline bool has_const(Rule r) { return r == Rule::CPrefix || r == Rule::CPostfix; }

struct RuleSet {
  bool postfix = false;
  bool reverse = false;
  static RuleSet all() { return {true, true}; }
  bool allows(Rule r) const {
    switch (r) {
      case Rule::Postfix:
      case Rule::CPostfix: return postfix;
      case Rule::RPrefix:
      case Rule::RPostfix: return reverse;
      default: return true;
    }
  }
};

struct PredStep {
  Rule rule = Rule::Epsilon;
  std::size_t j = 0;  // principal element
  std::optional<std::size_t> i;  // auxiliary element
  std::optional<Letter> constant;

  friend bool operator==(const PredStep&, const PredStep&) = default;
};

namespace detail {

inline std::optional<PatternString> strip_seq(const PatternString& target, Rule rule, const PatternString* aux,
                                              std::optional<Letter> a) {
  auto tail = [&](std::size_t n) { return PatternString(target.begin() + static_cast<std::ptrdiff_t>(n), target.end()); };
  auto head = [&](std::size_t n) {
    return PatternString(target.begin(), target.end() - static_cast<std::ptrdiff_t>(n));
  };
  switch (rule) {
    case Rule::Prefix:
      if (!is_prefix(*aux, target)) return std::nullopt;
      return tail(aux->size());
    case Rule::Postfix:
      if (!is_suffix(*aux, target)) return std::nullopt;
      return head(aux->size());
    case Rule::RPrefix: {
      auto r = reverse(*aux);
      if (!is_prefix(r, target)) return std::nullopt;
      return tail(r.size());
    }
    case Rule::RPostfix: {
      auto r = reverse(*aux);
      if (!is_suffix(r, target)) return std::nullopt;
      return head(r.size());
    }
    case Rule::CPrefix:
      if (target.empty() || target.front() != Atom::constant(*a)) return std::nullopt;
      return tail(1);
    case Rule::CPostfix:
      if (target.empty() || target.back() != Atom::constant(*a)) return std::nullopt;
      return head(1);
    case Rule::Epsilon: break;
  }
  return std::nullopt;
}

inline std::optional<PatternString> strip_coll(const PatternString& target, Rule rule, const PatternString* aux,
                                               std::optional<Letter> a) {
  switch (rule) {
    case Rule::Prefix:
      if (!ms::contains(target, *aux)) return std::nullopt;
      return ms::minus(target, *aux);
    case Rule::CPrefix: {
      PatternString one{Atom::constant(*a)};
      if (!ms::contains(target, one)) return std::nullopt;
      return ms::minus(target, one);
    }
    default: return std::nullopt;
  }
}

}  // namespace detail

// Applies the shape change of `step` to t's own elements; absent when the shape does not fit.
// This is the successor for a valid step on t, and the residual when t plays the role of t0.
inline std::optional<TuplePattern> strip(const TuplePattern& t, const PredStep& step) {
  if (step.j >= t.arity() || (step.i && *step.i >= t.arity())) return std::nullopt;
  auto elems = t.elements();
  if (step.rule == Rule::Epsilon) {
    if (!elems[step.j].empty()) return std::nullopt;
    elems.erase(elems.begin() + static_cast<std::ptrdiff_t>(step.j));
    return TuplePattern::raw(std::move(elems), t.mode());
  }
  const PatternString* aux = step.i ? &elems[*step.i] : nullptr;
  auto r = t.mode() == Mode::Sequence ? detail::strip_seq(elems[step.j], step.rule, aux, step.constant)
                                      : detail::strip_coll(elems[step.j], step.rule, aux, step.constant);
  if (!r) return std::nullopt;
  elems[step.j] = std::move(*r);
  return TuplePattern::raw(std::move(elems), t.mode());
}

// Visits steps t ≼ t' in the order: j ascending, then rule, then i ascending. Stops when f returns true.
inline void for_each_step(const TuplePattern& t, const RuleSet& rules,
                          const std::function<bool(const PredStep&, TuplePattern&&)>& f) {
  static constexpr Rule seq_order[] = {Rule::Epsilon, Rule::Prefix,  Rule::CPrefix, Rule::Postfix,
                                       Rule::CPostfix, Rule::RPrefix, Rule::RPostfix};
  static constexpr Rule coll_order[] = {Rule::Epsilon, Rule::Prefix, Rule::CPrefix};
  const bool seq = t.mode() == Mode::Sequence;
  const std::size_t n = t.arity();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& pj = t[j];
    const Rule* begin = seq ? std::begin(seq_order) : std::begin(coll_order);
    const Rule* end = seq ? std::end(seq_order) : std::end(coll_order);
    for (const Rule* r = begin; r != end; ++r) {
      if (!rules.allows(*r)) continue;
      if (*r == Rule::Epsilon) {
        if (pj.empty()) {
          PredStep s{Rule::Epsilon, j, std::nullopt, std::nullopt};
          if (f(s, std::move(*strip(t, s)))) return;
        }
        continue;
      }
      if (has_const(*r)) {
        if (seq) {
          if (pj.empty()) continue;
          const Atom& a = *r == Rule::CPrefix ? pj.front() : pj.back();
          if (!a.is_const()) continue;
          PredStep s{*r, j, std::nullopt, a.letter()};
          if (f(s, std::move(*strip(t, s)))) return;
        } else {
          Letter last = 0;
          bool first = true;
          for (const Atom& a : pj) {
            if (!a.is_const() || (!first && a.letter() == last)) continue;
            first = false;
            last = a.letter();
            PredStep s{*r, j, std::nullopt, a.letter()};
            if (f(s, std::move(*strip(t, s)))) return;
          }
        }
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (i == j || t[i].empty()) continue;
        PredStep s{*r, j, i, std::nullopt};
        auto next = strip(t, s);
        if (next && f(s, std::move(*next))) return;
      }
    }
  }
}

inline std::vector<std::pair<PredStep, TuplePattern>> pred_steps(const TuplePattern& t, const RuleSet& rules = {}) {
  std::vector<std::pair<PredStep, TuplePattern>> out;
  for_each_step(t, rules, [&](const PredStep& s, TuplePattern&& n) {
    out.emplace_back(s, std::move(n));
    return false;
  });
  return out;
}

inline std::optional<std::pair<PredStep, TuplePattern>> first_step(const TuplePattern& t, const RuleSet& rules = {}) {
  std::optional<std::pair<PredStep, TuplePattern>> out;
  for_each_step(t, rules, [&](const PredStep& s, TuplePattern&& n) {
    out.emplace(s, std::move(n));
    return true;
  });
  return out;
}

// greedy normal form; any strategy reaches the same verdict
inline TuplePattern normalize(TuplePattern t, const RuleSet& rules = {}) {
  while (auto s = first_step(t, rules)) t = std::move(s->second);
  return t;
}

inline bool is_solvable(const TuplePattern& t, const RuleSet& rules = {}) {
  return normalize(t, rules).is_distinct_vars();
}

// t0[t1 -> t2] where t2 is the successor of t1 under `step`
inline std::optional<TuplePattern> residual(const TuplePattern& t0, const TuplePattern& t1, const PredStep& step) {
  if (t0.arity() != t1.arity()) throw PatternError("residual: arity mismatch");
  return strip(t0, step);
}

namespace detail {
inline bool includes_unchecked(TuplePattern t1, TuplePattern t2, const RuleSet& rules) {
  if (t1.arity() != t2.arity()) return false;
  while (!t2.is_distinct_vars()) {
    auto s = first_step(t2, rules);
    if (!s) return false;  // unreachable for solvable t2
    auto r = residual(t1, t2, s->first);
    if (!r) return false;
    t1 = std::move(*r);
    t2 = std::move(s->second);
  }
  return true;
}
}  // namespace detail

// L(t1) ⊆ L(t2)
inline bool includes(const TuplePattern& t1, const TuplePattern& t2, const RuleSet& rules = {}) {
  if (t1.arity() != t2.arity()) return false;
  if (!is_solvable(t1, rules) || !is_solvable(t2, rules))
    throw PatternError("includes: pattern is not solvable under the enabled rules");
  return detail::includes_unchecked(t1, t2, rules);
}

inline bool equivalent(const TuplePattern& t1, const TuplePattern& t2, const RuleSet& rules = {}) {
  return includes(t1, t2, rules) && includes(t2, t1, rules);
}

inline bool member(const SequenceTuple& v, const TuplePattern& t, const RuleSet& rules = {}) {
  if (v.size() != t.arity()) throw PatternError("member: arity mismatch");
  if (!is_solvable(t, rules)) throw PatternError("member: pattern is not solvable under the enabled rules");
  return detail::includes_unchecked(constant_pattern(v, t.mode()), t, rules);
}

}  // namespace stp
