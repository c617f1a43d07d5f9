#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "stp/chc/system.hpp"
#include "stp/reduction.hpp"

namespace stp::solver {

using chc::Expr;
using chc::Sort;

namespace detail {

// piece of an element's value, in terms of the surviving elements
struct Part {
  bool is_const = false;
  Letter a = 0;
  std::size_t elem = 0;
  bool rev = false;
};
using Parts = std::vector<Part>;

inline Parts reversed_parts(const Parts& p) {
  Parts out(p.rbegin(), p.rend());
  for (auto& x : out)
    if (!x.is_const) x.rev = !x.rev;
  return out;
}

// replace every occurrence of element e by `by` (reversed where e occurs reversed)
inline void expand(std::vector<Parts>& syms, std::size_t e, const Parts& by) {
  Parts rby = reversed_parts(by);
  for (auto& s : syms) {
    Parts out;
    for (const auto& x : s) {
      if (x.is_const || x.elem != e) out.push_back(x);
      else out.insert(out.end(), x.rev ? rby.begin() : by.begin(), x.rev ? rby.end() : by.end());
    }
    s = std::move(out);
  }
}

inline bool contains_node(const Expr& hay, const chc::Node* n) {
  if (hay.get() == n) return true;
  for (const auto& a : hay->args)
    if (contains_node(a, n)) return true;
  return false;
}

// Any strategy normalises; stripping the longest, rightmost element first
// rebuilds outputs from inputs, e.g. (x, y, x^R y) gives l3 = rev(l1)·l2.
inline std::optional<std::pair<PredStep, TuplePattern>> preferred_step(const TuplePattern& t, const RuleSet& rules) {
  std::optional<std::pair<PredStep, TuplePattern>> best;
  auto rank = [&](const PredStep& s) {
    return std::make_tuple(s.rule == Rule::Epsilon, t[s.j].size(), s.j);
  };
  for_each_step(t, rules, [&](const PredStep& s, TuplePattern&& next) {
    if (!best || rank(s) > rank(best->first)) best.emplace(s, std::move(next));
    return false;
  });
  return best;
}

// When every variable is some element on its own, the other elements are
// just rebuilt from those: (x, y, xy) gives a3 = a1·a2 with no guards.
inline std::optional<Expr> direct_formula(const TuplePattern& t, const std::vector<Expr>& args) {
  using namespace chc;
  const bool seq = t.mode() == Mode::Sequence;
  std::map<VarId, std::size_t> def;
  for (std::size_t j = 0; j < t.arity(); ++j)
    if (t[j].size() == 1 && t[j][0].is_var()) def.emplace(t[j][0].var_id(), j);
  for (auto x : t.variables())
    if (!def.count(x)) return std::nullopt;
  std::vector<Expr> eqs;
  for (std::size_t j = 0; j < t.arity(); ++j) {
    if (t[j].size() == 1 && t[j][0].is_var() && def[t[j][0].var_id()] == j) continue;
    Expr acc;
    std::vector<std::int64_t> run;
    auto push = [&](Expr e) { acc = acc ? (seq ? concat(acc, e) : coll_union(acc, e, t.mode())) : e; };
    auto flush = [&] {
      if (run.empty()) return;
      if (seq) push(list_lit(run));
      else
        for (auto a : run) push(coll_single(int_lit(a), t.mode()));
      run.clear();
    };
    for (const auto& a : t[j]) {
      if (a.is_const()) {
        run.push_back(a.letter());
        continue;
      }
      flush();
      const Expr& d = args[def[a.var_id()]];
      push(a.is_rev() ? rev(d) : d);
    }
    flush();
    if (!acc) acc = seq ? nil() : lit(Value::coll({}));
    eqs.push_back(eq(args[j], acc));
  }
  return and_(eqs);
}

}  // namespace detail

// Quantifier-free formula for (args) ∈ L(t): the ≼-normalisation of t is replayed
// on the argument terms, each strip becoming ldiff/rdiff (or collection difference)
// under its definedness guard; every element is then rebuilt from the survivors.
// Sequence mode expects List terms, collection modes expect collection terms.
inline Expr pattern_to_formula(const TuplePattern& t, const std::vector<Expr>& args,
                               const RuleSet& rules = RuleSet::all()) {
  using namespace chc;
  if (args.size() != t.arity()) throw PatternError("pattern_to_formula: arity mismatch");
  if (!is_solvable(t, rules)) throw PatternError("pattern_to_formula: pattern is not solvable");
  if (auto f = detail::direct_formula(t, args)) return *f;
  const bool seq = t.mode() == Mode::Sequence;
  const std::size_t n = t.arity();
  std::vector<Expr> d = args;  // current value of each original element
  std::vector<detail::Parts> syms(n);
  for (std::size_t j = 0; j < n; ++j) syms[j] = {detail::Part{false, 0, j, false}};
  std::vector<std::size_t> alive(n);
  for (std::size_t j = 0; j < n; ++j) alive[j] = j;
  struct Strip {
    Expr guard;
    const Node* result;
  };
  std::vector<Strip> strips;

  TuplePattern cur = t;
  while (!cur.is_distinct_vars()) {
    auto st = detail::preferred_step(cur, rules);
    if (!st) throw PatternError("pattern_to_formula: normalisation stuck");
    const PredStep& s = st->first;
    std::size_t J = alive[s.j];
    detail::Part self{false, 0, J, false};
    if (s.rule == Rule::Epsilon) {
      detail::expand(syms, J, {});
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(s.j));
      cur = std::move(st->second);
      continue;
    }
    Expr piece;
    detail::Part p;
    if (has_const(s.rule)) {
      p = detail::Part{true, *s.constant, 0, false};
      piece = seq ? list_lit({*s.constant}) : coll_single(int_lit(*s.constant), t.mode());
    } else {
      std::size_t I = alive[*s.i];
      bool r = s.rule == Rule::RPrefix || s.rule == Rule::RPostfix;
      p = detail::Part{false, 0, I, r};
      piece = r ? rev(d[I]) : d[I];
    }
    bool front = s.rule == Rule::Prefix || s.rule == Rule::CPrefix || s.rule == Rule::RPrefix;
    Expr guard;
    if (!seq) {
      guard = coll_sub(piece, d[J]);
      d[J] = coll_diff(d[J], piece, t.mode());
    } else if (front) {
      guard = is_prefix(piece, d[J]);
      d[J] = ldiff(piece, d[J]);
    } else {
      guard = is_suffix(piece, d[J]);
      d[J] = rdiff(piece, d[J]);
    }
    strips.push_back({guard, d[J].get()});
    detail::expand(syms, J, front ? detail::Parts{p, self} : detail::Parts{self, p});
    cur = std::move(st->second);
  }

  auto build = [&](const detail::Parts& ps) -> Expr {
    Expr acc;
    std::vector<std::int64_t> run;
    auto push = [&](Expr e) { acc = acc ? (seq ? concat(acc, e) : coll_union(acc, e, t.mode())) : e; };
    auto flush = [&] {
      if (run.empty()) return;
      if (seq) push(list_lit(run));
      else
        for (auto a : run) push(coll_single(int_lit(a), t.mode()));
      run.clear();
    };
    for (const auto& x : ps) {
      if (x.is_const) {
        run.push_back(x.a);
        continue;
      }
      flush();
      push(x.rev ? rev(d[x.elem]) : d[x.elem]);
    }
    flush();
    if (!acc) acc = seq ? nil() : lit(Value::coll({}));
    return acc;
  };
  std::vector<Expr> eqs;
  for (std::size_t j = 0; j < n; ++j) {
    Expr rhs = build(syms[j]);
    if (structurally_equal(rhs, args[j])) continue;
    eqs.push_back(eq(args[j], rhs));
  }
  // keep the guards of strips whose result is still referenced
  std::vector<Expr> needed = eqs;
  std::vector<Expr> guards;
  for (auto it = strips.rbegin(); it != strips.rend(); ++it) {
    bool used = false;
    for (const auto& e : needed)
      if (detail::contains_node(e, it->result)) {
        used = true;
        break;
      }
    if (!used) continue;
    guards.push_back(it->guard);
    needed.push_back(it->guard);
  }
  std::reverse(guards.begin(), guards.end());
  guards.insert(guards.end(), eqs.begin(), eqs.end());
  return and_(guards);
}

// ---- candidate models --------------------------------------------------------

inline std::string formal(std::size_t k) { return "#" + std::to_string(k); }

// Interpretation of one predicate: a pattern over some of its arguments
// (a disjunction when patterns accumulate) conjoined with `extra`.
struct PredModel {
  std::vector<Sort> params;
  std::vector<std::size_t> positions;  // parameters feeding the pattern
  Mode mode = Mode::Sequence;
  std::vector<TuplePattern> patterns;
  bool empty = false;  // no known member: interpreted as false
  Expr extra = chc::tru();  // over formals #0, #1, ...

  Expr pattern_arg(const Expr& a) const {
    if (mode == Mode::Sequence) return a;
    return a->sort == Sort::List ? chc::coll_of(a, mode) : chc::coll_single(a, mode);
  }

  Expr formula(const std::vector<Expr>& args) const {
    using namespace chc;
    if (empty) return fls();
    std::vector<Expr> pargs;
    for (auto p : positions) pargs.push_back(pattern_arg(args[p]));
    std::vector<Expr> alts;
    for (const auto& t : patterns) alts.push_back(pattern_to_formula(t, pargs));
    Expr pat = patterns.empty() ? tru() : or_(alts);
    std::map<std::string, Expr> sub;
    for (std::size_t k = 0; k < args.size(); ++k) sub[formal(k)] = args[k];
    return and_(pat, substitute(extra, sub));
  }
};

struct CandidateModel {
  std::map<std::string, PredModel> preds;

  Expr apply(const chc::PredAtom& a) const {
    auto it = preds.find(a.pred);
    if (it == preds.end()) return chc::tru();
    return it->second.formula(a.args);
  }
};

inline std::vector<std::string> display_names(const chc::PredDecl& d) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < d.params.size(); ++k) out.push_back("x" + std::to_string(k + 1));
  return out;
}

// One line per predicate: "P(x1, x2) := formula" in SMT-LIB syntax.
inline std::string render(const CandidateModel& m, const chc::ChcSystem& s) {
  std::string out;
  for (const auto& d : s.preds) {
    auto it = m.preds.find(d.name);
    if (it == m.preds.end()) continue;
    auto names = display_names(d);
    std::vector<Expr> args;
    std::string head = d.name + "(";
    for (std::size_t k = 0; k < names.size(); ++k) {
      args.push_back(chc::var(names[k], d.params[k]));
      head += (k ? ", " : "") + names[k];
    }
    out += head + ") := " + chc::render(it->second.formula(args)) + "\n";
  }
  return out;
}

// Definition-style rendering, one define-fun per predicate.
inline std::string render_smtlib(const CandidateModel& m, const chc::ChcSystem& s) {
  std::string out = "(\n";
  for (const auto& d : s.preds) {
    auto it = m.preds.find(d.name);
    if (it == m.preds.end()) continue;
    auto names = display_names(d);
    std::vector<Expr> args;
    out += "  (define-fun " + d.name + " (";
    for (std::size_t k = 0; k < names.size(); ++k) {
      args.push_back(chc::var(names[k], d.params[k]));
      out += std::string(k ? " " : "") + "(" + names[k] + " " + chc::sort_text(d.params[k], chc::Dialect::Adt) + ")";
    }
    out += ") Bool\n    " + chc::render(it->second.formula(args)) + ")\n";
  }
  return out + ")\n";
}

}  // namespace stp::solver
