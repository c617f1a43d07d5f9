#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stp/chc/engine.hpp"
#include "stp/chc/smtlib.hpp"
#include "stp/smt/backend.hpp"
#include "stp/solver/formula.hpp"

namespace stp::solver {

using chc::Op;

namespace detail {

// |e| for a list term; absent when it has no linear length
inline std::optional<Expr> len_of(const Expr& e) {
  using namespace chc;
  switch (e->op) {
    case Op::Var: return var(e->name, Sort::Int);
    case Op::ListLit: return int_lit(static_cast<std::int64_t>(e->lit.seq.size()));
    case Op::Cons: {
      auto t = len_of(e->args[1]);
      if (!t) return std::nullopt;
      return add(int_lit(1), *t);
    }
    case Op::Concat: {
      auto a = len_of(e->args[0]);
      auto b = len_of(e->args[1]);
      if (!a || !b) return std::nullopt;
      return add(*a, *b);
    }
    case Op::Rev: return len_of(e->args[0]);
    default: return std::nullopt;
  }
}

struct Abs {
  Expr f;
  bool exact;  // equivalent to the source, not just implied by it
};

inline Abs abs_formula(const Expr& e, bool goal);

inline std::optional<Expr> int_term(const Expr& e) {
  using namespace chc;
  switch (e->op) {
    case Op::Var:
    case Op::IntLit: return e;
    case Op::Len: return len_of(e->args[0]);
    case Op::Add:
    case Op::Sub:
    case Op::Neg:
    case Op::Mul: {
      std::vector<Expr> xs;
      for (const auto& a : e->args) {
        auto t = int_term(a);
        if (!t) return std::nullopt;
        xs.push_back(*t);
      }
      return rebuild(e, xs);
    }
    case Op::Ite: {
      Abs c = abs_formula(e->args[0], false);
      auto a = int_term(e->args[1]);
      auto b = int_term(e->args[2]);
      if (!c.exact || !a || !b) return std::nullopt;
      return ite(c.f, *a, *b);
    }
    default: return std::nullopt;
  }
}

// Over-approximation of a clause-body formula over lengths.
inline Abs abs_formula(const Expr& e, bool goal) {
  using namespace chc;
  const auto& a = e->args;
  const Abs dropped{tru(), false};
  switch (e->op) {
    case Op::BoolLit: return {e, true};
    case Op::And:
    case Op::Or: {
      std::vector<Expr> xs;
      bool exact = true;
      for (const auto& x : a) {
        Abs r = abs_formula(x, goal);
        xs.push_back(r.f);
        exact = exact && r.exact;
      }
      return {e->op == Op::And ? and_(xs) : or_(xs), exact};
    }
    case Op::Not: {
      Abs r = abs_formula(a[0], goal);
      if (!r.exact) return dropped;
      return {not_(r.f), true};
    }
    case Op::Implies: return abs_formula(or_(not_(a[0]), a[1]), goal);
    case Op::Eq:
    case Op::Ne:
    case Op::Le:
    case Op::Lt:
    case Op::Ge:
    case Op::Gt: {
      if (a[0]->sort == Sort::Int) {
        auto x = int_term(a[0]);
        auto y = int_term(a[1]);
        if (!x || !y) return dropped;
        return {rebuild(e, {*x, *y}), true};
      }
      if (a[0]->sort != Sort::List) return dropped;
      auto x = len_of(a[0]);
      auto y = len_of(a[1]);
      if (!x || !y) return dropped;
      if (e->op == Op::Eq) return {eq(*x, *y), false};
      // list disequalities survive in goals only
      if (e->op == Op::Ne && goal) return {ne(*x, *y), false};
      return dropped;
    }
    case Op::IsNil: {
      auto x = len_of(a[0]);
      if (!x) return dropped;
      return {eq(*x, int_lit(0)), true};
    }
    case Op::IsCons: {
      auto x = len_of(a[0]);
      if (!x) return dropped;
      return {ge(*x, int_lit(1)), true};
    }
    case Op::IsPrefix:
    case Op::IsSuffix: {
      auto x = len_of(a[0]);
      auto y = len_of(a[1]);
      if (!x || !y) return dropped;
      return {le(*x, *y), false};
    }
    default: return dropped;
  }
}

inline chc::PredAtom abs_atom(const chc::PredAtom& at) {
  chc::PredAtom out{at.pred, {}};
  for (const auto& x : at.args) {
    auto t = x->sort == Sort::List ? len_of(x) : int_term(x);
    if (!t) throw chc::ChcError("length abstraction: argument " + chc::render(x) + " of " + at.pred + " has no length");
    out.args.push_back(*t);
  }
  return out;
}

inline chc::Clause abs_clause(const chc::Clause& c) {
  using namespace chc;
  Clause out;
  for (const auto& b : c.body) out.body.push_back(abs_atom(b));
  if (c.head) out.head = abs_atom(*c.head);
  std::vector<Expr> cs;
  // lengths are non-negative
  for (const auto& [n, s] : c.vars)
    if (s == Sort::List) cs.push_back(ge(var(n, Sort::Int), int_lit(0)));
  cs.push_back(abs_formula(c.constraint, c.is_goal()).f);
  out.constraint = and_(cs);
  return out;
}

}  // namespace detail

// Lists become their lengths: [] ↦ 0, x::l ↦ 1+l, list equalities become
// length equalities, list disequalities are kept in goals and dropped elsewhere.
inline chc::ChcSystem length_abstract(const chc::ChcSystem& s) {
  chc::ChcSystem out;
  for (const auto& p : s.preds) {
    chc::PredDecl d{p.name, p.params};
    for (auto& x : d.params)
      if (x == Sort::List) x = Sort::Int;
    out.preds.push_back(d);
  }
  for (const auto& c : s.definite) out.definite.push_back(detail::abs_clause(c));
  for (const auto& c : s.goals) out.goals.push_back(detail::abs_clause(c));
  chc::check_system(out);
  return out;
}

// Integer interpretations keyed by predicate, over formals #0, #1, ...
using IntModel = std::map<std::string, Expr>;

struct IntFitConfig {
  chc::SampleBudget sampling{5, 40, 60, chc::Domain{0, 0, 0, 0, 5}};
  smt::Bounds check{4, 2};
  int max_rounds = 8;
  int derive_depth = 12;
};

namespace detail {

struct Linear {
  std::vector<std::int64_t> coef;  // one per parameter; the target's stays 0
  std::int64_t c = 0;

  std::int64_t eval(const std::vector<std::int64_t>& v) const {
    std::int64_t s = c;
    for (std::size_t k = 0; k < v.size(); ++k) s += coef[k] * v[k];
    return s;
  }
  Expr expr() const {
    using namespace chc;
    Expr acc;
    auto push = [&](Expr e) { acc = acc ? add(acc, e) : e; };
    for (std::size_t k = 0; k < coef.size(); ++k) {
      if (coef[k] == 0) continue;
      Expr x = var(formal(k), Sort::Int);
      push(coef[k] == 1 ? x : mul(coef[k], x));
    }
    if (c != 0 || !acc) {
      if (!acc) return int_lit(c);
      acc = c > 0 ? add(acc, int_lit(c)) : sub(acc, int_lit(-c));
    }
    return acc;
  }
};

// candidate right-hand sides for parameter `target`, simplest first
inline std::vector<Linear> linear_candidates(std::size_t k, std::size_t target) {
  std::vector<Linear> out;
  std::vector<std::size_t> others;
  for (std::size_t q = 0; q < k; ++q)
    if (q != target) others.push_back(q);
  std::size_t combos = 1;
  for (std::size_t q = 0; q < others.size(); ++q) combos *= 3;
  for (std::size_t m = 0; m < combos; ++m) {
    Linear l{std::vector<std::int64_t>(k, 0), 0};
    std::size_t x = m;
    for (auto q : others) {
      l.coef[q] = static_cast<std::int64_t>(x % 3) - 1;
      x /= 3;
    }
    for (std::int64_t c : {0, 1, -1, 2}) {
      l.c = c;
      out.push_back(l);
    }
  }
  auto weight = [](const Linear& l) {
    int w = 0;
    for (auto c : l.coef) w += c != 0;
    return std::make_pair(w, l.c < 0 ? -l.c : l.c);
  };
  std::stable_sort(out.begin(), out.end(), [&](const Linear& a, const Linear& b) { return weight(a) < weight(b); });
  return out;
}

// v_target = e, or v_target = min/max(e1, e2), consistent with every sample
inline Expr fit_one(const std::vector<std::vector<std::int64_t>>& rows, std::size_t k) {
  using namespace chc;
  if (rows.empty()) return fls();
  for (std::size_t t = k; t-- > 0;)
    for (const auto& l : linear_candidates(k, t))
      if (std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return r[t] == l.eval(r); }))
        return eq(var(formal(t), Sort::Int), l.expr());
  for (std::size_t t = k; t-- > 0;) {
    auto cands = linear_candidates(k, t);
    for (std::size_t i = 0; i < cands.size(); ++i)
      for (std::size_t j = i + 1; j < cands.size(); ++j)
        for (bool is_min : {true, false}) {
          const auto& a = cands[i];
          const auto& b = cands[j];
          bool ok = std::all_of(rows.begin(), rows.end(), [&](const auto& r) {
            auto x = a.eval(r), y = b.eval(r);
            return r[t] == (is_min ? std::min(x, y) : std::max(x, y));
          });
          if (!ok) continue;
          Expr cond = is_min ? le(a.expr(), b.expr()) : ge(a.expr(), b.expr());
          return eq(var(formal(t), Sort::Int), ite(cond, a.expr(), b.expr()));
        }
  }
  return tru();
}

inline Expr instantiate(const Expr& body, const std::vector<Expr>& args) {
  std::map<std::string, Expr> sub;
  for (std::size_t k = 0; k < args.size(); ++k) sub[formal(k)] = args[k];
  return chc::substitute(body, sub);
}

}  // namespace detail

// Definite clause i of s under integer model m, as a validity query.
inline Expr clause_query(const chc::Clause& c, const std::function<Expr(const chc::PredAtom&)>& interp) {
  std::vector<Expr> hyps{c.constraint};
  for (const auto& b : c.body) hyps.push_back(interp(b));
  return chc::implies(chc::and_(hyps), c.head ? interp(*c.head) : chc::fls());
}

// Built-in integer CHC fallback: samples the least model of an integer system,
// fits each predicate with at most two guarded linear pieces, and refits on
// derivable counterexamples until the definite clauses hold within bounds.
inline std::optional<IntModel> fit_int_model(const chc::ChcSystem& s, std::uint64_t seed, std::string& why,
                                             const IntFitConfig& cfg = {}, const std::atomic<bool>* cancel = nullptr) {
  std::mt19937_64 rng(seed);
  chc::Engine eng(s, chc::Domain{0, 0, 0, -1, 6}, {2'000'000, cancel});
  auto samples = eng.collect_samples(cfg.sampling, rng);
  smt::BoundedProvider checker(cfg.check, 2'000'000, cancel);
  // list-born parameters are lengths
  for (int round = 0; round < cfg.max_rounds; ++round) {
    IntModel m;
    for (const auto& p : s.preds) {
      std::vector<std::vector<std::int64_t>> rows;
      for (const auto& x : samples) {
        if (x.pred != p.name) continue;
        std::vector<std::int64_t> r;
        for (const auto& v : x.values) r.push_back(v.i);
        rows.push_back(std::move(r));
      }
      m[p.name] = detail::fit_one(rows, p.params.size());
    }
    auto interp = [&](const chc::PredAtom& a) { return detail::instantiate(m.at(a.pred), a.args); };
    bool progress = false, clean = true;
    for (const auto& c : s.definite) {
      auto r = checker.check(clause_query(c, interp));
      if (r.kind == smt::ValidityResult::Kind::Unknown) {
        why = "integer model check: " + r.reason;
        return std::nullopt;
      }
      if (r.is_valid()) continue;
      clean = false;
      chc::Sample h{c.head->pred, {}, chc::Provenance::Counterexample, 0};
      for (const auto& x : c.head->args) h.values.push_back(*chc::eval_term(x, r.assignment));
      if (std::find(samples.begin(), samples.end(), h) == samples.end() && eng.derivable(h, cfg.derive_depth)) {
        samples.push_back(h);
        progress = true;
      }
    }
    if (clean) return m;
    if (!progress) {
      auto more = eng.collect_samples(cfg.sampling, rng);
      for (auto& x : more)
        if (std::find(samples.begin(), samples.end(), x) == samples.end()) {
          samples.push_back(x);
          progress = true;
        }
    }
    if (!progress) break;
  }
  why = "no integer model of the supported shape";
  return std::nullopt;
}

// Delegates the integer system to an external HORN solver and reads its define-fun model.
inline std::optional<IntModel> external_int_model(const chc::ChcSystem& s, const smt::ExternalConfig& cfg,
                                                  std::string& why) {
  auto pr = smt::run_process(cfg.command, chc::render(s), cfg.timeout);
  if (!pr.started) {
    why = "could not start integer CHC solver";
    return std::nullopt;
  }
  if (pr.timed_out) {
    why = "integer CHC solver timed out";
    return std::nullopt;
  }
  std::size_t p = pr.out.find_first_not_of(" \t\r\n");
  std::size_t q = pr.out.find_first_of(" \t\r\n(", p);
  if (p == std::string::npos || pr.out.substr(p, q == std::string::npos ? q : q - p) != "sat") {
    why = "integer CHC solver did not answer sat";
    return std::nullopt;
  }
  std::map<std::string, chc::Definition> defs;
  try {
    defs = chc::parse_model(std::string_view(pr.out).substr(p + 3), s);
  } catch (const chc::ChcError& e) {
    why = std::string("unreadable integer model: ") + e.what();
    return std::nullopt;
  }
  IntModel m;
  for (const auto& d : s.preds) {
    auto it = defs.find(d.name);
    if (it == defs.end() || it->second.params.size() != d.params.size()) {
      why = "integer model lacks " + d.name;
      return std::nullopt;
    }
    std::map<std::string, Expr> sub;
    for (std::size_t k = 0; k < d.params.size(); ++k) sub[it->second.params[k]] = chc::var(formal(k), Sort::Int);
    m[d.name] = chc::substitute(it->second.body, sub);
  }
  return m;
}

// Integer model of the abstraction read back over the original parameters: |l| for lists.
inline Expr embed_length_formula(const Expr& f, const std::vector<Sort>& params) {
  std::map<std::string, Expr> sub;
  for (std::size_t k = 0; k < params.size(); ++k)
    if (params[k] == Sort::List) sub[formal(k)] = chc::len(chc::var(formal(k), Sort::List));
  return chc::substitute(f, sub);
}

}  // namespace stp::solver
