#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "stp/chc/expr.hpp"

namespace stp::chc {

// Finite domains for variables that no constraint determines.
struct Domain {
  int max_len = 4;
  std::int64_t min_elem = 0;
  std::int64_t max_elem = 2;
  std::int64_t min_int = -1;
  std::int64_t max_int = 5;

  // lists of length <= L over 0..E, ints in [-1, L+1]
  static Domain bounded(int L, std::int64_t E) { return {L, 0, E, -1, L + 1}; }
};

struct Limits {
  std::uint64_t max_nodes = 5'000'000;
  const std::atomic<bool>* cancel = nullptr;
};

enum class Outcome { Found, Exhausted, Aborted };

// Finds assignments satisfying a conjunction by equality propagation plus
// enumeration, drawing candidates from the constraints where possible.
class ConstraintSolver {
public:
  explicit ConstraintSolver(Domain d = {}, Limits lim = {}, std::mt19937_64* rng = nullptr)
      : dom_(d), lim_(lim), rng_(rng) {
    build_lists();
  }

  const Domain& domain() const { return dom_; }
  std::uint64_t nodes() const { return nodes_; }
  bool aborted() const { return aborted_; }
  void reset_budget() {
    nodes_ = 0;
    aborted_ = false;
  }
  void set_rng(std::mt19937_64* rng) { rng_ = rng; }

  enum class Step { Conflict, Progress, Nothing };

  // Eliminated variables: each maps to a term over non-eliminated ones.
  using Defs = std::map<std::string, Expr>;

  // Simplifies pending against env and defs; false on contradiction.
  bool propagate(std::vector<Expr>& pending, Env& env, Defs& defs, const std::map<std::string, Sort>& vars) {
    if (!defs.empty())
      for (auto& p : pending) p = substitute(p, defs);
    while (true) {
      bool changed = false;
      for (std::size_t k = 0; k < pending.size();) {
        const Expr& c = pending[k];
        Tri t = eval_formula(c, env);
        if (t == Tri::False) return false;
        if (t == Tri::True) {
          pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(k));
          continue;
        }
        Step s = Step::Nothing;
        if (c->op == Op::Eq) s = solve_eq(c->args[0], c->args[1], env, vars);
        else if (c->op == Op::IsNil) s = solve(c->args[0], Value::list({}), env, vars);
        if (s == Step::Conflict) return false;
        if (s == Step::Progress) changed = true;
        ++k;
      }
      if (changed) continue;
      int r = eliminate(pending, env, defs);
      if (r < 0) return false;
      if (r == 0) return true;
    }
  }

  // Calls on_solution (true = stop) for satisfying assignments of all vars.
  // Variables left unconstrained get one value only.
  Outcome enumerate(std::vector<Expr> pending, const std::map<std::string, Sort>& vars, Env env, Defs defs,
                    const std::function<bool(const Env&)>& on_solution) {
    return rec(std::move(pending), vars, std::move(env), std::move(defs), on_solution);
  }
  Outcome enumerate(std::vector<Expr> pending, const std::map<std::string, Sort>& vars, Env env,
                    const std::function<bool(const Env&)>& on_solution) {
    return rec(std::move(pending), vars, std::move(env), {}, on_solution);
  }

  // Value of e once eliminated variables are expanded.
  static std::optional<Value> value(const Expr& e, const Env& env, const Defs& defs) {
    if (defs.empty()) return eval_term(e, env);
    return eval_term(substitute(e, defs), env);
  }

  std::optional<Env> first(const std::vector<Expr>& cs, const std::map<std::string, Sort>& vars, Env env = {}) {
    std::optional<Env> out;
    enumerate(cs, vars, std::move(env), [&](const Env& e) {
      out = e;
      return true;
    });
    return out;
  }

  const std::vector<Value>& candidates(Sort s) {
    if (s == Sort::List) return lists_;
    if (s == Sort::Bool) return bools_;
    return ints_;
  }

  bool tick() {
    if (aborted_) return false;
    if (++nodes_ > lim_.max_nodes || (lim_.cancel && (nodes_ & 255) == 0 && lim_.cancel->load())) {
      aborted_ = true;
      return false;
    }
    return true;
  }

private:
  void build_lists() {
    std::vector<std::int64_t> elems;
    for (auto v = dom_.min_elem; v <= dom_.max_elem; ++v) elems.push_back(v);
    std::vector<std::vector<std::int64_t>> layer{{}};
    lists_.push_back(Value::list({}));
    for (int n = 1; n <= dom_.max_len; ++n) {
      std::vector<std::vector<std::int64_t>> next;
      for (const auto& w : layer)
        for (auto e : elems) {
          auto x = w;
          x.push_back(e);
          next.push_back(x);
        }
      for (const auto& w : next) lists_.push_back(Value::list(w));
      layer = std::move(next);
    }
    // small magnitudes first
    std::vector<std::int64_t> is;
    for (auto v = dom_.min_int; v <= dom_.max_int; ++v) is.push_back(v);
    std::stable_sort(is.begin(), is.end(), [](auto a, auto b) {
      auto ma = a < 0 ? -a : a, mb = b < 0 ? -b : b;
      return ma != mb ? ma < mb : a > b;
    });
    for (auto v : is) ints_.push_back(Value::integer(v));
    bools_ = {Value::boolean(false), Value::boolean(true)};
  }

  // value of a ground term; nullopt + undefined flag when it cannot be computed
  struct Ground {
    std::optional<Value> v;
    bool unbound = false;
  };
  static Ground ground(const Expr& e, const Env& env) {
    Evaluator ev(env);
    auto v = ev.term(e);
    return {v, !v && ev.unbound()};
  }

  Step solve_eq(const Expr& a, const Expr& b, Env& env, const std::map<std::string, Sort>& vars) {
    auto ga = ground(a, env);
    if (ga.v) return solve(b, *ga.v, env, vars);
    if (!ga.unbound) return Step::Conflict;
    auto gb = ground(b, env);
    if (gb.v) return solve(a, *gb.v, env, vars);
    if (!gb.unbound) return Step::Conflict;
    return Step::Nothing;
  }

  static Step combine(Step x, Step y) {
    if (x == Step::Conflict || y == Step::Conflict) return Step::Conflict;
    if (x == Step::Progress || y == Step::Progress) return Step::Progress;
    return Step::Nothing;
  }

  // makes t evaluate to v where this is forced
  Step solve(const Expr& t, const Value& v, Env& env, const std::map<std::string, Sort>& vars) {
    auto g = ground(t, env);
    if (g.v) return *g.v == v ? Step::Nothing : Step::Conflict;
    if (!g.unbound) return Step::Conflict;
    const auto& a = t->args;
    auto value_of = [&](const Expr& e) { return ground(e, env); };
    switch (t->op) {
      case Op::Var: {
        if (v.sort != t->sort) return Step::Conflict;
        env[t->name] = v;
        return Step::Progress;
      }
      case Op::Cons: {
        if (v.seq.empty()) return Step::Conflict;
        Step s = solve(a[0], Value::integer(v.seq.front()), env, vars);
        if (s == Step::Conflict) return s;
        return combine(s, solve(a[1], Value::list({v.seq.begin() + 1, v.seq.end()}), env, vars));
      }
      case Op::Add: {
        auto x = value_of(a[0]);
        if (x.v) return solve(a[1], Value::integer(v.i - x.v->i), env, vars);
        if (!x.unbound) return Step::Conflict;
        auto y = value_of(a[1]);
        if (y.v) return solve(a[0], Value::integer(v.i - y.v->i), env, vars);
        if (!y.unbound) return Step::Conflict;
        return Step::Nothing;
      }
      case Op::Sub: {
        auto x = value_of(a[0]);
        if (x.v) return solve(a[1], Value::integer(x.v->i - v.i), env, vars);
        if (!x.unbound) return Step::Conflict;
        auto y = value_of(a[1]);
        if (y.v) return solve(a[0], Value::integer(v.i + y.v->i), env, vars);
        if (!y.unbound) return Step::Conflict;
        return Step::Nothing;
      }
      case Op::Neg: return solve(a[0], Value::integer(-v.i), env, vars);
      case Op::Mul: {
        auto c = t->lit.i;
        if (c == 0) return v.i == 0 ? Step::Nothing : Step::Conflict;
        if (v.i % c != 0) return Step::Conflict;
        return solve(a[0], Value::integer(v.i / c), env, vars);
      }
      case Op::Len: return v.i < 0 ? Step::Conflict : Step::Nothing;
      case Op::Rev: {
        auto r = v;
        std::reverse(r.seq.begin(), r.seq.end());
        return solve(a[0], r, env, vars);
      }
      case Op::Concat: {
        auto x = value_of(a[0]);
        if (x.v) {
          if (!stp::is_prefix(x.v->seq, v.seq)) return Step::Conflict;
          return solve(a[1], Value::list({v.seq.begin() + static_cast<std::ptrdiff_t>(x.v->seq.size()), v.seq.end()}), env, vars);
        }
        if (!x.unbound) return Step::Conflict;
        auto y = value_of(a[1]);
        if (y.v) {
          if (!stp::is_suffix(y.v->seq, v.seq)) return Step::Conflict;
          return solve(a[0], Value::list({v.seq.begin(), v.seq.end() - static_cast<std::ptrdiff_t>(y.v->seq.size())}), env, vars);
        }
        if (!y.unbound) return Step::Conflict;
        if (v.seq.empty()) return combine(solve(a[0], v, env, vars), solve(a[1], v, env, vars));
        return Step::Nothing;
      }
      case Op::Ite: {
        Tri c = eval_formula(a[0], env);
        if (c == Tri::Unknown) return Step::Nothing;
        return solve(c == Tri::True ? a[1] : a[2], v, env, vars);
      }
      case Op::LDiff: {
        // s·v = s2
        auto s = value_of(a[0]);
        if (s.v) {
          auto w = s.v->seq;
          w.insert(w.end(), v.seq.begin(), v.seq.end());
          return solve(a[1], Value::list(w), env, vars);
        }
        if (!s.unbound) return Step::Conflict;
        auto s2 = value_of(a[1]);
        if (s2.v) {
          if (!stp::is_suffix(v.seq, s2.v->seq)) return Step::Conflict;
          return solve(a[0], Value::list({s2.v->seq.begin(), s2.v->seq.end() - static_cast<std::ptrdiff_t>(v.seq.size())}), env, vars);
        }
        return s2.unbound ? Step::Nothing : Step::Conflict;
      }
      case Op::RDiff: {
        // v·s = s2
        auto s = value_of(a[0]);
        if (s.v) {
          auto w = v.seq;
          w.insert(w.end(), s.v->seq.begin(), s.v->seq.end());
          return solve(a[1], Value::list(w), env, vars);
        }
        if (!s.unbound) return Step::Conflict;
        auto s2 = value_of(a[1]);
        if (s2.v) {
          if (!stp::is_prefix(v.seq, s2.v->seq)) return Step::Conflict;
          return solve(a[0], Value::list({s2.v->seq.begin() + static_cast<std::ptrdiff_t>(v.seq.size()), s2.v->seq.end()}), env, vars);
        }
        return s2.unbound ? Step::Nothing : Step::Conflict;
      }
      default: return Step::Nothing;
    }
  }

  struct Choice {
    std::string var;
    std::vector<Value> values;
    bool from_constraint = false;
  };

  static bool unbound_var(const Expr& e, const Env& env) { return e->op == Op::Var && !env.count(e->name); }

  static std::vector<Value> prefixes(const Value& v, bool rev) {
    std::vector<Value> out;
    for (std::size_t n = 0; n <= v.seq.size(); ++n) {
      std::vector<std::int64_t> w(v.seq.begin(), v.seq.begin() + static_cast<std::ptrdiff_t>(n));
      if (rev) std::reverse(w.begin(), w.end());
      out.push_back(Value::list(w));
    }
    return out;
  }
  static std::vector<Value> suffixes(const Value& v, bool rev) {
    std::vector<Value> out;
    for (std::size_t n = 0; n <= v.seq.size(); ++n) {
      std::vector<std::int64_t> w(v.seq.end() - static_cast<std::ptrdiff_t>(n), v.seq.end());
      if (rev) std::reverse(w.begin(), w.end());
      out.push_back(Value::list(w));
    }
    return out;
  }

  // distinct orderings of every sub-multiset (sub=true) or of the multiset itself
  static std::vector<Value> arrangements(std::vector<std::int64_t> ms, bool sub) {
    std::set<std::vector<std::int64_t>> out;
    std::sort(ms.begin(), ms.end());
    std::size_t n = ms.size();
    if (n > 8) return {};
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (!sub && mask != (1u << n) - 1) continue;
      std::vector<std::int64_t> part;
      for (std::size_t k = 0; k < n; ++k)
        if (mask >> k & 1) part.push_back(ms[k]);
      do out.insert(part);
      while (std::next_permutation(part.begin(), part.end()));
    }
    std::vector<Value> vs;
    for (const auto& w : out) vs.push_back(Value::list(w));
    return vs;
  }

  // lists up to the length bound drawn from `elems`; exact: using every element
  std::vector<Value> lists_over(std::vector<std::int64_t> elems, bool exact) const {
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    std::vector<Value> out;
    std::vector<std::vector<std::int64_t>> layer{{}};
    for (int n = 0; n <= dom_.max_len; ++n) {
      std::vector<std::vector<std::int64_t>> next;
      for (auto& w : layer) {
        bool all = !exact || std::all_of(elems.begin(), elems.end(),
                                         [&](std::int64_t e) { return std::find(w.begin(), w.end(), e) != w.end(); });
        if (all) out.push_back(Value::list(w));
        if (n == dom_.max_len) continue;
        for (auto e : elems) {
          auto w2 = w;
          w2.push_back(e);
          next.push_back(std::move(w2));
        }
      }
      layer = std::move(next);
    }
    return out;
  }

  // list variable (possibly reversed) whose candidates a constraint fixes
  static std::optional<std::pair<std::string, bool>> list_var(const Expr& e, const Env& env) {
    if (unbound_var(e, env)) return std::make_pair(e->name, false);
    if (e->op == Op::Rev && unbound_var(e->args[0], env)) return std::make_pair(e->args[0]->name, true);
    return std::nullopt;
  }

  std::optional<Choice> generator(const Expr& c, const Env& env) {
    const auto& a = c->args;
    auto g = [&](const Expr& e) { return ground(e, env).v; };
    switch (c->op) {
      case Op::IsPrefix:
      case Op::IsSuffix: {
        auto lv = list_var(a[0], env);
        if (!lv) return std::nullopt;
        auto w = g(a[1]);
        if (!w) return std::nullopt;
        bool pre = c->op == Op::IsPrefix;
        return Choice{lv->first, pre ? prefixes(*w, lv->second) : suffixes(*w, lv->second), true};
      }
      case Op::CollSub: {
        if (a[0]->op != Op::CollOf) return std::nullopt;
        auto lv = list_var(a[0]->args[0], env);
        auto w = lv ? g(a[1]) : std::nullopt;
        if (!w) return std::nullopt;
        if (a[0]->cmode == Mode::Set) return Choice{lv->first, lists_over(w->seq, false), true};
        return Choice{lv->first, arrangements(w->seq, true), true};
      }
      case Op::Eq: {
        for (int side = 0; side < 2; ++side) {
          const Expr& x = a[side];
          const Expr& y = a[1 - side];
          if (x->op == Op::Len && unbound_var(x->args[0], env)) {
            auto n = g(y);
            if (!n) continue;
            if (n->i < 0) return Choice{x->args[0]->name, {}, true};
            if (n->i > dom_.max_len + 2) continue;
            return Choice{x->args[0]->name, lists_of_length(static_cast<int>(n->i)), true};
          }
          if (x->op == Op::CollOf) {
            auto lv = list_var(x->args[0], env);
            auto w = lv ? g(y) : std::nullopt;
            if (!w) continue;
            if (x->cmode == Mode::Set) return Choice{lv->first, lists_over(w->seq, true), true};
            return Choice{lv->first, arrangements(w->seq, false), true};
          }
          if (x->op == Op::Concat) {
            auto w = g(y);
            if (!w) continue;
            if (auto lv = list_var(x->args[0], env)) return Choice{lv->first, prefixes(*w, lv->second), true};
            if (auto lv = list_var(x->args[1], env)) return Choice{lv->first, suffixes(*w, lv->second), true};
          }
        }
        return std::nullopt;
      }
      default: return std::nullopt;
    }
  }

  std::vector<Value> lists_of_length(int n) {
    std::vector<Value> out;
    std::vector<std::int64_t> w(static_cast<std::size_t>(n), dom_.min_elem);
    while (true) {
      out.push_back(Value::list(w));
      int k = n - 1;
      while (k >= 0 && w[static_cast<std::size_t>(k)] == dom_.max_elem) w[static_cast<std::size_t>(k--)] = dom_.min_elem;
      if (k < 0) break;
      ++w[static_cast<std::size_t>(k)];
    }
    return out;
  }

  // defined under every assignment
  static bool total(const Expr& e) {
    switch (e->op) {
      case Op::Head:
      case Op::Tail:
      case Op::LDiff:
      case Op::RDiff:
      case Op::CollDiff: return false;
      case Op::CollUnion:
        if (e->cmode == Mode::Set) return false;
        break;
      default: break;
    }
    return std::all_of(e->args.begin(), e->args.end(), [](const Expr& a) { return total(a); });
  }

  // One symbolic step: constructor decomposition or x := t.
  // Returns -1 on clash, 1 on change, 0 when nothing applies.
  static int eliminate(std::vector<Expr>& pending, const Env& env, Defs& defs) {
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const Expr c = pending[k];
      if (c->op != Op::Eq) continue;
      const Expr& a = c->args[0];
      const Expr& b = c->args[1];
      if (a->op == Op::Cons && b->op == Op::Cons) {
        pending[k] = eq(a->args[0], b->args[0]);
        pending.push_back(eq(a->args[1], b->args[1]));
        return 1;
      }
      if ((a->op == Op::Cons && b->op == Op::ListLit && b->lit.seq.empty()) ||
          (b->op == Op::Cons && a->op == Op::ListLit && a->lit.seq.empty()))
        return -1;
      for (int side = 0; side < 2; ++side) {
        const Expr& x = side ? b : a;
        const Expr& t = side ? a : b;
        if (x->op != Op::Var || env.count(x->name) || defs.count(x->name) || mentions(t, x->name) || !total(t)) continue;
        if (x->sort != t->sort) return -1;
        std::map<std::string, Expr> one{{x->name, t}};
        for (auto& [n, d] : defs) d = substitute(d, one);
        defs[x->name] = t;
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(k));
        for (auto& p : pending) p = substitute(p, one);
        return 1;
      }
    }
    return 0;
  }

  // Evaluates eliminated variables into env; false when one is undefined.
  static bool complete_defs(Env& env, const Defs& defs) {
    for (const auto& [n, d] : defs) {
      auto v = eval_term(d, env);
      if (!v) return false;
      env[n] = *v;
    }
    return true;
  }

  Outcome rec(std::vector<Expr> pending, const std::map<std::string, Sort>& vars, Env env, Defs defs,
              const std::function<bool(const Env&)>& on_solution) {
    if (!tick()) return Outcome::Aborted;
    if (!propagate(pending, env, defs, vars)) return Outcome::Exhausted;
    if (pending.empty()) {
      std::map<std::string, Sort> needed = vars;
      for (const auto& [n, d] : defs) free_vars(d, needed);
      for (const auto& [n, s] : needed)
        if (!env.count(n) && !defs.count(n)) env[n] = pick(s);
      if (!complete_defs(env, defs)) return Outcome::Exhausted;
      return on_solution(env) ? Outcome::Found : Outcome::Exhausted;
    }
    std::optional<Choice> best;
    for (const auto& c : pending) {
      auto ch = generator(c, env);
      if (ch && (!best || ch->values.size() < best->values.size())) best = std::move(ch);
      if (best && best->values.size() <= 1) break;
    }
    if (!best) {
      // plain enumeration: ints before lists, most-mentioned first
      std::map<std::string, Sort> fv;
      for (const auto& c : pending) free_vars(c, fv);
      std::string chosen;
      Sort cs = Sort::List;
      std::size_t score = 0;
      for (const auto& [n, s] : fv) {
        if (env.count(n)) continue;
        std::size_t sc = (s != Sort::List ? 1000 : 0);
        for (const auto& c : pending)
          if (mentions(c, n)) ++sc;
        if (chosen.empty() || sc > score) {
          chosen = n;
          cs = s;
          score = sc;
        }
      }
      if (chosen.empty()) return Outcome::Exhausted;  // pending but nothing to enumerate: undefined terms
      best = Choice{chosen, candidates(cs), false};
    }
    auto values = best->values;
    if (rng_) std::shuffle(values.begin(), values.end(), *rng_);
    bool aborted = false;
    for (const auto& v : values) {
      Env e2 = env;
      auto it = vars.find(best->var);
      if (it != vars.end() && it->second != v.sort) continue;
      e2[best->var] = v;
      auto r = rec(pending, vars, std::move(e2), defs, on_solution);
      if (r == Outcome::Found) return r;
      if (r == Outcome::Aborted) {
        aborted = true;
        break;
      }
    }
    return aborted ? Outcome::Aborted : Outcome::Exhausted;
  }

  Value pick(Sort s) {
    const auto& cs = candidates(s);
    if (rng_) return cs[std::uniform_int_distribution<std::size_t>(0, cs.size() - 1)(*rng_)];
    return cs.front();
  }

  Domain dom_;
  Limits lim_;
  std::mt19937_64* rng_;
  std::vector<Value> lists_, ints_, bools_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
};

}  // namespace stp::chc
