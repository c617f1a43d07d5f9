#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stp/pattern.hpp"

namespace stp::chc {

enum class Sort : std::uint8_t { Int, List, Bool, Coll };

inline const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Int: return "Int";
    case Sort::List: return "List";
    case Sort::Bool: return "Bool";
    case Sort::Coll: return "Coll";
  }
  return "?";
}

class ChcError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Value {
  Sort sort = Sort::Int;
  std::int64_t i = 0;  // Int, or Bool as 0/1
  std::vector<std::int64_t> seq;  // List elements, or Coll as a sorted multiset

  static Value integer(std::int64_t v) { return {Sort::Int, v, {}}; }
  static Value boolean(bool b) { return {Sort::Bool, b ? 1 : 0, {}}; }
  static Value list(std::vector<std::int64_t> xs) { return {Sort::List, 0, std::move(xs)}; }
  static Value coll(std::vector<std::int64_t> xs) {
    std::sort(xs.begin(), xs.end());
    return {Sort::Coll, 0, std::move(xs)};
  }

  auto operator<=>(const Value&) const = default;
};

inline std::string render(const Value& v) {
  switch (v.sort) {
    case Sort::Int: return std::to_string(v.i);
    case Sort::Bool: return v.i ? "true" : "false";
    case Sort::List:
    case Sort::Coll: {
      std::string s = v.sort == Sort::List ? "[" : "{";
      for (std::size_t k = 0; k < v.seq.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(v.seq[k]);
      }
      return s + (v.sort == Sort::List ? "]" : "}");
    }
  }
  return "?";
}

using Env = std::map<std::string, Value>;

enum class Op : std::uint8_t {
  // terms
  Var, IntLit, ListLit, BoolLit, Add, Sub, Neg, Mul, Ite,
  Cons, Head, Tail, Len, Concat, Rev, LDiff, RDiff,
  CollOf, CollSingleton, CollUnion, CollDiff, Count,
  // formulas
  Not, And, Or, Implies, Eq, Ne, Le, Lt, Ge, Gt,
  IsPrefix, IsSuffix, CollSub, IsNil, IsCons, Pred,
};

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  Sort sort;
  std::string name;  // Var / Pred
  Value lit;  // literals; Mul coefficient in lit.i
  Mode cmode = Mode::Multiset;  // collection operators
  std::vector<Expr> args;
};

inline Expr mk(Op op, Sort sort, std::vector<Expr> args, std::string name = {}, Value lit = {},
               Mode cmode = Mode::Multiset) {
  return std::make_shared<const Node>(Node{op, sort, std::move(name), std::move(lit), cmode, std::move(args)});
}

// ---- constructors ----------------------------------------------------------

inline Expr var(const std::string& name, Sort s) { return mk(Op::Var, s, {}, name); }
inline Expr int_lit(std::int64_t v) { return mk(Op::IntLit, Sort::Int, {}, {}, Value::integer(v)); }
inline Expr list_lit(std::vector<std::int64_t> xs) { return mk(Op::ListLit, Sort::List, {}, {}, Value::list(std::move(xs))); }
inline Expr nil() { return list_lit({}); }
inline Expr bool_lit(bool b) { return mk(Op::BoolLit, Sort::Bool, {}, {}, Value::boolean(b)); }
inline Expr tru() { return bool_lit(true); }
inline Expr fls() { return bool_lit(false); }
inline Expr lit(const Value& v) {
  switch (v.sort) {
    case Sort::Int: return int_lit(v.i);
    case Sort::List: return list_lit(v.seq);
    case Sort::Bool: return bool_lit(v.i != 0);
    case Sort::Coll: return mk(Op::CollOf, Sort::Coll, {list_lit(v.seq)});
  }
  return nullptr;
}

inline bool is_true(const Expr& e) { return e->op == Op::BoolLit && e->lit.i; }
inline bool is_false(const Expr& e) { return e->op == Op::BoolLit && !e->lit.i; }

inline Expr add(Expr a, Expr b) { return mk(Op::Add, Sort::Int, {std::move(a), std::move(b)}); }
inline Expr sub(Expr a, Expr b) { return mk(Op::Sub, Sort::Int, {std::move(a), std::move(b)}); }
inline Expr neg(Expr a) { return mk(Op::Neg, Sort::Int, {std::move(a)}); }
inline Expr mul(std::int64_t c, Expr a) { return mk(Op::Mul, Sort::Int, {std::move(a)}, {}, Value::integer(c)); }
inline Expr ite(Expr c, Expr a, Expr b) {
  Sort s = a->sort;
  return mk(Op::Ite, s, {std::move(c), std::move(a), std::move(b)});
}
inline Expr cons(Expr h, Expr t) { return mk(Op::Cons, Sort::List, {std::move(h), std::move(t)}); }
inline Expr head(Expr l) { return mk(Op::Head, Sort::Int, {std::move(l)}); }
inline Expr tail(Expr l) { return mk(Op::Tail, Sort::List, {std::move(l)}); }
inline Expr len(Expr l) { return mk(Op::Len, Sort::Int, {std::move(l)}); }
inline Expr concat(Expr a, Expr b) { return mk(Op::Concat, Sort::List, {std::move(a), std::move(b)}); }
inline Expr rev(Expr a) { return mk(Op::Rev, Sort::List, {std::move(a)}); }
// s \ s' : the s0 with s·s0 = s'
inline Expr ldiff(Expr s, Expr s2) { return mk(Op::LDiff, Sort::List, {std::move(s), std::move(s2)}); }
// s' / s : the s0 with s0·s = s'
inline Expr rdiff(Expr s, Expr s2) { return mk(Op::RDiff, Sort::List, {std::move(s), std::move(s2)}); }
inline Expr coll_of(Expr l, Mode m) { return mk(Op::CollOf, Sort::Coll, {std::move(l)}, {}, {}, m); }
inline Expr coll_single(Expr x, Mode m) { return mk(Op::CollSingleton, Sort::Coll, {std::move(x)}, {}, {}, m); }
inline Expr coll_union(Expr a, Expr b, Mode m) { return mk(Op::CollUnion, Sort::Coll, {std::move(a), std::move(b)}, {}, {}, m); }
inline Expr coll_diff(Expr a, Expr b, Mode m) { return mk(Op::CollDiff, Sort::Coll, {std::move(a), std::move(b)}, {}, {}, m); }
inline Expr count(Expr x, Expr l) { return mk(Op::Count, Sort::Int, {std::move(x), std::move(l)}); }

inline Expr not_(Expr a) {
  if (a->op == Op::BoolLit) return bool_lit(!a->lit.i);
  if (a->op == Op::Not) return a->args[0];
  return mk(Op::Not, Sort::Bool, {std::move(a)});
}

inline Expr and_(const std::vector<Expr>& xs) {
  std::vector<Expr> out;
  for (const auto& x : xs) {
    if (is_true(x)) continue;
    if (is_false(x)) return fls();
    if (x->op == Op::And) out.insert(out.end(), x->args.begin(), x->args.end());
    else out.push_back(x);
  }
  if (out.empty()) return tru();
  if (out.size() == 1) return out[0];
  return mk(Op::And, Sort::Bool, std::move(out));
}
inline Expr and_(Expr a, Expr b) { return and_(std::vector<Expr>{std::move(a), std::move(b)}); }

inline Expr or_(const std::vector<Expr>& xs) {
  std::vector<Expr> out;
  for (const auto& x : xs) {
    if (is_false(x)) continue;
    if (is_true(x)) return tru();
    if (x->op == Op::Or) out.insert(out.end(), x->args.begin(), x->args.end());
    else out.push_back(x);
  }
  if (out.empty()) return fls();
  if (out.size() == 1) return out[0];
  return mk(Op::Or, Sort::Bool, std::move(out));
}
inline Expr or_(Expr a, Expr b) { return or_(std::vector<Expr>{std::move(a), std::move(b)}); }

inline Expr implies(Expr a, Expr b) { return mk(Op::Implies, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr eq(Expr a, Expr b) { return mk(Op::Eq, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr ne(Expr a, Expr b) { return mk(Op::Ne, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr le(Expr a, Expr b) { return mk(Op::Le, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr lt(Expr a, Expr b) { return mk(Op::Lt, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr ge(Expr a, Expr b) { return mk(Op::Ge, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr gt(Expr a, Expr b) { return mk(Op::Gt, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr is_prefix(Expr a, Expr b) { return mk(Op::IsPrefix, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr is_suffix(Expr a, Expr b) { return mk(Op::IsSuffix, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr coll_sub(Expr a, Expr b) { return mk(Op::CollSub, Sort::Bool, {std::move(a), std::move(b)}); }
inline Expr is_nil(Expr l) { return mk(Op::IsNil, Sort::Bool, {std::move(l)}); }
inline Expr is_cons(Expr l) { return mk(Op::IsCons, Sort::Bool, {std::move(l)}); }
inline Expr pred(const std::string& name, std::vector<Expr> args) { return mk(Op::Pred, Sort::Bool, std::move(args), name); }

// logical negation pushed through comparisons
inline Expr negate(const Expr& e) {
  const auto& a = e->args;
  switch (e->op) {
    case Op::Not: return a[0];
    case Op::Eq: return ne(a[0], a[1]);
    case Op::Ne: return eq(a[0], a[1]);
    case Op::Le: return gt(a[0], a[1]);
    case Op::Lt: return ge(a[0], a[1]);
    case Op::Ge: return lt(a[0], a[1]);
    case Op::Gt: return le(a[0], a[1]);
    case Op::And: {
      std::vector<Expr> xs;
      for (const auto& x : a) xs.push_back(negate(x));
      return or_(xs);
    }
    case Op::Or: {
      std::vector<Expr> xs;
      for (const auto& x : a) xs.push_back(negate(x));
      return and_(xs);
    }
    case Op::Implies: return and_(a[0], negate(a[1]));
    default: return not_(e);
  }
}

inline std::vector<Expr> conjuncts(const Expr& e) {
  if (is_true(e)) return {};
  if (e->op == Op::And) return e->args;
  return {e};
}

// ---- traversal -------------------------------------------------------------

inline void free_vars(const Expr& e, std::map<std::string, Sort>& out) {
  if (e->op == Op::Var) {
    out.emplace(e->name, e->sort);
    return;
  }
  for (const auto& a : e->args) free_vars(a, out);
}

inline std::map<std::string, Sort> free_vars(const Expr& e) {
  std::map<std::string, Sort> out;
  free_vars(e, out);
  return out;
}

inline bool mentions(const Expr& e, const std::string& v) {
  if (e->op == Op::Var) return e->name == v;
  for (const auto& a : e->args)
    if (mentions(a, v)) return true;
  return false;
}

inline Expr rebuild(const Expr& e, std::vector<Expr> args) {
  return mk(e->op, e->sort, std::move(args), e->name, e->lit, e->cmode);
}

inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& m) {
  if (e->op == Op::Var) {
    auto it = m.find(e->name);
    return it == m.end() ? e : it->second;
  }
  if (e->args.empty()) return e;
  std::vector<Expr> args;
  args.reserve(e->args.size());
  bool same = true;
  for (const auto& a : e->args) {
    args.push_back(substitute(a, m));
    same = same && args.back() == a;
  }
  if (same) return e;
  switch (e->op) {
    case Op::And: return and_(args);
    case Op::Or: return or_(args);
    case Op::Not: return not_(args[0]);
    default: return rebuild(e, std::move(args));
  }
}

inline Expr rename_vars(const Expr& e, const std::function<std::string(const std::string&)>& f) {
  if (e->op == Op::Var) return var(f(e->name), e->sort);
  if (e->args.empty()) return e;
  std::vector<Expr> args;
  for (const auto& a : e->args) args.push_back(rename_vars(a, f));
  return rebuild(e, std::move(args));
}

// Replaces every sub-expression for which f returns a value.
inline Expr transform(const Expr& e, const std::function<std::optional<Expr>(const Expr&)>& f) {
  if (auto r = f(e)) return *r;
  if (e->args.empty()) return e;
  std::vector<Expr> args;
  for (const auto& a : e->args) args.push_back(transform(a, f));
  switch (e->op) {
    case Op::And: return and_(args);
    case Op::Or: return or_(args);
    case Op::Not: return not_(args[0]);
    default: return rebuild(e, std::move(args));
  }
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (a->op != b->op || a->sort != b->sort || a->name != b->name || a->lit != b->lit || a->cmode != b->cmode ||
      a->args.size() != b->args.size())
    return false;
  for (std::size_t k = 0; k < a->args.size(); ++k)
    if (!structurally_equal(a->args[k], b->args[k])) return false;
  return true;
}

// ---- evaluation ------------------------------------------------------------

enum class Tri : std::uint8_t { False, True, Unknown };

// Interprets Pred nodes; absent result means "cannot tell yet"
using PredOracle = std::function<std::optional<bool>(const std::string&, const std::vector<Value>&)>;

class Evaluator {
public:
  explicit Evaluator(const Env& env, const PredOracle* oracle = nullptr) : env_(env), oracle_(oracle) {}

  // nothing when undefined or when a variable is unbound (see unbound())
  std::optional<Value> term(const Expr& e) {
    const auto& a = e->args;
    switch (e->op) {
      case Op::Var: {
        auto it = env_.find(e->name);
        if (it == env_.end()) {
          unbound_ = true;
          return std::nullopt;
        }
        return it->second;
      }
      case Op::IntLit:
      case Op::ListLit:
      case Op::BoolLit: return e->lit;
      case Op::Add: {
        std::int64_t s = 0;
        for (const auto& x : a) {
          auto v = term(x);
          if (!v) return std::nullopt;
          s += v->i;
        }
        return Value::integer(s);
      }
      case Op::Sub: {
        auto x = term(a[0]);
        auto y = x ? term(a[1]) : std::nullopt;
        if (!y) return std::nullopt;
        return Value::integer(x->i - y->i);
      }
      case Op::Neg: {
        auto x = term(a[0]);
        if (!x) return std::nullopt;
        return Value::integer(-x->i);
      }
      case Op::Mul: {
        auto x = term(a[0]);
        if (!x) return std::nullopt;
        return Value::integer(e->lit.i * x->i);
      }
      case Op::Ite: {
        Tri c = formula(a[0]);
        if (c == Tri::Unknown) return std::nullopt;
        return term(c == Tri::True ? a[1] : a[2]);
      }
      case Op::Cons: {
        auto h = term(a[0]);
        auto t = h ? term(a[1]) : std::nullopt;
        if (!t) return std::nullopt;
        t->seq.insert(t->seq.begin(), h->i);
        return t;
      }
      case Op::Head: {
        auto l = term(a[0]);
        if (!l || l->seq.empty()) return std::nullopt;
        return Value::integer(l->seq.front());
      }
      case Op::Tail: {
        auto l = term(a[0]);
        if (!l || l->seq.empty()) return std::nullopt;
        l->seq.erase(l->seq.begin());
        return l;
      }
      case Op::Len: {
        auto l = term(a[0]);
        if (!l) return std::nullopt;
        return Value::integer(static_cast<std::int64_t>(l->seq.size()));
      }
      case Op::Concat: {
        auto x = term(a[0]);
        auto y = x ? term(a[1]) : std::nullopt;
        if (!y) return std::nullopt;
        x->seq.insert(x->seq.end(), y->seq.begin(), y->seq.end());
        return x;
      }
      case Op::Rev: {
        auto x = term(a[0]);
        if (!x) return std::nullopt;
        std::reverse(x->seq.begin(), x->seq.end());
        return x;
      }
      case Op::LDiff: {
        auto s = term(a[0]);
        auto t = s ? term(a[1]) : std::nullopt;
        if (!t || !stp::is_prefix(s->seq, t->seq)) return std::nullopt;
        return Value::list(std::vector<std::int64_t>(t->seq.begin() + static_cast<std::ptrdiff_t>(s->seq.size()), t->seq.end()));
      }
      case Op::RDiff: {
        auto s = term(a[0]);
        auto t = s ? term(a[1]) : std::nullopt;
        if (!t || !stp::is_suffix(s->seq, t->seq)) return std::nullopt;
        return Value::list(std::vector<std::int64_t>(t->seq.begin(), t->seq.end() - static_cast<std::ptrdiff_t>(s->seq.size())));
      }
      case Op::CollOf: {
        auto l = term(a[0]);
        if (!l) return std::nullopt;
        auto c = Value::coll(l->seq);
        if (e->cmode == Mode::Set) c.seq.erase(std::unique(c.seq.begin(), c.seq.end()), c.seq.end());
        return c;
      }
      case Op::CollSingleton: {
        auto x = term(a[0]);
        if (!x) return std::nullopt;
        return Value::coll({x->i});
      }
      case Op::CollUnion: {
        auto x = term(a[0]);
        auto y = x ? term(a[1]) : std::nullopt;
        if (!y) return std::nullopt;
        if (e->cmode == Mode::Set && !ms::disjoint(x->seq, y->seq)) return std::nullopt;
        return Value::coll(ms::sum(x->seq, y->seq));
      }
      case Op::CollDiff: {
        auto x = term(a[0]);
        auto y = x ? term(a[1]) : std::nullopt;
        if (!y || !ms::contains(x->seq, y->seq)) return std::nullopt;
        return Value::coll(ms::minus(x->seq, y->seq));
      }
      case Op::Count: {
        auto x = term(a[0]);
        auto l = x ? term(a[1]) : std::nullopt;
        if (!l) return std::nullopt;
        return Value::integer(std::count(l->seq.begin(), l->seq.end(), x->i));
      }
      default: {
        Tri t = formula(e);
        if (t == Tri::Unknown) return std::nullopt;
        return Value::boolean(t == Tri::True);
      }
    }
  }

  // atoms over undefined terms are false; Unknown only for unbound variables
  Tri formula(const Expr& e) {
    const auto& a = e->args;
    switch (e->op) {
      case Op::BoolLit: return e->lit.i ? Tri::True : Tri::False;
      case Op::Var: {
        auto v = term(e);
        if (!v) return Tri::Unknown;
        return v->i ? Tri::True : Tri::False;
      }
      case Op::Not: {
        Tri t = formula(a[0]);
        return t == Tri::Unknown ? t : (t == Tri::True ? Tri::False : Tri::True);
      }
      case Op::And: {
        bool unknown = false;
        for (const auto& x : a) {
          Tri t = formula(x);
          if (t == Tri::False) return Tri::False;
          if (t == Tri::Unknown) unknown = true;
        }
        return unknown ? Tri::Unknown : Tri::True;
      }
      case Op::Or: {
        bool unknown = false;
        for (const auto& x : a) {
          Tri t = formula(x);
          if (t == Tri::True) return Tri::True;
          if (t == Tri::Unknown) unknown = true;
        }
        return unknown ? Tri::Unknown : Tri::False;
      }
      case Op::Implies: {
        Tri p = formula(a[0]);
        if (p == Tri::False) return Tri::True;
        Tri q = formula(a[1]);
        if (q == Tri::True) return Tri::True;
        if (p == Tri::Unknown || q == Tri::Unknown) return Tri::Unknown;
        return Tri::False;
      }
      case Op::Pred: {
        std::vector<Value> vs;
        for (const auto& x : a) {
          auto v = atom_arg(x);
          if (!v.first) return v.second;
          vs.push_back(*v.first);
        }
        if (!oracle_) throw ChcError("predicate '" + e->name + "' in formula without an interpretation");
        auto r = (*oracle_)(e->name, vs);
        if (!r) return Tri::Unknown;
        return *r ? Tri::True : Tri::False;
      }
      case Op::IsNil:
      case Op::IsCons: {
        auto v = atom_arg(a[0]);
        if (!v.first) return v.second;
        bool empty = v.first->seq.empty();
        return (e->op == Op::IsNil) == empty ? Tri::True : Tri::False;
      }
      default: break;
    }
    // binary atoms
    auto x = atom_arg(a[0]);
    if (!x.first) return x.second == Tri::Unknown ? Tri::Unknown : undefined_or_unknown(a[1]);
    auto y = atom_arg(a[1]);
    if (!y.first) return y.second;
    const Value& u = *x.first;
    const Value& v = *y.first;
    bool r = false;
    switch (e->op) {
      case Op::Eq: r = u == v; break;
      case Op::Ne: r = u != v; break;
      case Op::Le: r = u.i <= v.i; break;
      case Op::Lt: r = u.i < v.i; break;
      case Op::Ge: r = u.i >= v.i; break;
      case Op::Gt: r = u.i > v.i; break;
      case Op::IsPrefix: r = stp::is_prefix(u.seq, v.seq); break;
      case Op::IsSuffix: r = stp::is_suffix(u.seq, v.seq); break;
      case Op::CollSub: r = ms::contains(v.seq, u.seq); break;
      default: throw ChcError("not a formula");
    }
    return r ? Tri::True : Tri::False;
  }

  bool unbound() const { return unbound_; }

private:
  // (value, status when absent): False for undefined, Unknown for unbound
  std::pair<std::optional<Value>, Tri> atom_arg(const Expr& e) {
    bool before = unbound_;
    unbound_ = false;
    auto v = term(e);
    bool ub = unbound_;
    unbound_ = before || ub;
    if (v) return {v, Tri::True};
    return {std::nullopt, ub ? Tri::Unknown : Tri::False};
  }

  // left side undefined: the atom is false unless the right side mentions an unbound variable
  Tri undefined_or_unknown(const Expr&) { return Tri::False; }

  const Env& env_;
  const PredOracle* oracle_;
  bool unbound_ = false;
};

inline std::optional<Value> eval_term(const Expr& e, const Env& env) { return Evaluator(env).term(e); }
inline Tri eval_formula(const Expr& e, const Env& env, const PredOracle* oracle = nullptr) {
  return Evaluator(env, oracle).formula(e);
}
inline bool holds(const Expr& e, const Env& env, const PredOracle* oracle = nullptr) {
  Tri t = eval_formula(e, env, oracle);
  if (t == Tri::Unknown) throw ChcError("formula has unbound variables");
  return t == Tri::True;
}

// ---- printing --------------------------------------------------------------

enum class Dialect : std::uint8_t { Adt, Seq };

inline std::string sort_text(Sort s, Dialect d) {
  switch (s) {
    case Sort::Int: return "Int";
    case Sort::Bool: return "Bool";
    case Sort::List: return d == Dialect::Adt ? "List" : "(Seq Int)";
    case Sort::Coll: return "(Multiset Int)";
  }
  return "?";
}

inline std::string int_text(std::int64_t v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

inline std::string render(const Expr& e, Dialect d = Dialect::Adt);

namespace detail {

inline std::string app(const std::string& f, const std::vector<Expr>& args, Dialect d) {
  std::string s = "(" + f;
  for (const auto& a : args) s += " " + render(a, d);
  return s + ")";
}

inline std::string list_text(const std::vector<std::int64_t>& xs, Dialect d) {
  if (d == Dialect::Adt) {
    std::string s = "nil";
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) s = "(cons " + int_text(*it) + " " + s + ")";
    return s;
  }
  if (xs.empty()) return "(as seq.empty (Seq Int))";
  if (xs.size() == 1) return "(seq.unit " + int_text(xs[0]) + ")";
  std::string s = "(seq.++";
  for (auto x : xs) s += " (seq.unit " + int_text(x) + ")";
  return s + ")";
}

inline const char* coll_name(Mode m) { return m == Mode::Set ? "set" : "multiset"; }

}  // namespace detail

inline std::string render(const Expr& e, Dialect d) {
  const auto& a = e->args;
  const bool adt = d == Dialect::Adt;
  switch (e->op) {
    case Op::Var: return e->name;
    case Op::IntLit: return int_text(e->lit.i);
    case Op::ListLit: return detail::list_text(e->lit.seq, d);
    case Op::BoolLit: return e->lit.i ? "true" : "false";
    case Op::Add: return detail::app("+", a, d);
    case Op::Sub: return detail::app("-", a, d);
    case Op::Neg: return detail::app("-", a, d);
    case Op::Mul: return "(* " + int_text(e->lit.i) + " " + render(a[0], d) + ")";
    case Op::Ite: return detail::app("ite", a, d);
    case Op::Cons:
      return adt ? detail::app("cons", a, d) : "(seq.++ (seq.unit " + render(a[0], d) + ") " + render(a[1], d) + ")";
    case Op::Head: return adt ? detail::app("head", a, d) : "(seq.nth " + render(a[0], d) + " 0)";
    case Op::Tail:
      return adt ? detail::app("tail", a, d)
                 : "(seq.extract " + render(a[0], d) + " 1 (- (seq.len " + render(a[0], d) + ") 1))";
    case Op::Len: return detail::app(adt ? "len" : "seq.len", a, d);
    case Op::Concat: return detail::app(adt ? "append" : "seq.++", a, d);
    case Op::Rev: return detail::app(adt ? "reverse" : "seq.rev", a, d);
    case Op::LDiff:
      if (adt) return detail::app("ldiff", a, d);
      return "(seq.extract " + render(a[1], d) + " (seq.len " + render(a[0], d) + ") (- (seq.len " + render(a[1], d) +
             ") (seq.len " + render(a[0], d) + ")))";
    case Op::RDiff:
      if (adt) return detail::app("rdiff", a, d);
      return "(seq.extract " + render(a[1], d) + " 0 (- (seq.len " + render(a[1], d) + ") (seq.len " + render(a[0], d) +
             ")))";
    case Op::CollOf: return detail::app(std::string(detail::coll_name(e->cmode)) + "_of", a, d);
    case Op::CollSingleton: return detail::app(std::string(detail::coll_name(e->cmode)) + "_unit", a, d);
    case Op::CollUnion: return detail::app(std::string(detail::coll_name(e->cmode)) + "_union", a, d);
    case Op::CollDiff: return detail::app(std::string(detail::coll_name(e->cmode)) + "_minus", a, d);
    case Op::Count: return detail::app("count", a, d);
    case Op::Not: return detail::app("not", a, d);
    case Op::And: return detail::app("and", a, d);
    case Op::Or: return detail::app("or", a, d);
    case Op::Implies: return detail::app("=>", a, d);
    case Op::Eq: return detail::app("=", a, d);
    case Op::Ne: return detail::app("distinct", a, d);
    case Op::Le: return detail::app("<=", a, d);
    case Op::Lt: return detail::app("<", a, d);
    case Op::Ge: return detail::app(">=", a, d);
    case Op::Gt: return detail::app(">", a, d);
    case Op::IsPrefix: return detail::app(adt ? "prefixof" : "seq.prefixof", a, d);
    case Op::IsSuffix: return detail::app(adt ? "suffixof" : "seq.suffixof", a, d);
    case Op::CollSub: return detail::app("subset", a, d);
    case Op::IsNil: return adt ? "((_ is nil) " + render(a[0], d) + ")" : "(= (seq.len " + render(a[0], d) + ") 0)";
    case Op::IsCons: return adt ? "((_ is cons) " + render(a[0], d) + ")" : "(> (seq.len " + render(a[0], d) + ") 0)";
    case Op::Pred: return a.empty() ? e->name : detail::app(e->name, a, d);
  }
  return "?";
}

}  // namespace stp::chc
