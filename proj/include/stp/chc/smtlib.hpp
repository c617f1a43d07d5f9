#pragma once

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stp/chc/sexpr.hpp"
#include "stp/chc/system.hpp"

namespace stp::chc {

struct SmtlibOptions {
  // zero/succ datatypes become lists of 0s
  bool nat_as_list = true;
};

// A predicate interpretation read back from a define-fun model.
struct Definition {
  std::vector<std::string> params;
  std::vector<Sort> sorts;
  Expr body;
};

namespace detail {

inline bool is_numeral(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

class SmtlibParser {
public:
  explicit SmtlibParser(SmtlibOptions opt) : opt_(opt) {}

  ChcSystem parse(std::string_view text) {
    for (const auto& cmd : read_sexprs(text)) command(cmd);
    check_system(sys_);
    return sys_;
  }

  std::map<std::string, Definition> parse_model(std::string_view text, const ChcSystem& s) {
    for (const auto& p : s.preds) preds_[p.name] = p;
    std::map<std::string, Definition> out;
    for (const auto& e : read_sexprs(text)) collect_defs(e, out);
    return out;
  }

private:
  using Scope = std::map<std::string, Expr>;

  struct Adt {
    bool nat = false;
    std::string nil, cons, head, tail;
  };

  void command(const SExpr& c) {
    if (!c.is_list || c.items.empty() || c.items[0].is_list) c.fail("expected a command");
    const std::string& k = c.items[0].atom;
    if (k == "set-logic" || k == "set-info" || k == "set-option" || k == "check-sat" || k == "get-model" || k == "exit" ||
        k == "get-info")
      return;
    if (k == "declare-datatypes") return declare_datatypes(c);
    if (k == "declare-datatype") {
      if (c.items.size() != 3) c.fail("malformed declare-datatype");
      return datatype(c.items[1].atom, c.items[2], c);
    }
    if (k == "declare-fun") return declare_fun(c);
    if (k == "assert") {
      if (c.items.size() != 2) c.fail("malformed assert");
      return assertion(c.items[1]);
    }
    c.fail("unsupported command '" + k + "'");
  }

  void declare_datatypes(const SExpr& c) {
    if (c.items.size() != 3 || !c.items[1].is_list || !c.items[2].is_list) c.fail("malformed declare-datatypes");
    const auto& names = c.items[1].items;
    const auto& bodies = c.items[2].items;
    if (names.empty()) {
      // legacy form: ((Name ctor...) ...)
      for (const auto& b : bodies) {
        if (!b.is_list || b.items.empty()) b.fail("malformed datatype");
        SExpr ctors;
        ctors.is_list = true;
        ctors.items.assign(b.items.begin() + 1, b.items.end());
        ctors.line = b.line;
        ctors.col = b.col;
        datatype(b.items[0].atom, ctors, b);
      }
      return;
    }
    if (names.size() != bodies.size()) c.fail("datatype count mismatch");
    // register names first so that field sorts can refer to them
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto& n = names[k];
      std::string name = n.is_list && !n.items.empty() ? n.items[0].atom : n.atom;
      if (n.is_list && n.items.size() == 2 && n.items[1].atom != "0") n.fail("parametric datatype '" + name + "' is not supported");
      pending_.insert(name);
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto& n = names[k];
      datatype(n.is_list ? n.items[0].atom : n.atom, bodies[k], n);
    }
  }

  void datatype(const std::string& name, const SExpr& ctors, const SExpr& where) {
    auto bad = [&](const std::string& why) { where.fail("unsupported sort '" + name + "': " + why); };
    if (!ctors.is_list || ctors.items.size() != 2) bad("only list-like datatypes with two constructors are supported");
    const SExpr* nil = nullptr;
    const SExpr* cons = nullptr;
    for (const auto& k : ctors.items) {
      if (!k.is_list) {
        if (nil) bad("two nullary constructors");
        nil = &k;  // bare symbol
        continue;
      }
      if (k.items.size() == 1) {
        if (nil) bad("two nullary constructors");
        nil = &k;
      } else {
        if (cons) bad("two constructors with fields");
        cons = &k;
      }
    }
    if (!nil || !cons) bad("needs one nullary and one recursive constructor");
    Adt a;
    a.nil = nil->is_list ? nil->items[0].atom : nil->atom;
    a.cons = cons->items[0].atom;
    auto field = [&](const SExpr& f) -> std::pair<std::string, std::string> {
      if (!f.is_list || f.items.size() != 2 || f.items[1].is_list) bad("malformed field");
      return {f.items[0].atom, f.items[1].atom};
    };
    if (cons->items.size() == 3) {
      auto [h, hs] = field(cons->items[1]);
      auto [t, ts] = field(cons->items[2]);
      if (hs != "Int" || ts != name) bad("elements must be Int and the tail the datatype itself");
      a.head = h;
      a.tail = t;
    } else if (cons->items.size() == 2) {
      auto [p, ps] = field(cons->items[1]);
      if (ps != name) bad("not a list-like datatype");
      if (!opt_.nat_as_list) bad("natural-number datatypes need the nat-as-list encoding");
      a.nat = true;
      a.tail = p;
    } else {
      bad("not a list-like datatype");
    }
    adts_[name] = a;
    pending_.erase(name);
    ctor_[a.nil] = name;
    ctor_[a.cons] = name;
    if (!a.head.empty()) sel_head_[a.head] = name;
    sel_tail_[a.tail] = name;
  }

  Sort sort(const SExpr& e) {
    if (e.is_list) {
      if (e.items.size() == 2 && e.items[0].is_atom("Seq") && e.items[1].is_atom("Int")) return Sort::List;
      e.fail("unsupported sort '" + render(e) + "'");
    }
    if (e.atom == "Int") return Sort::Int;
    if (e.atom == "Bool") return Sort::Bool;
    if (adts_.count(e.atom)) return Sort::List;
    if (pending_.count(e.atom)) return Sort::List;
    e.fail("unsupported sort '" + e.atom + "'");
  }

  void declare_fun(const SExpr& c) {
    if (c.items.size() != 4 || !c.items[2].is_list) c.fail("malformed declare-fun");
    if (sort(c.items[3]) != Sort::Bool) c.fail("only predicate declarations are supported");
    PredDecl d{c.items[1].atom, {}};
    for (const auto& s : c.items[2].items) {
      Sort srt = sort(s);
      if (srt == Sort::Bool) s.fail("Bool predicate arguments are not supported");
      d.params.push_back(srt);
    }
    if (preds_.count(d.name)) c.fail("predicate '" + d.name + "' declared twice");
    preds_[d.name] = d;
    sys_.preds.push_back(d);
  }

  void bind_vars(const SExpr& vs, Scope& scope) {
    if (!vs.is_list) vs.fail("malformed variable list");
    for (const auto& b : vs.items) {
      if (!b.is_list || b.items.size() != 2 || b.items[0].is_list) b.fail("malformed binding");
      scope[b.items[0].atom] = var(b.items[0].atom, sort(b.items[1]));
    }
  }

  void assertion(const SExpr& a) {
    Scope scope;
    const SExpr* f = &a;
    while (f->head_is("forall")) {
      if (f->items.size() != 3) f->fail("malformed forall");
      bind_vars(f->items[1], scope);
      f = &f->items[2];
    }
    std::vector<Expr> body_formulas;
    std::vector<Expr> heads;
    positive(*f, scope, body_formulas, heads);
    if (heads.size() > 1) {
      // (=> B (and P Q)) splits; a genuine disjunction of predicates does not
      f->fail("clause is not Horn: more than one positive predicate");
    }
    Clause cl;
    std::vector<Expr> constraint;
    for (const auto& b : body_formulas) split_body(b, cl.body, constraint, *f);
    if (!heads.empty()) cl.head = PredAtom{heads[0]->name, heads[0]->args};
    std::vector<Expr> arg_eqs;
    normalize_args(cl, arg_eqs, scope);
    arg_eqs.insert(arg_eqs.end(), constraint.begin(), constraint.end());
    cl.constraint = and_(arg_eqs);
    if (cl.is_goal()) sys_.goals.push_back(cl);
    else sys_.definite.push_back(cl);
  }

  // f is a positive formula of the clause: collect head predicates, push negated rest to the body
  void positive(const SExpr& f, Scope& scope, std::vector<Expr>& body, std::vector<Expr>& heads) {
    if (f.head_is("=>")) {
      if (f.items.size() < 3) f.fail("malformed =>");
      for (std::size_t k = 1; k + 1 < f.items.size(); ++k) body.push_back(formula(f.items[k], scope));
      positive(f.items.back(), scope, body, heads);
      return;
    }
    if (f.head_is("or")) {
      for (std::size_t k = 1; k < f.items.size(); ++k) positive(f.items[k], scope, body, heads);
      return;
    }
    if (f.head_is("not")) {
      if (f.items.size() != 2) f.fail("malformed not");
      body.push_back(formula(f.items[1], scope));
      return;
    }
    if (f.head_is("and")) {
      Expr e = formula(f, scope);
      if (has_pred(e)) {
        std::vector<Expr> ps;
        for (const auto& x : conjuncts(e)) {
          if (x->op != Op::Pred) f.fail("clause is not Horn");
          ps.push_back(x);
        }
        if (ps.size() == 1) heads.push_back(ps[0]);
        else f.fail("clause is not Horn: conjunction of predicates in the head");
        return;
      }
      body.push_back(negate(e));
      return;
    }
    Expr e = formula(f, scope);
    if (e->op == Op::Pred) {
      heads.push_back(e);
      return;
    }
    if (is_false(e)) return;
    if (has_pred(e)) f.fail("clause is not Horn: predicate under a connective in the head");
    body.push_back(negate(e));
  }

  void split_body(const Expr& e, std::vector<PredAtom>& atoms, std::vector<Expr>& constraint, const SExpr& where) {
    if (e->op == Op::And) {
      for (const auto& x : e->args) split_body(x, atoms, constraint, where);
      return;
    }
    if (e->op == Op::Pred) {
      atoms.push_back({e->name, e->args});
      return;
    }
    if (has_pred(e)) where.fail("clause is not Horn: predicate under a connective in the body");
    constraint.push_back(e);
  }

  static bool has_pred(const Expr& e) {
    if (e->op == Op::Pred) return true;
    for (const auto& a : e->args)
      if (has_pred(a)) return true;
    return false;
  }

  std::string fresh(const Scope& scope) {
    while (true) {
      std::string n = "_a" + std::to_string(++fresh_);
      if (!scope.count(n)) return n;
    }
  }

  void normalize_args(Clause& cl, std::vector<Expr>& constraint, const Scope& scope) {
    auto fix = [&](PredAtom& a) {
      for (auto& x : a.args) {
        if (x->op == Op::Var) continue;
        auto v = var(fresh(scope), x->sort);
        constraint.push_back(eq(v, x));
        x = v;
      }
    };
    for (auto& a : cl.body) fix(a);
    if (cl.head) fix(*cl.head);
  }

  // ---- terms ----

  Expr formula(const SExpr& e, Scope& scope) {
    Expr x = term(e, scope);
    if (x->sort != Sort::Bool) e.fail("expected a formula");
    return x;
  }

  Expr int_term(const SExpr& e, Scope& scope) {
    Expr x = term(e, scope);
    if (x->sort != Sort::Int) e.fail("expected an Int term");
    return x;
  }

  Expr list_term(const SExpr& e, Scope& scope) {
    Expr x = term(e, scope);
    if (x->sort != Sort::List) e.fail("expected a list term");
    return x;
  }

  static Expr cons_fold(Expr h, Expr t) {
    if (h->op == Op::IntLit && t->op == Op::ListLit) {
      auto xs = t->lit.seq;
      xs.insert(xs.begin(), h->lit.i);
      return list_lit(xs);
    }
    return cons(std::move(h), std::move(t));
  }

  Expr term(const SExpr& e, Scope& scope) {
    if (e.is_string) e.fail("string literals are not supported");
    if (!e.is_list) {
      const auto& s = e.atom;
      if (is_numeral(s)) return int_lit(std::stoll(s));
      if (s == "true") return tru();
      if (s == "false") return fls();
      if (auto it = scope.find(s); it != scope.end()) return it->second;
      if (auto it = ctor_.find(s); it != ctor_.end() && adts_[it->second].nil == s) return nil();
      if (auto it = preds_.find(s); it != preds_.end() && it->second.params.empty()) return pred(s, {});
      e.fail("unknown symbol '" + s + "'");
    }
    if (e.items.empty()) e.fail("empty application");
    const SExpr& f = e.items[0];
    std::vector<SExpr> raw(e.items.begin() + 1, e.items.end());
    auto n = raw.size();
    if (f.is_list) {
      // ((_ is C) x) and (as nil List)
      if (f.items.size() == 3 && f.items[0].is_atom("_") && f.items[1].is_atom("is") && n == 1)
        return tester(f.items[2].atom, list_term(raw[0], scope), e);
      e.fail("unsupported application");
    }
    const std::string& op = f.atom;
    if (op == "as" && n == 2) return term(raw[0], scope);
    if (op == "let") {
      if (n != 2 || !raw[0].is_list) e.fail("malformed let");
      Scope inner = scope;
      for (const auto& b : raw[0].items) {
        if (!b.is_list || b.items.size() != 2) b.fail("malformed let binding");
        inner[b.items[0].atom] = term(b.items[1], scope);
      }
      return term(raw[1], inner);
    }
    if (op == "forall" || op == "exists") e.fail("nested quantifiers are not supported");
    auto args = [&]() {
      std::vector<Expr> xs;
      for (const auto& r : raw) xs.push_back(term(r, scope));
      return xs;
    };
    if (op == "and" || op == "or") {
      std::vector<Expr> xs;
      for (const auto& r : raw) xs.push_back(formula(r, scope));
      return op == "and" ? and_(xs) : or_(xs);
    }
    if (op == "not") {
      if (n != 1) e.fail("not takes one argument");
      return not_(formula(raw[0], scope));
    }
    if (op == "=>") {
      if (n < 2) e.fail("=> takes at least two arguments");
      Expr r = formula(raw[n - 1], scope);
      for (std::size_t k = n - 1; k-- > 0;) r = implies(formula(raw[k], scope), r);
      return r;
    }
    if (op == "=" || op == "distinct") {
      auto xs = args();
      if (xs.size() < 2) e.fail(op + " takes at least two arguments");
      for (const auto& x : xs)
        if (x->sort != xs[0]->sort) e.fail("sort mismatch in " + op);
      std::vector<Expr> cs;
      if (op == "=") {
        for (std::size_t k = 0; k + 1 < xs.size(); ++k) cs.push_back(eq(xs[k], xs[k + 1]));
      } else {
        for (std::size_t i = 0; i < xs.size(); ++i)
          for (std::size_t j = i + 1; j < xs.size(); ++j) cs.push_back(ne(xs[i], xs[j]));
      }
      return and_(cs);
    }
    if (op == "<=" || op == "<" || op == ">=" || op == ">") {
      std::vector<Expr> xs;
      for (const auto& r : raw) xs.push_back(int_term(r, scope));
      if (xs.size() < 2) e.fail(op + " takes at least two arguments");
      std::vector<Expr> cs;
      for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        auto& a = xs[k];
        auto& b = xs[k + 1];
        cs.push_back(op == "<=" ? le(a, b) : op == "<" ? lt(a, b) : op == ">=" ? ge(a, b) : gt(a, b));
      }
      return and_(cs);
    }
    if (op == "+") {
      if (n == 0) e.fail("+ needs arguments");
      Expr r = int_term(raw[0], scope);
      for (std::size_t k = 1; k < n; ++k) r = add(r, int_term(raw[k], scope));
      return r;
    }
    if (op == "-") {
      if (n == 0) e.fail("- needs arguments");
      Expr r = int_term(raw[0], scope);
      if (n == 1) return r->op == Op::IntLit ? int_lit(-r->lit.i) : neg(r);
      for (std::size_t k = 1; k < n; ++k) r = sub(r, int_term(raw[k], scope));
      return r;
    }
    if (op == "*") {
      std::int64_t c = 1;
      Expr t;
      for (const auto& r : raw) {
        Expr x = int_term(r, scope);
        if (x->op == Op::IntLit) c *= x->lit.i;
        else if (t) e.fail("non-linear multiplication is not supported");
        else t = x;
      }
      return t ? mul(c, t) : int_lit(c);
    }
    if (op == "ite") {
      if (n != 3) e.fail("ite takes three arguments");
      Expr a = term(raw[1], scope), b = term(raw[2], scope);
      if (a->sort != b->sort) e.fail("ite branches have different sorts");
      return ite(formula(raw[0], scope), a, b);
    }
    if (op == "len" || op == "seq.len") {
      if (n != 1) e.fail("len takes one argument");
      return len(list_term(raw[0], scope));
    }
    if (auto it = ctor_.find(op); it != ctor_.end()) {
      const Adt& a = adts_[it->second];
      if (op == a.nil) {
        if (n) e.fail("nullary constructor applied");
        return nil();
      }
      if (a.nat) {
        if (n != 1) e.fail("constructor arity");
        return cons_fold(int_lit(0), list_term(raw[0], scope));
      }
      if (n != 2) e.fail("constructor arity");
      return cons_fold(int_term(raw[0], scope), list_term(raw[1], scope));
    }
    if (sel_head_.count(op)) {
      if (n != 1) e.fail("selector arity");
      return head(list_term(raw[0], scope));
    }
    if (sel_tail_.count(op)) {
      if (n != 1) e.fail("selector arity");
      return tail(list_term(raw[0], scope));
    }
    if (op.rfind("is-", 0) == 0 && n == 1) return tester(op.substr(3), list_term(raw[0], scope), e);
    if (auto it = preds_.find(op); it != preds_.end()) {
      auto xs = args();
      const auto& d = it->second;
      if (xs.size() != d.params.size()) e.fail("predicate '" + op + "' arity mismatch");
      for (std::size_t k = 0; k < xs.size(); ++k)
        if (xs[k]->sort != d.params[k]) raw[k].fail("argument sort mismatch for '" + op + "'");
      return pred(op, xs);
    }
    e.fail("unsupported function '" + op + "'");
  }

  Expr tester(const std::string& ctor, Expr l, const SExpr& e) {
    auto it = ctor_.find(ctor);
    if (it == ctor_.end()) e.fail("unknown constructor '" + ctor + "'");
    return adts_[it->second].nil == ctor ? is_nil(l) : is_cons(l);
  }

  void collect_defs(const SExpr& e, std::map<std::string, Definition>& out) {
    if (!e.is_list) return;
    if (e.head_is("define-fun")) {
      if (e.items.size() != 5) e.fail("malformed define-fun");
      Scope scope;
      Definition d;
      for (const auto& b : e.items[2].items) {
        if (!b.is_list || b.items.size() != 2) b.fail("malformed parameter");
        Sort s = sort(b.items[1]);
        d.params.push_back(b.items[0].atom);
        d.sorts.push_back(s);
        scope[b.items[0].atom] = var(b.items[0].atom, s);
      }
      d.body = formula(e.items[4], scope);
      out[e.items[1].atom] = d;
      return;
    }
    for (const auto& x : e.items) collect_defs(x, out);
  }

  SmtlibOptions opt_;
  ChcSystem sys_;
  std::map<std::string, Adt> adts_;
  std::set<std::string> pending_;
  std::map<std::string, std::string> ctor_, sel_head_, sel_tail_;
  std::map<std::string, PredDecl> preds_;
  int fresh_ = 0;
};

}  // namespace detail

inline ChcSystem parse_smtlib(std::string_view text, SmtlibOptions opt = {}) {
  return detail::SmtlibParser(opt).parse(text);
}

// Reads define-fun interpretations (e.g. the answer of an integer CHC solver).
inline std::map<std::string, Definition> parse_model(std::string_view text, const ChcSystem& s) {
  detail::SmtlibParser p({});
  return p.parse_model(text, s);
}

}  // namespace stp::chc
