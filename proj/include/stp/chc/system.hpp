#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stp/chc/expr.hpp"

namespace stp::chc {

struct PredAtom {
  std::string pred;
  std::vector<Expr> args;
};

inline Expr as_formula(const PredAtom& a) { return pred(a.pred, a.args); }

struct Clause {
  std::vector<PredAtom> body;
  Expr constraint = tru();
  std::optional<PredAtom> head;  // empty: goal clause
  std::map<std::string, Sort> vars;

  bool is_goal() const { return !head.has_value(); }
};

struct PredDecl {
  std::string name;
  std::vector<Sort> params;
};

struct ChcSystem {
  std::vector<PredDecl> preds;
  std::vector<Clause> definite;
  std::vector<Clause> goals;

  const PredDecl* find(const std::string& name) const {
    for (const auto& p : preds)
      if (p.name == name) return &p;
    return nullptr;
  }
  const PredDecl& decl(const std::string& name) const {
    if (auto* p = find(name)) return *p;
    throw ChcError("undeclared predicate '" + name + "'");
  }
  std::vector<Clause> all_clauses() const {
    auto out = definite;
    out.insert(out.end(), goals.begin(), goals.end());
    return out;
  }
  bool has_list_args() const {
    for (const auto& p : preds)
      for (auto s : p.params)
        if (s == Sort::List) return true;
    return false;
  }
};

// Recomputes clause variable sets and checks atoms against declarations.
inline void check_system(ChcSystem& s) {
  auto check_atom = [&](const PredAtom& a) {
    const auto& d = s.decl(a.pred);
    if (d.params.size() != a.args.size())
      throw ChcError("predicate '" + a.pred + "' applied to " + std::to_string(a.args.size()) + " arguments, declared with " +
                     std::to_string(d.params.size()));
    for (std::size_t k = 0; k < a.args.size(); ++k)
      if (a.args[k]->sort != d.params[k]) throw ChcError("argument " + std::to_string(k) + " of '" + a.pred + "' has the wrong sort");
  };
  auto fix = [&](Clause& c) {
    std::map<std::string, Sort> vs;
    for (const auto& a : c.body) {
      check_atom(a);
      for (const auto& x : a.args) free_vars(x, vs);
    }
    if (c.head) {
      check_atom(*c.head);
      for (const auto& x : c.head->args) free_vars(x, vs);
    }
    if (c.constraint->sort != Sort::Bool) throw ChcError("clause constraint is not a formula");
    free_vars(c.constraint, vs);
    for (const auto& [n, srt] : c.vars) {
      auto it = vs.find(n);
      if (it != vs.end() && it->second != srt) throw ChcError("variable '" + n + "' used at two sorts");
    }
    c.vars = vs;
  };
  for (auto& c : s.definite) {
    if (c.is_goal()) throw ChcError("goal clause in the definite part");
    fix(c);
  }
  for (auto& c : s.goals) {
    if (!c.is_goal()) throw ChcError("definite clause in the goal part");
    fix(c);
  }
}

// ---- samples ---------------------------------------------------------------

enum class Provenance { Derived, Counterexample };

struct Sample {
  std::string pred;
  std::vector<Value> values;
  Provenance provenance = Provenance::Derived;
  int depth = 0;

  bool operator==(const Sample& o) const { return pred == o.pred && values == o.values; }
};

inline std::string render(const Sample& s) {
  std::string out = s.pred + "(";
  for (std::size_t k = 0; k < s.values.size(); ++k) out += (k ? ", " : "") + render(s.values[k]);
  return out + ")";
}

// ---- printing --------------------------------------------------------------

inline std::string render(const PredAtom& a, Dialect d = Dialect::Adt) { return render(as_formula(a), d); }

inline std::string render(const Clause& c) {
  std::vector<Expr> body;
  for (const auto& a : c.body) body.push_back(as_formula(a));
  for (const auto& x : conjuncts(c.constraint)) body.push_back(x);
  std::string head = c.head ? render(*c.head) : "false";
  std::string f;
  if (body.empty()) f = head;
  else if (body.size() == 1) f = "(=> " + render(body[0]) + " " + head + ")";
  else f = "(=> " + render(mk(Op::And, Sort::Bool, body)) + " " + head + ")";
  if (c.vars.empty()) return f;
  std::string q = "(forall (";
  bool first = true;
  for (const auto& [n, s] : c.vars) {
    q += (first ? "(" : " (") + n + " " + sort_text(s, Dialect::Adt) + ")";
    first = false;
  }
  return q + ") " + f + ")";
}

inline std::string render(const ChcSystem& s) {
  std::ostringstream os;
  os << "(set-logic HORN)\n";
  bool lists = s.has_list_args();
  for (const auto& c : s.all_clauses())
    for (const auto& [n, srt] : c.vars) lists = lists || srt == Sort::List;
  if (lists) os << "(declare-datatypes ((List 0)) (((nil) (cons (head Int) (tail List)))))\n";
  for (const auto& p : s.preds) {
    os << "(declare-fun " << p.name << " (";
    for (std::size_t k = 0; k < p.params.size(); ++k) os << (k ? " " : "") << sort_text(p.params[k], Dialect::Adt);
    os << ") Bool)\n";
  }
  for (const auto& c : s.definite) os << "(assert " << render(c) << ")\n";
  for (const auto& c : s.goals) os << "(assert " << render(c) << ")\n";
  os << "(check-sat)\n";
  return os.str();
}

}  // namespace stp::chc
