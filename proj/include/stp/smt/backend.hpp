#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stp/chc/constraint.hpp"
#include "stp/chc/sexpr.hpp"
#include "stp/smt/process.hpp"

namespace stp::smt {

using chc::Env;
using chc::Expr;
using chc::Op;
using chc::Sort;
using chc::Value;

// lists of length <= max_len over 0..max_elem
struct Bounds {
  int max_len = 4;
  std::int64_t max_elem = 2;
};

inline std::string render(const Bounds& b) {
  return "L=" + std::to_string(b.max_len) + ",E=" + std::to_string(b.max_elem);
}

struct ValidityResult {
  enum class Kind { Valid, ValidBounded, Invalid, Unknown };
  Kind kind = Kind::Unknown;
  Bounds bounds;  // ValidBounded only
  Env assignment;  // Invalid only; falsifies the formula
  std::string reason;  // Unknown only

  static ValidityResult valid() { return {Kind::Valid, {}, {}, {}}; }
  static ValidityResult valid_bounded(Bounds b) { return {Kind::ValidBounded, b, {}, {}}; }
  static ValidityResult invalid(Env e) { return {Kind::Invalid, {}, std::move(e), {}}; }
  static ValidityResult unknown(std::string why) { return {Kind::Unknown, {}, {}, std::move(why)}; }

  bool is_valid() const { return kind == Kind::Valid || kind == Kind::ValidBounded; }
};

inline const char* kind_name(ValidityResult::Kind k) {
  switch (k) {
    case ValidityResult::Kind::Valid: return "valid";
    case ValidityResult::Kind::ValidBounded: return "valid (bounded)";
    case ValidityResult::Kind::Invalid: return "invalid";
    case ValidityResult::Kind::Unknown: return "unknown";
  }
  return "?";
}

// The only way an Invalid result leaves a provider.
inline ValidityResult confirmed_counterexample(const Expr& f, Env env) {
  if (chc::eval_formula(f, env) != chc::Tri::False)
    return ValidityResult::unknown("counter-model does not falsify the formula");
  return ValidityResult::invalid(std::move(env));
}

class Provider {
public:
  virtual ~Provider() = default;
  virtual ValidityResult check(const Expr& f) const = 0;
  virtual std::string name() const = 0;
};

// Looks for a falsifying assignment by enumeration within the bounds.
class BoundedProvider : public Provider {
public:
  explicit BoundedProvider(Bounds b = {}, std::uint64_t max_nodes = 2'000'000,
                           const std::atomic<bool>* cancel = nullptr)
      : b_(b), max_nodes_(max_nodes), cancel_(cancel) {}

  std::string name() const override { return "bounded"; }
  const Bounds& bounds() const { return b_; }

  ValidityResult check(const Expr& f) const override {
    if (has_pred(f)) return ValidityResult::unknown("uninterpreted predicate in formula");
    auto vars = chc::free_vars(f);
    std::vector<Expr> hyps;
    Expr concl = f;
    if (f->op == Op::Implies) {
      hyps = chc::conjuncts(f->args[0]);
      concl = f->args[1];
    }
    // one search per conclusion conjunct keeps the hypotheses usable as generators
    auto cases = chc::conjuncts(concl);
    if (cases.empty()) return ValidityResult::valid_bounded(b_);
    bool aborted = false;
    for (const auto& c : cases) {
      chc::ConstraintSolver cs(chc::Domain::bounded(b_.max_len, b_.max_elem), {max_nodes_, cancel_});
      auto pending = hyps;
      pending.push_back(chc::not_(c));
      std::optional<Env> hit;
      auto r = cs.enumerate(pending, vars, {}, [&](const Env& e) {
        if (chc::eval_formula(f, e) != chc::Tri::False) return false;
        hit = e;
        return true;
      });
      if (hit) return confirmed_counterexample(f, *hit);
      if (r == chc::Outcome::Aborted) aborted = true;
    }
    if (aborted) return ValidityResult::unknown("enumeration budget exhausted");
    return ValidityResult::valid_bounded(b_);
  }

private:
  static bool has_pred(const Expr& e) {
    if (e->op == Op::Pred) return true;
    for (const auto& a : e->args)
      if (has_pred(a)) return true;
    return false;
  }

  Bounds b_;
  std::uint64_t max_nodes_;
  const std::atomic<bool>* cancel_;
};

struct ExternalConfig {
  std::string command;  // run through /bin/sh -c; reads the script on stdin
  bool native_reverse = false;  // use seq.rev instead of a recursive definition
  std::chrono::milliseconds timeout{10000};
};

// SMT-LIB query asking for a model of the negation of f.
inline std::string encode_query(const Expr& f, bool native_reverse) {
  static const char* kRev = "stp_rev";
  Expr g = f;
  if (!native_reverse)
    g = chc::transform(f, [](const Expr& e) -> std::optional<Expr> {
      if (e->op != Op::Rev) return std::nullopt;
      return chc::mk(Op::Pred, Sort::List, e->args, kRev);
    });
  std::string s = "(set-logic ALL)\n(set-option :produce-models true)\n";
  if (!native_reverse)
    s += std::string("(define-fun-rec ") + kRev + " ((s (Seq Int))) (Seq Int)\n  (ite (= (seq.len s) 0) s (seq.++ (" +
         kRev + " (seq.extract s 1 (- (seq.len s) 1))) (seq.unit (seq.nth s 0)))))\n";
  for (const auto& [n, srt] : chc::free_vars(f))
    s += "(declare-const " + n + " " + chc::sort_text(srt, chc::Dialect::Seq) + ")\n";
  s += "(assert (not " + chc::render(g, chc::Dialect::Seq) + "))\n(check-sat)\n(get-model)\n";
  return s;
}

namespace detail {

inline std::optional<std::int64_t> int_value(const chc::SExpr& e) {
  if (!e.is_list && !e.is_string && !e.atom.empty() && e.atom.size() < 19 &&
      std::all_of(e.atom.begin(), e.atom.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return std::stoll(e.atom);
  if (e.head_is("-") && e.items.size() == 2) {
    auto v = int_value(e.items[1]);
    if (v) return -*v;
  }
  return std::nullopt;
}

// explicit finite sequences only
inline bool seq_value(const chc::SExpr& e, std::vector<std::int64_t>& out) {
  if (e.is_atom("seq.empty")) return true;
  if (e.head_is("as") && e.items.size() == 3 && e.items[1].is_atom("seq.empty")) return true;
  if (e.head_is("seq.unit") && e.items.size() == 2) {
    auto v = int_value(e.items[1]);
    if (!v) return false;
    out.push_back(*v);
    return true;
  }
  if (e.head_is("seq.++")) {
    for (std::size_t k = 1; k < e.items.size(); ++k)
      if (!seq_value(e.items[k], out)) return false;
    return true;
  }
  return false;
}

}  // namespace detail

// Reads `sat` plus a (get-model) answer into an assignment for f's variables.
inline std::optional<Env> decode_model(const std::string& text, const std::map<std::string, Sort>& vars,
                                       std::string& why) {
  std::vector<chc::SExpr> items;
  try {
    items = chc::read_sexprs(text);
  } catch (const chc::ChcError& e) {
    why = std::string("unreadable solver output: ") + e.what();
    return std::nullopt;
  }
  Env env;
  std::vector<const chc::SExpr*> defs;
  for (const auto& it : items) {
    if (it.head_is("define-fun")) defs.push_back(&it);
    if (it.head_is("model"))
      for (const auto& d : it.items)
        if (d.head_is("define-fun")) defs.push_back(&d);
    if (it.is_list && !it.items.empty() && it.items[0].head_is("define-fun"))
      for (const auto& d : it.items)
        if (d.head_is("define-fun")) defs.push_back(&d);
  }
  for (const auto* d : defs) {
    if (d->items.size() != 5) continue;
    auto v = vars.find(d->items[1].atom);
    if (v == vars.end()) continue;
    const auto& body = d->items[4];
    if (v->second == Sort::Int) {
      auto i = detail::int_value(body);
      if (!i) {
        why = "non-literal integer in counter-model";
        return std::nullopt;
      }
      env[v->first] = Value::integer(*i);
    } else if (v->second == Sort::List) {
      std::vector<std::int64_t> xs;
      if (!detail::seq_value(body, xs)) {
        why = "symbolic sequence in counter-model";
        return std::nullopt;
      }
      env[v->first] = Value::list(std::move(xs));
    } else if (v->second == Sort::Bool) {
      env[v->first] = Value::boolean(body.is_atom("true"));
    }
  }
  // variables the solver left out are irrelevant; any value will do
  for (const auto& [n, s] : vars)
    if (!env.count(n)) env[n] = s == Sort::Int ? Value::integer(0) : s == Sort::Bool ? Value::boolean(false) : Value::list({});
  return env;
}

class ExternalProvider : public Provider {
public:
  explicit ExternalProvider(ExternalConfig cfg) : cfg_(std::move(cfg)) {}

  std::string name() const override { return "external"; }
  const ExternalConfig& config() const { return cfg_; }

  ValidityResult check(const Expr& f) const override {
    if (!in_fragment(f)) return ValidityResult::unknown("formula outside the sequence fragment");
    auto vars = chc::free_vars(f);
    auto pr = run_process(cfg_.command, encode_query(f, cfg_.native_reverse), cfg_.timeout);
    if (!pr.started) return ValidityResult::unknown("could not start solver");
    if (pr.timed_out) return ValidityResult::unknown("solver timed out");
    std::size_t p = pr.out.find_first_not_of(" \t\r\n");
    std::size_t q = p == std::string::npos ? p : pr.out.find_first_of(" \t\r\n(", p);
    std::string first = p == std::string::npos ? "" : pr.out.substr(p, q - p);
    if (first == "unsat") return ValidityResult::valid();
    if (first != "sat") {
      std::string msg = first.empty() ? pr.err : first;
      if (msg.size() > 200) msg.resize(200);
      return ValidityResult::unknown("solver answered '" + msg + "' (exit " + std::to_string(pr.exit_code) + ")");
    }
    std::string why;
    auto env = decode_model(pr.out.substr(q == std::string::npos ? pr.out.size() : q), vars, why);
    if (!env) return ValidityResult::unknown(why);
    return confirmed_counterexample(f, std::move(*env));
  }

private:
  static bool in_fragment(const Expr& e) {
    switch (e->op) {
      case Op::CollOf:
      case Op::CollSingleton:
      case Op::CollUnion:
      case Op::CollDiff:
      case Op::CollSub:
      case Op::Count:
      case Op::Pred: return false;
      default: break;
    }
    if (e->sort == Sort::Coll) return false;
    for (const auto& a : e->args)
      if (!in_fragment(a)) return false;
    return true;
  }

  ExternalConfig cfg_;
};

// External solver first when configured, bounded enumeration otherwise or as fallback.
class Backend {
public:
  explicit Backend(Bounds b = {}, std::optional<ExternalConfig> ext = std::nullopt,
                   const std::atomic<bool>* cancel = nullptr)
      : bounded_(b, 2'000'000, cancel) {
    if (ext && !ext->command.empty()) external_ = std::make_unique<ExternalProvider>(std::move(*ext));
  }

  ValidityResult check(const Expr& f) const {
    if (external_) {
      auto r = external_->check(f);
      if (r.kind != ValidityResult::Kind::Unknown) return r;
    }
    return bounded_.check(f);
  }

  bool has_external() const { return external_ != nullptr; }
  const Bounds& bounds() const { return bounded_.bounds(); }

private:
  BoundedProvider bounded_;
  std::unique_ptr<ExternalProvider> external_;
};

inline ValidityResult check_validity(const Expr& f, const Provider& p) { return p.check(f); }

}  // namespace stp::smt
