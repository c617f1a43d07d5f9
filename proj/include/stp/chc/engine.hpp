#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "stp/chc/constraint.hpp"
#include "stp/chc/system.hpp"

namespace stp::chc {

// Ground derivation of a predicate instance from definite clauses.
struct DerivationNode {
  std::string pred;
  std::vector<Value> args;
  std::size_t clause = 0;  // index into definite clauses
  Env assignment;  // clause variables
  std::vector<DerivationNode> children;

  int height() const {
    if (children.empty()) return 0;
    int h = 0;
    for (const auto& c : children) h = std::max(h, c.height());
    return h + 1;
  }
};

// A goal clause whose body holds under the assignment; premises are derived.
struct Refutation {
  std::size_t goal = 0;
  Env assignment;
  std::vector<DerivationNode> premises;
};

struct GoalWitness {
  std::size_t goal = 0;
  Env assignment;
  std::vector<Sample> atoms;
};

inline std::string render(const DerivationNode& n, int indent = 0) {
  std::string s(static_cast<std::size_t>(indent) * 2, ' ');
  s += render(Sample{n.pred, n.args}) + "  [clause " + std::to_string(n.clause) + "]\n";
  for (const auto& c : n.children) s += render(c, indent + 1);
  return s;
}

inline std::string render(const Refutation& r) {
  std::string s = "goal " + std::to_string(r.goal) + " with";
  for (const auto& [k, v] : r.assignment) s += " " + k + "=" + render(v);
  s += "\n";
  for (const auto& p : r.premises) s += render(p, 1);
  return s;
}

namespace detail {

// clause atoms, constraint and variables must agree with env
inline bool clause_instance_holds(const Clause& c, const Env& env, const std::vector<std::vector<Value>>& body_args,
                                  const std::vector<Value>* head_args) {
  for (const auto& [n, s] : c.vars) {
    auto it = env.find(n);
    if (it == env.end() || it->second.sort != s) return false;
  }
  auto match = [&](const PredAtom& a, const std::vector<Value>& vs) {
    if (a.args.size() != vs.size()) return false;
    for (std::size_t k = 0; k < vs.size(); ++k) {
      auto v = eval_term(a.args[k], env);
      if (!v || *v != vs[k]) return false;
    }
    return true;
  };
  if (c.body.size() != body_args.size()) return false;
  for (std::size_t k = 0; k < c.body.size(); ++k)
    if (!match(c.body[k], body_args[k])) return false;
  if (head_args && (!c.head || !match(*c.head, *head_args))) return false;
  return eval_formula(c.constraint, env) == Tri::True;
}

}  // namespace detail

// Concrete check of a derivation against the definite clauses.
inline bool replay(const ChcSystem& s, const DerivationNode& n) {
  if (n.clause >= s.definite.size()) return false;
  const Clause& c = s.definite[n.clause];
  if (!c.head || c.head->pred != n.pred) return false;
  std::vector<std::vector<Value>> body;
  for (std::size_t k = 0; k < n.children.size(); ++k) {
    if (k >= c.body.size() || n.children[k].pred != c.body[k].pred) return false;
    body.push_back(n.children[k].args);
  }
  if (!detail::clause_instance_holds(c, n.assignment, body, &n.args)) return false;
  for (const auto& ch : n.children)
    if (!replay(s, ch)) return false;
  return true;
}

inline bool replay(const ChcSystem& s, const Refutation& r) {
  if (r.goal >= s.goals.size()) return false;
  const Clause& g = s.goals[r.goal];
  std::vector<std::vector<Value>> body;
  for (std::size_t k = 0; k < r.premises.size(); ++k) {
    if (k >= g.body.size() || r.premises[k].pred != g.body[k].pred) return false;
    body.push_back(r.premises[k].args);
  }
  if (!detail::clause_instance_holds(g, r.assignment, body, nullptr)) return false;
  for (const auto& p : r.premises)
    if (!replay(s, p)) return false;
  return true;
}

struct SampleBudget {
  int depth = 4;
  int count = 16;  // per predicate
  int cap = 32;  // per predicate
  Domain values{4, 0, 3, 0, 4};
};

// Top-down unfolding of atoms through definite clauses, with constraint
// propagation at every step and memoised results for ground atoms.
class Engine {
public:
  explicit Engine(const ChcSystem& s, Domain dom = {}, Limits lim = {}) : sys_(s), solver_(dom, lim), lim_(lim) {}

  bool aborted() const { return aborted_; }

  std::optional<DerivationNode> derive(const std::string& pred, const std::vector<Value>& args, int depth) {
    start();
    return derive_ground(pred, args, depth);
  }

  bool derivable(const Sample& s, int depth) { return derive(s.pred, s.values, depth).has_value(); }

  // Ground derivation of some goal body within the height bound.
  std::optional<Refutation> refute(int depth) {
    start();
    for (int d = 0; d <= depth; ++d) {
      for (std::size_t g = 0; g < sys_.goals.size(); ++g) {
        auto r = refute_goal(g, d);
        if (r) return r;
        if (aborted_) return std::nullopt;
      }
    }
    return std::nullopt;
  }

  // Random members of the least model, deduplicated, depth recorded.
  std::vector<Sample> collect_samples(const SampleBudget& b, std::mt19937_64& rng) {
    start();
    ConstraintSolver sampler(b.values, {limits().max_nodes, limits().cancel}, &rng);
    std::vector<Sample> out;
    for (const auto& p : sys_.preds) {
      if (!has_clause_for(p.name)) continue;
      std::vector<Sample> mine;
      int attempts = b.count * 8;
      for (int k = 0; k < attempts && static_cast<int>(mine.size()) < std::min(b.count, b.cap); ++k) {
        int h = std::uniform_int_distribution<int>(0, b.depth)(rng);
        bool rules_first = k % 2 == 1;
        auto node = sample_one(p, h, rules_first, sampler, rng);
        if (!node) continue;
        Sample s{p.name, node->args, Provenance::Derived, node->height()};
        if (std::find(mine.begin(), mine.end(), s) == mine.end()) mine.push_back(s);
      }
      out.insert(out.end(), mine.begin(), mine.end());
    }
    return out;
  }

  // Goal bodies matched against the given samples.
  std::optional<GoalWitness> goal_check(const std::vector<Sample>& samples, std::size_t max_combinations = 200000) {
    start();
    for (std::size_t g = 0; g < sys_.goals.size(); ++g) {
      const Clause& c = sys_.goals[g];
      std::vector<std::vector<const Sample*>> options;
      for (const auto& a : c.body) {
        std::vector<const Sample*> xs;
        for (const auto& s : samples)
          if (s.pred == a.pred && s.values.size() == a.args.size()) xs.push_back(&s);
        options.push_back(xs);
      }
      std::vector<std::size_t> idx(options.size(), 0);
      bool empty = std::any_of(options.begin(), options.end(), [](const auto& o) { return o.empty(); });
      std::size_t tried = 0;
      while (!empty && tried++ < max_combinations) {
        std::vector<Expr> cs = conjuncts(c.constraint);
        std::vector<Sample> chosen;
        for (std::size_t k = 0; k < options.size(); ++k) {
          const Sample* s = options[k][idx[k]];
          chosen.push_back(*s);
          for (std::size_t q = 0; q < s->values.size(); ++q) cs.push_back(eq(c.body[k].args[q], lit(s->values[q])));
        }
        solver_.reset_budget();
        if (auto env = solver_.first(cs, c.vars)) return GoalWitness{g, *env, chosen};
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == options[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    }
    return std::nullopt;
  }

private:
  struct Goal {
    PredAtom atom;
    int height;
    int node;
    bool expand = false;  // never use the ground shortcut
  };
  struct TreeNode {
    std::string pred;
    std::vector<Expr> args;
    std::size_t clause = 0;
    int suffix = -1;
    std::vector<int> children;
    std::optional<DerivationNode> ground;
  };
  struct State {
    std::vector<Expr> pending;
    Env env;
    ConstraintSolver::Defs defs;
    std::map<std::string, Sort> vars;
    std::vector<Goal> goals;
    std::vector<TreeNode> nodes;
  };
  struct Memo {
    int failed_at = -1;
    std::optional<DerivationNode> tree;
  };

  const Limits& limits() const { return lim_; }

  void start() {
    solver_.reset_budget();
    aborted_ = false;
  }

  bool has_clause_for(const std::string& p) const {
    for (const auto& c : sys_.definite)
      if (c.head->pred == p) return true;
    return false;
  }

  std::string renamed(const std::string& v, int k) const { return v + "#" + std::to_string(k); }

  // Adds clause c (fresh copy) to resolve goal g; false when the head cannot match.
  void unfold(State& s, const Goal& g, std::size_t ci) {
    const Clause& c = sys_.definite[ci];
    int k = ++fresh_;
    auto rn = [&](const std::string& v) { return renamed(v, k); };
    for (std::size_t q = 0; q < g.atom.args.size(); ++q)
      s.pending.push_back(eq(g.atom.args[q], rename_vars(c.head->args[q], rn)));
    for (const auto& x : conjuncts(c.constraint)) s.pending.push_back(rename_vars(x, rn));
    for (const auto& [n, srt] : c.vars) s.vars[rn(n)] = srt;
    TreeNode& node = s.nodes[static_cast<std::size_t>(g.node)];
    node.clause = ci;
    node.suffix = k;
    std::vector<int> kids;
    for (const auto& b : c.body) {
      PredAtom a{b.pred, {}};
      for (const auto& x : b.args) a.args.push_back(rename_vars(x, rn));
      int id = static_cast<int>(s.nodes.size());
      kids.push_back(id);
      s.nodes.push_back(TreeNode{a.pred, a.args, 0, -1, {}, std::nullopt});
      s.goals.push_back(Goal{a, g.height - 1, id, false});
    }
    s.nodes[static_cast<std::size_t>(g.node)].children = kids;
  }

  DerivationNode build(const State& s, int id, const Env& env) const {
    const TreeNode& t = s.nodes[static_cast<std::size_t>(id)];
    if (t.ground) return *t.ground;
    DerivationNode n;
    n.pred = t.pred;
    n.clause = t.clause;
    for (const auto& a : t.args) n.args.push_back(*eval_term(a, env));
    for (const auto& [v, srt] : sys_.definite[t.clause].vars) {
      auto it = env.find(renamed(v, t.suffix));
      if (it != env.end()) n.assignment[v] = it->second;
    }
    for (int c : t.children) n.children.push_back(build(s, c, env));
    return n;
  }

  // Depth-first resolution; on success fills `solution`.
  bool search(State s, std::optional<Env>& solution, State& final_state, ConstraintSolver& cs,
              std::mt19937_64* rng = nullptr, bool rules_first = false) {
    if (!cs.tick()) {
      aborted_ = true;
      return false;
    }
    if (!cs.propagate(s.pending, s.env, s.defs, s.vars)) return false;
    if (s.goals.empty()) {
      auto r = cs.enumerate(s.pending, s.vars, s.env, s.defs, [&](const Env& e) {
        solution = e;
        return true;
      });
      if (r == Outcome::Aborted) aborted_ = true;
      if (solution) final_state = std::move(s);
      return solution.has_value();
    }
    // most instantiated goal first
    std::size_t gi = 0;
    int best = -1;
    bool all_ground = false;
    for (std::size_t k = 0; k < s.goals.size(); ++k) {
      int bound = 0;
      for (const auto& a : s.goals[k].atom.args)
        if (ConstraintSolver::value(a, s.env, s.defs)) ++bound;
      if (bound > best) {
        best = bound;
        gi = k;
        all_ground = bound == static_cast<int>(s.goals[k].atom.args.size()) && !s.goals[k].expand;
      }
    }
    Goal g = s.goals[gi];
    s.goals.erase(s.goals.begin() + static_cast<std::ptrdiff_t>(gi));
    if (all_ground) {
      std::vector<Value> vals;
      for (const auto& a : g.atom.args) vals.push_back(*ConstraintSolver::value(a, s.env, s.defs));
      auto tree = derive_ground(g.atom.pred, vals, g.height);
      if (!tree) return false;
      s.nodes[static_cast<std::size_t>(g.node)].ground = std::move(*tree);
      return search(std::move(s), solution, final_state, cs, rng, rules_first);
    }
    std::vector<std::size_t> order;
    for (std::size_t ci = 0; ci < sys_.definite.size(); ++ci) {
      const Clause& c = sys_.definite[ci];
      if (c.head->pred != g.atom.pred) continue;
      if (!c.body.empty() && g.height <= 0) continue;
      order.push_back(ci);
    }
    if (rng) {
      std::shuffle(order.begin(), order.end(), *rng);
      if (rules_first)
        std::stable_partition(order.begin(), order.end(), [&](std::size_t ci) { return !sys_.definite[ci].body.empty(); });
    }
    for (std::size_t ci : order) {
      State s2 = s;
      unfold(s2, g, ci);
      if (search(std::move(s2), solution, final_state, cs, rng, rules_first)) return true;
      if (aborted_) return false;
    }
    return false;
  }

  std::optional<DerivationNode> derive_ground(const std::string& pred, const std::vector<Value>& args, int height) {
    auto key = std::make_pair(pred, args);
    auto& m = memo_[key];
    if (m.tree && m.tree->height() <= height) return m.tree;
    if (m.failed_at >= height) return std::nullopt;
    State s;
    PredAtom a{pred, {}};
    for (const auto& v : args) a.args.push_back(lit(v));
    s.nodes.push_back(TreeNode{pred, a.args, 0, -1, {}, std::nullopt});
    s.goals.push_back(Goal{a, height, 0, true});
    std::optional<Env> sol;
    State fin;
    bool ok = search(std::move(s), sol, fin, solver_);
    auto& m2 = memo_[key];  // search may have rehashed
    if (ok) {
      m2.tree = build(fin, 0, *sol);
      return m2.tree;
    }
    if (!aborted_) m2.failed_at = std::max(m2.failed_at, height);
    return std::nullopt;
  }

  std::optional<Refutation> refute_goal(std::size_t gi, int height) {
    const Clause& c = sys_.goals[gi];
    State s;
    int k = ++fresh_;
    auto rn = [&](const std::string& v) { return renamed(v, k); };
    for (const auto& x : conjuncts(c.constraint)) s.pending.push_back(rename_vars(x, rn));
    for (const auto& [n, srt] : c.vars) s.vars[rn(n)] = srt;
    for (const auto& b : c.body) {
      PredAtom a{b.pred, {}};
      for (const auto& x : b.args) a.args.push_back(rename_vars(x, rn));
      int id = static_cast<int>(s.nodes.size());
      s.nodes.push_back(TreeNode{a.pred, a.args, 0, -1, {}, std::nullopt});
      s.goals.push_back(Goal{a, height, id, false});
    }
    std::size_t n_atoms = c.body.size();
    std::optional<Env> sol;
    State fin;
    if (!search(std::move(s), sol, fin, solver_)) return std::nullopt;
    Refutation r;
    r.goal = gi;
    for (const auto& [n, srt] : c.vars) r.assignment[n] = sol->at(rn(n));
    for (std::size_t q = 0; q < n_atoms; ++q) r.premises.push_back(build(fin, static_cast<int>(q), *sol));
    return r;
  }

  std::optional<DerivationNode> sample_one(const PredDecl& p, int height, bool rules_first, ConstraintSolver& cs,
                                           std::mt19937_64& rng) {
    State s;
    PredAtom a{p.name, {}};
    for (std::size_t q = 0; q < p.params.size(); ++q) {
      std::string n = "_s" + std::to_string(q);
      a.args.push_back(var(n, p.params[q]));
      s.vars[n] = p.params[q];
    }
    s.nodes.push_back(TreeNode{p.name, a.args, 0, -1, {}, std::nullopt});
    s.goals.push_back(Goal{a, height, 0, true});
    std::optional<Env> sol;
    State fin;
    cs.reset_budget();
    bool was = aborted_;
    // bounded per attempt so that one unlucky branch does not starve the rest
    ConstraintSolver local(cs.domain(), {20000, lim_.cancel}, &rng);
    bool ok = search(std::move(s), sol, fin, local, &rng, rules_first);
    aborted_ = was;
    if (!ok) return std::nullopt;
    return build(fin, 0, *sol);
  }

  const ChcSystem& sys_;
  ConstraintSolver solver_;
  Limits lim_;
  std::map<std::pair<std::string, std::vector<Value>>, Memo> memo_;
  int fresh_ = 0;
  bool aborted_ = false;
};

inline std::vector<Sample> collect_samples(const ChcSystem& s, const SampleBudget& b, std::mt19937_64& rng) {
  return Engine(s).collect_samples(b, rng);
}

inline bool derivable(const ChcSystem& s, const Sample& atom, int depth) { return Engine(s).derivable(atom, depth); }

inline std::optional<GoalWitness> bounded_goal_check(const ChcSystem& s, const std::vector<Sample>& samples) {
  return Engine(s).goal_check(samples);
}

}  // namespace stp::chc
