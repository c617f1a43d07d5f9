#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "stp/chc/smtlib.hpp"
#include "stp/collection.hpp"
#include "stp/solver/solve.hpp"
#include "test_util.hpp"

using namespace stp;
using namespace stp::chc;
using solver::CheckOutcome;
using solver::Verdict;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(STP_BENCH_DIR) + "/" + rel);
  if (!in) throw std::runtime_error("missing benchmark " + rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ChcSystem bench(const std::string& rel) { return parse_smtlib(slurp(rel)); }

Value L(std::vector<std::int64_t> xs) { return Value::list(std::move(xs)); }
Value I(std::int64_t v) { return Value::integer(v); }
Expr LV(const std::string& n) { return var(n, Sort::List); }

const char* kPrelude =
    "(set-logic HORN)\n"
    "(declare-datatypes ((List 0)) (((nil) (cons (head Int) (tail List)))))\n";

std::vector<Expr> list_args(std::size_t n) {
  std::vector<Expr> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(LV("a" + std::to_string(k)));
  return out;
}

Env env_of(const SequenceTuple& v) {
  Env e;
  for (std::size_t k = 0; k < v.size(); ++k) e["a" + std::to_string(k)] = Value::list(v[k]);
  return e;
}

// f <=> g on every assignment within the bounds
bool equivalent_within(const Expr& f, const Expr& g, smt::Bounds b) {
  smt::BoundedProvider p(b);
  return p.check(implies(f, g)).is_valid() && p.check(implies(g, f)).is_valid();
}

Expr reva_expected() { return eq(LV("x3"), concat(rev(LV("x1")), LV("x2"))); }

Expr model_formula(const solver::CandidateModel& m, const ChcSystem& s, const std::string& p) {
  for (const auto& d : s.preds)
    if (d.name == p) {
      std::vector<Expr> args;
      for (std::size_t k = 0; k < d.params.size(); ++k) args.push_back(var("x" + std::to_string(k + 1), d.params[k]));
      return m.apply({p, args});
    }
  throw std::runtime_error("no predicate " + p);
}

solver::CandidateModel single(const std::string& p, std::vector<Sort> params, const TuplePattern& t) {
  solver::PredModel pm;
  pm.params = std::move(params);
  for (std::size_t k = 0; k < pm.params.size(); ++k) pm.positions.push_back(k);
  pm.patterns = {t};
  solver::CandidateModel m;
  m.preds[p] = pm;
  return m;
}

// a Sat verdict must survive both checks at a larger bound
void expect_replays(const Verdict& v, const ChcSystem& s) {
  smt::Backend b(smt::Bounds{5, 2});
  EXPECT_NE(solver::check_definite(v.model, s, b).kind, CheckOutcome::Kind::Cex);
  EXPECT_NE(solver::check_goal(v.model, s, b).kind, CheckOutcome::Kind::Cex);
}

}  // namespace

// ---- pattern_to_formula ------------------------------------------------------

TEST(PatternFormula, AgreesWithMemberOnRandomPatterns) {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    auto t = stp::testing::random_solvable(rng, 3, 10, RuleSet::all());
    auto f = solver::pattern_to_formula(t, list_args(t.arity()));
    for (int q = 0; q < 20; ++q) {
      auto v = q % 2 ? stp::testing::random_tuple(rng, t.arity(), 4) : stp::testing::random_member(rng, t, 2);
      Tri r = eval_formula(f, env_of(v));
      ASSERT_NE(r, Tri::Unknown);
      ASSERT_EQ(r == Tri::True, member(v, t, RuleSet::all())) << render(t) << "\n" << render(f);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 6000);
}

TEST(PatternFormula, AgreesWithMultisetMembership) {
  std::mt19937_64 rng(12);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    auto seq = stp::testing::random_solvable(rng, 3, 8, RuleSet{}, true);
    TuplePattern t(seq.elements(), Mode::Multiset);
    if (t.has_reverse() || !is_solvable(t)) continue;
    std::vector<Expr> args;
    for (const auto& a : list_args(t.arity())) args.push_back(coll_of(a, Mode::Multiset));
    auto f = solver::pattern_to_formula(t, args);
    for (int q = 0; q < 20; ++q) {
      auto v = q % 2 ? stp::testing::random_tuple(rng, t.arity(), 4) : stp::testing::random_member(rng, seq, 2);
      ASSERT_EQ(eval_formula(f, env_of(v)) == Tri::True, collection_member(v, t)) << render(t);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(PatternFormula, Examples) {
  auto args = list_args(3);
  // (z1 z2, z1): prefix test plus reconstruction
  auto f = solver::pattern_to_formula(parse_pattern("(z1 z2, z1)"), {args[0], args[1]});
  EXPECT_EQ(render(f), "(and (prefixof a1 a0) (= a0 (append a1 (ldiff a1 a0))))");
  EXPECT_EQ(eval_formula(f, {{"a0", L({1, 2})}, {"a1", L({1})}}), Tri::True);
  EXPECT_EQ(eval_formula(f, {{"a0", L({1, 2})}, {"a1", L({2})}}), Tri::False);

  auto g = solver::pattern_to_formula(parse_pattern("(x, y, x^R y)"), args);
  EXPECT_EQ(render(g), "(= a2 (append (reverse a0) a1))");

  EXPECT_TRUE(is_true(solver::pattern_to_formula(parse_pattern("(x1, x2, x3)"), args)));
  EXPECT_THROW(solver::pattern_to_formula(parse_pattern("(x x)"), {args[0]}), PatternError);
}

// ---- clause checks -----------------------------------------------------------

TEST(CheckDefinite, RevaWrongAndRightModels) {
  auto s = bench("reva.smt2");
  smt::Backend b;
  // Reva ≡ l1 = ε ∧ l2 = l3
  TuplePattern eps_model = TuplePattern::raw({{}, {Atom::var(0)}, {Atom::var(0)}});
  auto bad = solver::check_definite(single("Reva", {Sort::List, Sort::List, Sort::List}, eps_model), s, b);
  ASSERT_EQ(bad.kind, CheckOutcome::Kind::Cex);
  EXPECT_EQ(bad.clause, 1u);
  // the assignment really falsifies the clause under the model
  auto m = single("Reva", {Sort::List, Sort::List, Sort::List}, eps_model);
  auto q = solver::clause_query(s.definite[1], [&](const PredAtom& a) { return m.apply(a); });
  EXPECT_EQ(eval_formula(q, bad.assignment), Tri::False);

  auto good = single("Reva", {Sort::List, Sort::List, Sort::List}, parse_pattern("(x, y, x^R y)"));
  EXPECT_EQ(solver::check_definite(good, s, b).kind, CheckOutcome::Kind::Valid);
  EXPECT_EQ(solver::check_goal(good, s, b).kind, CheckOutcome::Kind::Valid);

  ChcSystem empty;
  EXPECT_EQ(solver::check_definite(good, empty, b).kind, CheckOutcome::Kind::Valid);
  EXPECT_EQ(solver::check_goal(good, empty, b).kind, CheckOutcome::Kind::Valid);
}

TEST(CheckGoal, TakeDropPatternsAloneAreTooWeak) {
  auto s = bench("takedrop.smt2");
  solver::SolverConfig cfg;
  std::mt19937_64 rng(0);
  auto samples = Engine(s).collect_samples(cfg.sampling, rng);
  auto m = solver::build_model(s, samples, Mode::Sequence, cfg.infer(), nullptr);
  smt::Backend b;
  EXPECT_EQ(solver::check_goal(m, s, b).kind, CheckOutcome::Kind::Cex);
}

// ---- length abstraction ------------------------------------------------------

TEST(LengthAbstraction, TakeShape) {
  auto s = bench("takedrop.smt2");
  auto a = solver::length_abstract(s);
  ASSERT_EQ(a.preds.size(), 3u);
  for (const auto& d : a.preds)
    for (auto p : d.params) EXPECT_EQ(p, Sort::Int);
  for (const auto& c : a.all_clauses())
    for (const auto& [n, srt] : c.vars) EXPECT_EQ(srt, Sort::Int) << n;
  EXPECT_EQ(a.definite.size(), s.definite.size());
  EXPECT_EQ(a.goals.size(), 1u);
  // Take'(n, l, r): r = min(n, l) for n, l >= 0
  Engine e(a, Domain{0, 0, 0, -1, 8});
  EXPECT_TRUE(e.derivable({"Take", {I(0), I(3), I(0)}}, 1));
  EXPECT_TRUE(e.derivable({"Take", {I(2), I(1), I(1)}}, 3));
  EXPECT_TRUE(e.derivable({"Take", {I(2), I(5), I(2)}}, 3));
  EXPECT_FALSE(e.derivable({"Take", {I(2), I(5), I(3)}}, 4));
  // the recursive Take clause keeps its guard and successor lengths
  auto txt = render(a.definite[2]);
  EXPECT_NE(txt.find("(> n 0)"), std::string::npos) << txt;
  EXPECT_NE(txt.find("(+ 1 l)"), std::string::npos) << txt;
  EXPECT_NE(txt.find("(+ 1 r)"), std::string::npos) << txt;
  // the goal keeps its disequality as an integer one
  EXPECT_NE(render(a.goals[0]).find("distinct"), std::string::npos);
}

TEST(LengthAbstraction, DefiniteDisequalityDropped) {
  auto s = parse_smtlib(std::string(kPrelude) +
                        "(declare-fun P (List List) Bool)\n"
                        "(assert (forall ((l List) (m List)) (=> (distinct l m) (P l m))))\n");
  auto a = solver::length_abstract(s);
  ASSERT_EQ(a.definite.size(), 1u);
  auto txt = render(a.definite[0].constraint);
  EXPECT_EQ(txt.find("distinct"), std::string::npos) << txt;
  // equal lengths are now allowed
  EXPECT_TRUE(Engine(a).derivable({"P", {I(2), I(2)}}, 0));
}

TEST(LengthAbstraction, PureIntegerClauseUnchanged) {
  auto s = bench("unsat/plus.smt2");
  auto a = solver::length_abstract(s);
  ASSERT_EQ(a.definite.size(), s.definite.size());
  for (std::size_t k = 0; k < s.definite.size(); ++k) EXPECT_EQ(render(a.definite[k]), render(s.definite[k]));
}

TEST(LengthAbstraction, DerivedSamplesStayDerivable) {
  for (const char* f : {"takedrop.smt2", "reva.smt2", "sort.smt2"}) {
    auto s = bench(f);
    auto a = solver::length_abstract(s);
    Engine abs(a, Domain{0, 0, 0, -1, 8});
    std::mt19937_64 rng(3);
    auto samples = Engine(s).collect_samples({3, 12, 24, Domain{3, 0, 2, 0, 3}}, rng);
    ASSERT_FALSE(samples.empty()) << f;
    for (const auto& x : samples) {
      Sample y{x.pred, {}};
      for (const auto& v : x.values)
        y.values.push_back(v.sort == Sort::List ? I(static_cast<std::int64_t>(v.seq.size())) : v);
      EXPECT_TRUE(abs.derivable(y, x.depth + 2)) << f << " " << render(y);
    }
  }
}

TEST(IntFit, TakeDropShapes) {
  auto a = solver::length_abstract(bench("takedrop.smt2"));
  std::string why;
  auto m = solver::fit_int_model(a, 0, why);
  ASSERT_TRUE(m) << why;
  // Append: lengths add up
  Env e{{"#0", I(2)}, {"#1", I(3)}, {"#2", I(5)}};
  EXPECT_EQ(eval_formula(m->at("Append"), e), Tri::True);
  e["#2"] = I(4);
  EXPECT_EQ(eval_formula(m->at("Append"), e), Tri::False);
  // Take: min(n, l)
  EXPECT_EQ(eval_formula(m->at("Take"), {{"#0", I(3)}, {"#1", I(1)}, {"#2", I(1)}}), Tri::True);
  EXPECT_EQ(eval_formula(m->at("Take"), {{"#0", I(1)}, {"#1", I(3)}, {"#2", I(1)}}), Tri::True);
  EXPECT_EQ(eval_formula(m->at("Take"), {{"#0", I(1)}, {"#1", I(3)}, {"#2", I(3)}}), Tri::False);
}

// ---- solve loop --------------------------------------------------------------

TEST(SolveList, Reva) {
  auto s = bench("reva.smt2");
  auto v = solver::solve_list_mode(s);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat) << v.reason;
  EXPECT_TRUE(equivalent_within(model_formula(v.model, s, "Reva"), reva_expected(), {4, 2}));
  expect_replays(v, s);
}

TEST(SolveList, FactOnlySystem) {
  auto s = parse_smtlib(std::string(kPrelude) +
                        "(declare-fun P (List) Bool)\n"
                        "(assert (P nil))\n"
                        "(assert (forall ((l List)) (=> (and (P l) (distinct l nil)) false)))\n");
  auto v = solver::solve_list_mode(s);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat) << v.reason;
  EXPECT_TRUE(equivalent_within(model_formula(v.model, s, "P"), eq(LV("x1"), nil()), {4, 2}));
}

TEST(SolveList, TakeDropNeedsLengths) {
  auto v = solver::solve_list_mode(bench("takedrop.smt2"));
  EXPECT_EQ(v.kind, Verdict::Kind::Unknown);
  EXPECT_NE(v.reason.find("goal"), std::string::npos) << v.reason;
}

TEST(SolveList, SpuriousCounterexampleRejected) {
  auto s = bench("reva.smt2");
  solver::SolverConfig cfg;
  Sample bad{"Reva", {L({0, 1, 2}), L({}), L({1, 2, 0})}, Provenance::Counterexample};
  cfg.injected = {bad};
  auto v = solver::solve_list_mode(s, cfg);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat) << v.reason;
  ASSERT_EQ(v.stats.rejected.size(), 1u);
  EXPECT_EQ(v.stats.rejected[0], bad);
  EXPECT_TRUE(equivalent_within(model_formula(v.model, s, "Reva"), reva_expected(), {4, 2}));
}

TEST(SolveListLen, TakeDrop) {
  auto s = bench("takedrop.smt2");
  auto v = solver::solve_list_len_mode(s);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat) << v.reason;
  EXPECT_TRUE(v.bounded);
  expect_replays(v, s);
}

TEST(SolveListLen, RevaStillSolved) {
  auto s = bench("reva.smt2");
  auto v = solver::solve_list_len_mode(s);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat) << v.reason;
  EXPECT_TRUE(equivalent_within(model_formula(v.model, s, "Reva"), reva_expected(), {3, 2}));
}

TEST(SolveListLen, NoIntegerModel) {
  // P(n) for every n >= 0 but the goal forbids n = 3: the abstract system is unsat
  auto s = parse_smtlib(std::string(kPrelude) +
                        "(declare-fun P (Int) Bool)\n"
                        "(assert (P 0))\n"
                        "(assert (forall ((n Int)) (=> (and (>= n 0) (P n)) (P (+ n 1)))))\n"
                        "(assert (forall ((n Int)) (=> (and (P n) (= n 3)) false)))\n");
  auto v = solver::solve_list_len_mode(s);
  EXPECT_EQ(v.kind, Verdict::Kind::Unknown);
}

TEST(SolveCollection, SortMultiset) {
  auto s = bench("sort.smt2");
  auto v = solver::solve_collection_mode(s, Mode::Multiset);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat) << v.reason;
  auto sort_model = model_formula(v.model, s, "Sort");
  auto expected = eq(coll_of(LV("x1"), Mode::Multiset), coll_of(LV("x2"), Mode::Multiset));
  EXPECT_TRUE(equivalent_within(sort_model, expected, {4, 2}));
  // Insert carries (x, y, xy)
  const auto& ins = v.model.preds.at("Insert");
  ASSERT_EQ(ins.patterns.size(), 1u);
  TuplePattern expect(std::vector<PatternString>{{Atom::var(0)}, {Atom::var(1)}, {Atom::var(0), Atom::var(1)}},
                      Mode::Multiset);
  EXPECT_TRUE(equivalent(ins.patterns[0], expect)) << render(ins.patterns[0]);
  expect_replays(v, s);
}

TEST(SolveCollection, ListEqualityGoalIsTooFine) {
  auto v = solver::solve_collection_mode(bench("reva.smt2"), Mode::Multiset);
  EXPECT_EQ(v.kind, Verdict::Kind::Unknown);
  EXPECT_THROW(solver::solve_collection_mode(bench("reva.smt2"), Mode::Sequence), PatternError);
}

// ---- refutation and auto -----------------------------------------------------

TEST(Refute, Examples) {
  auto r = solver::refute(bench("unsat/fact.smt2"), 2);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->premises.size(), 1u);
  EXPECT_TRUE(replay(bench("unsat/fact.smt2"), *r));

  EXPECT_FALSE(solver::refute(bench("reva.smt2"), 5, 300000));

  // x + y = z never falls below y
  auto plus = parse_smtlib(
      "(set-logic HORN)\n(declare-fun Plus (Int Int Int) Bool)\n"
      "(assert (forall ((y Int)) (Plus 0 y y)))\n"
      "(assert (forall ((x Int) (y Int) (z Int)) (=> (and (>= x 0) (Plus x y z)) (Plus (+ x 1) y (+ z 1)))))\n"
      "(assert (forall ((x Int) (y Int) (z Int)) (=> (and (Plus x y z) (< z y)) false)))\n");
  EXPECT_FALSE(solver::refute(plus, 4, 300000));
}

TEST(SolveAuto, Benchmarks) {
  struct Case {
    const char* file;
    solver::SolveMode mode;
  };
  for (auto c : {Case{"reva.smt2", solver::SolveMode::List}, Case{"takedrop.smt2", solver::SolveMode::ListLen},
                 Case{"sort.smt2", solver::SolveMode::Multiset}}) {
    auto s = bench(c.file);
    auto v = solver::solve_auto(s);
    ASSERT_EQ(v.kind, Verdict::Kind::Sat) << c.file << ": " << v.reason;
    ASSERT_TRUE(v.mode);
    EXPECT_EQ(*v.mode, c.mode) << c.file;
    EXPECT_FALSE(v.refutation);
  }
}

TEST(SolveAuto, UnsatSuite) {
  for (const char* f : {"unsat/fact.smt2", "unsat/reva_neq.smt2", "unsat/plus.smt2", "unsat/append.smt2", "unsat/take.smt2"}) {
    auto s = bench(f);
    auto v = solver::solve_auto(s);
    ASSERT_EQ(v.kind, Verdict::Kind::Unsat) << f << ": " << v.reason;
    ASSERT_TRUE(v.refutation);
    EXPECT_TRUE(replay(s, *v.refutation)) << f;
  }
}

TEST(SolveAuto, Cancellation) {
  std::atomic<bool> stop{true};
  solver::SolverConfig cfg;
  cfg.cancel = &stop;
  auto v = solver::solve_auto(bench("takedrop.smt2"), cfg);
  EXPECT_EQ(v.kind, Verdict::Kind::Unknown);
}

TEST(Render, ModelLines) {
  auto s = bench("reva.smt2");
  auto m = single("Reva", {Sort::List, Sort::List, Sort::List}, parse_pattern("(x, y, x^R y)"));
  EXPECT_EQ(solver::render(m, s), "Reva(x1, x2, x3) := (= x3 (append (reverse x1) x2))\n");
  auto def = solver::render_smtlib(m, s);
  EXPECT_NE(def.find("(define-fun Reva ((x1 List) (x2 List) (x3 List)) Bool"), std::string::npos) << def;
}
