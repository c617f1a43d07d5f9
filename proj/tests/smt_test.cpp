#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stp/chc/smtlib.hpp"
#include "stp/smt/backend.hpp"
#include "stp/solver/solve.hpp"

using namespace stp;
using namespace stp::chc;
using smt::ValidityResult;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(STP_BENCH_DIR) + "/" + rel);
  if (!in) throw std::runtime_error("missing benchmark " + rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Value L(std::vector<std::int64_t> xs) { return Value::list(std::move(xs)); }
Expr LV(const std::string& n) { return var(n, Sort::List); }

// a shell script standing in for a solver; it records its stdin next to itself
class FakeSolver {
public:
  FakeSolver(const std::string& name, const std::string& body) {
    dir_ = fs::temp_directory_path() / ("stp_fake_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    path_ = dir_ / (name + ".sh");
    std::ofstream out(path_);
    out << "#!/bin/sh\ncat > '" << input_path().string() << "'\n" << body << "\n";
    out.close();
    fs::permissions(path_, fs::perms::owner_all);
  }
  std::string command() const { return path_.string(); }
  fs::path input_path() const { return fs::path(path_.string() + ".in"); }
  std::string input() const {
    std::ifstream in(input_path());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

private:
  fs::path dir_, path_;
};

smt::ExternalConfig ext(const std::string& cmd, int ms = 5000) {
  smt::ExternalConfig c;
  c.command = cmd;
  c.timeout = std::chrono::milliseconds(ms);
  return c;
}

// l1 = l2: invalid, e.g. l1 = [1], l2 = []
Expr invalid_formula() { return eq(LV("l1"), LV("l2")); }

}  // namespace

TEST(Bounded, Examples) {
  smt::BoundedProvider b;
  // l2 = rev(ε)·l2
  auto r = b.check(eq(LV("l2"), concat(rev(nil()), LV("l2"))));
  EXPECT_EQ(r.kind, ValidityResult::Kind::ValidBounded);
  EXPECT_EQ(r.bounds.max_len, 4);

  // reva recursive clause under Reva ≡ l3 = l1·l2
  auto s = parse_smtlib(slurp("reva.smt2"));
  auto wrong = [](const PredAtom& a) { return eq(a.args[2], concat(a.args[0], a.args[1])); };
  auto cex = b.check(solver::clause_query(s.definite[1], wrong));
  ASSERT_EQ(cex.kind, ValidityResult::Kind::Invalid);
  EXPECT_EQ(eval_formula(solver::clause_query(s.definite[1], wrong), cex.assignment), Tri::False);

  // the goal under the right model
  auto right = [](const PredAtom& a) { return eq(a.args[2], concat(rev(a.args[0]), a.args[1])); };
  EXPECT_TRUE(b.check(solver::clause_query(s.goals[0], right)).is_valid());
  EXPECT_TRUE(b.check(solver::clause_query(s.definite[1], right)).is_valid());
}

TEST(Bounded, PredicatesAreRefused) {
  smt::BoundedProvider b;
  EXPECT_EQ(b.check(pred("P", {LV("l")})).kind, ValidityResult::Kind::Unknown);
}

TEST(Bounded, CounterexampleIsTotal) {
  smt::BoundedProvider b;
  auto f = implies(is_cons(LV("a")), eq(LV("a"), LV("b")));
  auto r = b.check(f);
  ASSERT_EQ(r.kind, ValidityResult::Kind::Invalid);
  EXPECT_TRUE(r.assignment.count("a"));
  EXPECT_TRUE(r.assignment.count("b"));
  EXPECT_EQ(eval_formula(f, r.assignment), Tri::False);
}

TEST(Bounded, BudgetExhaustionIsUnknown) {
  smt::BoundedProvider b({4, 2}, 50);
  auto f = implies(and_(is_cons(LV("a")), is_cons(LV("b"))),
                   ne(concat(LV("a"), LV("b")), concat(LV("c"), list_lit({7}))));
  EXPECT_EQ(b.check(f).kind, ValidityResult::Kind::Unknown);
}

TEST(Encoding, RecursiveReverse) {
  auto q = smt::encode_query(eq(LV("l3"), concat(rev(LV("l1")), LV("l2"))), false);
  EXPECT_NE(q.find("(define-fun-rec stp_rev"), std::string::npos) << q;
  EXPECT_NE(q.find("(declare-const l1 (Seq Int))"), std::string::npos) << q;
  EXPECT_NE(q.find("(assert (not (= l3 (seq.++ (stp_rev l1) l2))))"), std::string::npos) << q;
  EXPECT_NE(q.find("(check-sat)"), std::string::npos);
  EXPECT_NE(q.find("(get-model)"), std::string::npos);

  auto n = smt::encode_query(eq(LV("l3"), rev(LV("l1"))), true);
  EXPECT_EQ(n.find("define-fun-rec"), std::string::npos);
  EXPECT_NE(n.find("seq.rev"), std::string::npos) << n;
}

TEST(External, UnsatMeansValid) {
  FakeSolver f("unsat", "echo unsat");
  smt::ExternalProvider p(ext(f.command()));
  auto r = p.check(eq(LV("l"), LV("l")));
  EXPECT_EQ(r.kind, ValidityResult::Kind::Valid);
  EXPECT_NE(f.input().find("(check-sat)"), std::string::npos);
}

TEST(External, ModelIsDecodedAndChecked) {
  FakeSolver f("model",
               "echo sat\n"
               "echo '(model (define-fun l1 () (Seq Int) (seq.++ (seq.unit 1) (seq.unit (- 2))))'\n"
               "echo '  (define-fun l2 () (Seq Int) (as seq.empty (Seq Int))))'");
  smt::ExternalProvider p(ext(f.command()));
  auto r = p.check(invalid_formula());
  ASSERT_EQ(r.kind, ValidityResult::Kind::Invalid) << r.reason;
  EXPECT_EQ(r.assignment.at("l1"), L({1, -2}));
  EXPECT_EQ(r.assignment.at("l2"), L({}));
}

TEST(External, BogusModelIsNotTrusted) {
  FakeSolver f("bogus",
               "echo sat\n"
               "echo '((define-fun l1 () (Seq Int) (seq.unit 1)) (define-fun l2 () (Seq Int) (seq.unit 1)))'");
  smt::ExternalProvider p(ext(f.command()));
  auto r = p.check(invalid_formula());
  EXPECT_EQ(r.kind, ValidityResult::Kind::Unknown);
  EXPECT_NE(r.reason.find("does not falsify"), std::string::npos) << r.reason;
}

TEST(External, SymbolicModelRejected) {
  FakeSolver f("symbolic", "echo sat\necho '((define-fun l1 () (Seq Int) (seq.++ l2 l2)))'");
  smt::ExternalProvider p(ext(f.command()));
  auto r = p.check(invalid_formula());
  EXPECT_EQ(r.kind, ValidityResult::Kind::Unknown);
}

TEST(External, GarbageIsUnknown) {
  FakeSolver f("garbage", "echo '(error \"line 1: unknown logic\")'");
  smt::ExternalProvider p(ext(f.command()));
  EXPECT_EQ(p.check(invalid_formula()).kind, ValidityResult::Kind::Unknown);
  FakeSolver u("unknown", "echo unknown");
  EXPECT_EQ(smt::ExternalProvider(ext(u.command())).check(invalid_formula()).kind, ValidityResult::Kind::Unknown);
}

TEST(External, MissingCommandIsUnknown) {
  smt::ExternalProvider p(ext("/nonexistent/stp-solver --flag"));
  EXPECT_EQ(p.check(invalid_formula()).kind, ValidityResult::Kind::Unknown);
}

TEST(External, TimeoutKillsSolver) {
  FakeSolver f("slow", "sleep 30\necho unsat");
  smt::ExternalProvider p(ext(f.command(), 300));
  auto t0 = std::chrono::steady_clock::now();
  auto r = p.check(invalid_formula());
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(r.kind, ValidityResult::Kind::Unknown);
  EXPECT_NE(r.reason.find("timed out"), std::string::npos) << r.reason;
  EXPECT_LT(secs, 5.0);
}

TEST(External, CollectionsStayLocal) {
  FakeSolver f("never", "echo unsat");
  smt::ExternalProvider p(ext(f.command()));
  auto g = eq(coll_of(LV("a"), Mode::Multiset), coll_of(LV("b"), Mode::Multiset));
  EXPECT_EQ(p.check(g).kind, ValidityResult::Kind::Unknown);
}

TEST(Backend, FallsBackToBounded) {
  FakeSolver f("confused", "echo unknown");
  smt::Backend b({3, 1}, ext(f.command()));
  EXPECT_TRUE(b.has_external());
  EXPECT_EQ(b.check(eq(LV("l"), LV("l"))).kind, ValidityResult::Kind::ValidBounded);
  EXPECT_EQ(b.check(invalid_formula()).kind, ValidityResult::Kind::Invalid);

  FakeSolver g("sure", "echo unsat");
  smt::Backend e({3, 1}, ext(g.command()));
  EXPECT_EQ(e.check(eq(LV("l"), LV("l"))).kind, ValidityResult::Kind::Valid);
  EXPECT_FALSE(smt::Backend().has_external());
}

TEST(ExternalSolve, RevaWithExactBackend) {
  // a solver that proves everything: the verdict is sat without the bounded label
  FakeSolver f("prover", "echo unsat");
  auto s = parse_smtlib(slurp("reva.smt2"));
  solver::SolverConfig cfg;
  cfg.smt = ext(f.command());
  auto v = solver::solve_list_mode(s, cfg);
  ASSERT_EQ(v.kind, solver::Verdict::Kind::Sat) << v.reason;
  EXPECT_FALSE(v.bounded);
  EXPECT_STREQ(solver::verdict_name(v), "sat");
}

TEST(IntChc, ExternalModelIsUsed) {
  FakeSolver f("hoice",
               "echo sat\n"
               "echo '(model'\n"
               "echo '  (define-fun Take ((n Int) (l Int) (r Int)) Bool (and (>= n 0) (= r (ite (<= n l) n l))))'\n"
               "echo '  (define-fun Drop ((n Int) (l Int) (r Int)) Bool (= r (ite (<= n l) (- l n) 0)))'\n"
               "echo '  (define-fun Append ((a Int) (b Int) (c Int)) Bool (= c (+ a b))))'");
  auto s = parse_smtlib(slurp("takedrop.smt2"));
  auto abs = solver::length_abstract(s);
  std::string why;
  auto m = solver::external_int_model(abs, ext(f.command()), why);
  ASSERT_TRUE(m) << why;
  EXPECT_EQ(render(m->at("Append")), "(= #2 (+ #0 #1))");
  EXPECT_NE(f.input().find("(declare-fun Take (Int Int Int) Bool)"), std::string::npos);

  solver::SolverConfig cfg;
  cfg.int_chc = ext(f.command());
  auto v = solver::solve_list_len_mode(s, cfg);
  ASSERT_EQ(v.kind, solver::Verdict::Kind::Sat) << v.reason;

  FakeSolver bad("hoice_bad", "echo unsat");
  EXPECT_FALSE(solver::external_int_model(abs, ext(bad.command()), why));
}
