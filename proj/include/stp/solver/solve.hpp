#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "stp/collection.hpp"
#include "stp/inference.hpp"
#include "stp/solver/length.hpp"

namespace stp::solver {

using chc::ChcSystem;
using chc::Sample;

enum class SolveMode { List, Set, Multiset, ListLen };

inline const char* mode_name(SolveMode m) {
  switch (m) {
    case SolveMode::List: return "list";
    case SolveMode::Set: return "set";
    case SolveMode::Multiset: return "multiset";
    case SolveMode::ListLen: return "list-len";
  }
  return "?";
}

struct SolverConfig {
  smt::Bounds bounds{4, 2};  // bounded validity checker
  std::optional<smt::ExternalConfig> smt;  // external sequence solver
  std::optional<smt::ExternalConfig> int_chc;  // external integer CHC solver
  std::uint64_t seed = 0;
  int max_iterations = 50;  // per mode
  chc::SampleBudget sampling{};
  int derive_depth = 8;  // for vetting counterexample samples
  bool accumulate = false;  // keep every inferred pattern (disjunction)
  bool enable_constants = false;
  bool enable_postfix = true;
  bool enable_reverse = true;
  int refute_depth = 6;
  std::uint64_t refute_nodes = 3'000'000;
  chc::Domain refute_domain = chc::Domain::bounded(3, 2);
  std::vector<Sample> injected;  // extra candidate samples, vetted like counterexamples
  const std::atomic<bool>* cancel = nullptr;

  InferConfig infer() const {
    InferConfig c;
    c.enable_constants = enable_constants;
    c.enable_postfix = enable_postfix;
    c.enable_reverse = enable_reverse;
    return c;
  }
};

struct CheckOutcome {
  enum class Kind { Valid, Cex, Unknown };
  Kind kind = Kind::Valid;
  bool bounded = false;  // some query only held within bounds
  std::size_t clause = 0;
  chc::Env assignment;
  std::string reason;
};

namespace detail {

inline CheckOutcome check_clauses(const CandidateModel& m, const std::vector<chc::Clause>& cs,
                                  const smt::Backend& backend) {
  CheckOutcome out;
  auto interp = [&](const chc::PredAtom& a) { return m.apply(a); };
  for (std::size_t k = 0; k < cs.size(); ++k) {
    auto r = backend.check(clause_query(cs[k], interp));
    switch (r.kind) {
      case smt::ValidityResult::Kind::Valid: break;
      case smt::ValidityResult::Kind::ValidBounded: out.bounded = true; break;
      case smt::ValidityResult::Kind::Invalid:
        return {CheckOutcome::Kind::Cex, out.bounded, k, std::move(r.assignment), {}};
      case smt::ValidityResult::Kind::Unknown:
        return {CheckOutcome::Kind::Unknown, out.bounded, k, {}, std::move(r.reason)};
    }
  }
  return out;
}

}  // namespace detail

// Every definite clause under the candidate model; Cex names the clause.
inline CheckOutcome check_definite(const CandidateModel& m, const ChcSystem& s, const smt::Backend& backend) {
  return detail::check_clauses(m, s.definite, backend);
}

// Every goal clause under the candidate model; Valid means the model implies the goals.
inline CheckOutcome check_goal(const CandidateModel& m, const ChcSystem& s, const smt::Backend& backend) {
  return detail::check_clauses(m, s.goals, backend);
}

struct SolveStats {
  int iterations = 0;
  std::size_t samples = 0;
  std::size_t counterexamples_added = 0;
  std::vector<Sample> rejected;  // candidate samples that are not derivable
};

struct Verdict {
  enum class Kind { Sat, Unsat, Unknown };
  Kind kind = Kind::Unknown;
  CandidateModel model;
  std::optional<chc::Refutation> refutation;
  std::string reason;
  std::optional<SolveMode> mode;
  bool bounded = false;  // Sat resting on bounded validity only
  SolveStats stats;
  std::vector<std::pair<std::string, double>> timings;  // seconds per phase

  static Verdict unknown(std::string why) {
    Verdict v;
    v.reason = std::move(why);
    return v;
  }
};

inline const char* verdict_name(const Verdict& v) {
  switch (v.kind) {
    case Verdict::Kind::Sat: return v.bounded ? "sat (bounded)" : "sat";
    case Verdict::Kind::Unsat: return "unsat";
    case Verdict::Kind::Unknown: return "unknown";
  }
  return "?";
}

// ---- model construction ------------------------------------------------------

namespace detail {

inline std::vector<std::size_t> positions_of(const chc::PredDecl& d, bool lists_only) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < d.params.size(); ++k)
    if (!lists_only || d.params[k] == Sort::List) out.push_back(k);
  return out;
}

inline std::vector<const Sample*> samples_of(const std::vector<Sample>& xs, const std::string& p) {
  std::vector<const Sample*> out;
  for (const auto& x : xs)
    if (x.pred == p) out.push_back(&x);
  return out;
}

// z = count(x, l) for Int/List/Int parameter triples that every sample satisfies
inline Expr count_templates(const chc::PredDecl& d, const std::vector<const Sample*>& mine) {
  std::vector<Expr> out;
  if (mine.empty()) return chc::tru();
  const auto& ps = d.params;
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t l = 0; l < ps.size(); ++l)
      for (std::size_t z = 0; z < ps.size(); ++z) {
        if (ps[i] != Sort::Int || ps[l] != Sort::List || ps[z] != Sort::Int || i == z) continue;
        bool ok = std::all_of(mine.begin(), mine.end(), [&](const Sample* s) {
          auto x = s->values[i].i;
          const auto& xs = s->values[l].seq;
          return s->values[z].i == std::count(xs.begin(), xs.end(), x);
        });
        if (ok)
          out.push_back(chc::eq(chc::var(formal(z), Sort::Int),
                                chc::count(chc::var(formal(i), Sort::Int), chc::var(formal(l), Sort::List))));
      }
  return chc::and_(out);
}

}  // namespace detail

// Per-predicate STP over list arguments (sequence) or over all arguments with
// integers as singletons (collections); `history` accumulates when enabled.
inline CandidateModel build_model(const ChcSystem& s, const std::vector<Sample>& samples, Mode mode,
                                  const InferConfig& icfg, std::map<std::string, std::vector<TuplePattern>>* history,
                                  const IntModel* lengths = nullptr) {
  CandidateModel m;
  const bool seq = mode == Mode::Sequence;
  for (const auto& d : s.preds) {
    PredModel pm;
    pm.params = d.params;
    pm.mode = mode;
    pm.positions = detail::positions_of(d, seq);
    auto mine = detail::samples_of(samples, d.name);
    if (mine.empty()) {
      pm.empty = true;
      m.preds[d.name] = pm;
      continue;
    }
    if (!pm.positions.empty()) {
      std::vector<std::vector<Word>> rows;
      for (const Sample* x : mine) {
        std::vector<Word> r;
        for (auto p : pm.positions) {
          const auto& v = x->values[p];
          Word w = v.sort == Sort::List ? Word(v.seq.begin(), v.seq.end()) : Word{v.i};
          if (!seq) {
            std::sort(w.begin(), w.end());
            if (mode == Mode::Set) w.erase(std::unique(w.begin(), w.end()), w.end());
          }
          r.push_back(std::move(w));
        }
        if (std::find(rows.begin(), rows.end(), r) == rows.end()) rows.push_back(std::move(r));
      }
      LearningData ld(std::move(rows));
      TuplePattern t = seq ? infer(ld, icfg) : infer_collection({ld, mode}, icfg);
      if (history) {
        auto& h = (*history)[d.name];
        if (std::find(h.begin(), h.end(), t) == h.end()) h.push_back(t);
        pm.patterns = h;
      } else {
        pm.patterns = {t};
      }
    }
    std::vector<Expr> extra;
    if (mode == Mode::Multiset) extra.push_back(detail::count_templates(d, mine));
    if (lengths) {
      auto it = lengths->find(d.name);
      if (it != lengths->end()) extra.push_back(embed_length_formula(it->second, d.params));
    }
    pm.extra = chc::and_(extra);
    m.preds[d.name] = pm;
  }
  return m;
}

// ---- the loop ----------------------------------------------------------------

namespace detail {

inline bool cancelled(const SolverConfig& cfg) { return cfg.cancel && cfg.cancel->load(); }

inline smt::Backend make_backend(const SolverConfig& cfg) { return smt::Backend(cfg.bounds, cfg.smt, cfg.cancel); }

// Sample, infer, check the definite clauses, learn from derivable counterexamples,
// and finally check the goals. Never concludes unsat.
inline Verdict cegis(const ChcSystem& s, const SolverConfig& cfg, SolveMode sm, const IntModel* lengths) {
  Verdict v;
  v.mode = sm;
  Mode mode = sm == SolveMode::Set ? Mode::Set : sm == SolveMode::Multiset ? Mode::Multiset : Mode::Sequence;
  std::mt19937_64 rng(cfg.seed);
  chc::Engine eng(s, chc::Domain{}, {5'000'000, cfg.cancel});
  std::vector<Sample> samples = eng.collect_samples(cfg.sampling, rng);
  auto backend = make_backend(cfg);
  std::map<std::string, std::vector<TuplePattern>> history;
  std::vector<Sample> candidates = cfg.injected;
  chc::SampleBudget budget = cfg.sampling;
  int stalls = 0;

  // true when the sample was new and derivable
  auto vet = [&](Sample c) {
    if (std::find(samples.begin(), samples.end(), c) != samples.end()) return false;
    if (std::find(v.stats.rejected.begin(), v.stats.rejected.end(), c) != v.stats.rejected.end()) return false;
    c.provenance = chc::Provenance::Counterexample;
    if (!eng.derivable(c, cfg.derive_depth)) {
      v.stats.rejected.push_back(c);
      return false;
    }
    samples.push_back(c);
    ++v.stats.counterexamples_added;
    return true;
  };

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (cancelled(cfg)) return Verdict::unknown("cancelled");
    v.stats.iterations = it;
    for (auto& c : candidates) vet(c);
    candidates.clear();
    v.model = build_model(s, samples, mode, cfg.infer(), cfg.accumulate ? &history : nullptr, lengths);
    v.stats.samples = samples.size();
    // samples only grow and models only weaken, so a goal violation is final
    auto g = check_goal(v.model, s, backend);
    if (g.kind == CheckOutcome::Kind::Cex) {
      v.reason = "candidate model does not imply goal clause " + std::to_string(g.clause);
      return v;
    }
    auto d = check_definite(v.model, s, backend);
    if (d.kind == CheckOutcome::Kind::Unknown) {
      v.reason = "definite clause " + std::to_string(d.clause) + ": " + d.reason;
      return v;
    }
    if (d.kind == CheckOutcome::Kind::Cex) {
      const auto& head = *s.definite[d.clause].head;
      Sample h{head.pred, {}, chc::Provenance::Counterexample, 0};
      bool ok = true;
      for (const auto& a : head.args) {
        auto x = chc::eval_term(a, d.assignment);
        if (!x) ok = false;
        else h.values.push_back(*x);
      }
      if (ok && vet(h)) {
        stalls = 0;
        continue;
      }
      // not in the least model: draw fresh samples instead
      budget.depth = std::min(budget.depth + 1, 8);
      budget.count += 4;
      std::size_t before = samples.size();
      for (auto& x : eng.collect_samples(budget, rng))
        if (std::find(samples.begin(), samples.end(), x) == samples.end()) samples.push_back(x);
      if (samples.size() == before && ++stalls >= 3) {
        v.reason = "counterexamples outside the least model and no new samples";
        return v;
      }
      continue;
    }
    if (g.kind == CheckOutcome::Kind::Valid) {
      v.kind = Verdict::Kind::Sat;
      v.bounded = d.bounded || g.bounded;
      return v;
    }
    v.reason = "goal clause " + std::to_string(g.clause) + ": " + g.reason;
    return v;
  }
  v.reason = "iteration limit reached";
  return v;
}

}  // namespace detail

inline Verdict solve_list_mode(const ChcSystem& s, const SolverConfig& cfg = {}) {
  return detail::cegis(s, cfg, SolveMode::List, nullptr);
}

inline Verdict solve_collection_mode(const ChcSystem& s, Mode mode, const SolverConfig& cfg = {}) {
  if (mode == Mode::Sequence) throw PatternError("solve_collection_mode: mode must be Set or Multiset");
  return detail::cegis(s, cfg, mode == Mode::Set ? SolveMode::Set : SolveMode::Multiset, nullptr);
}

// Integer model of the length abstraction (external solver when configured,
// otherwise the built-in fitter) conjoined with the list patterns.
inline Verdict solve_list_len_mode(const ChcSystem& s, const SolverConfig& cfg = {}) {
  ChcSystem abs;
  try {
    abs = length_abstract(s);
  } catch (const chc::ChcError& e) {
    auto v = Verdict::unknown(std::string("length abstraction: ") + e.what());
    v.mode = SolveMode::ListLen;
    return v;
  }
  std::string why;
  std::optional<IntModel> im;
  if (cfg.int_chc && !cfg.int_chc->command.empty()) im = external_int_model(abs, *cfg.int_chc, why);
  if (!im) {
    IntFitConfig fc;
    fc.check = cfg.bounds;
    im = fit_int_model(abs, cfg.seed, why, fc, cfg.cancel);
  }
  if (!im) {
    auto v = Verdict::unknown("no integer model: " + why);
    v.mode = SolveMode::ListLen;
    return v;
  }
  return detail::cegis(s, cfg, SolveMode::ListLen, &*im);
}

inline Verdict solve_mode(const ChcSystem& s, SolveMode m, const SolverConfig& cfg = {}) {
  switch (m) {
    case SolveMode::List: return solve_list_mode(s, cfg);
    case SolveMode::Set: return solve_collection_mode(s, Mode::Set, cfg);
    case SolveMode::Multiset: return solve_collection_mode(s, Mode::Multiset, cfg);
    case SolveMode::ListLen: return solve_list_len_mode(s, cfg);
  }
  return Verdict::unknown("bad mode");
}

// Ground derivation of a goal violation, checked by replay before it is returned.
inline std::optional<chc::Refutation> refute(const ChcSystem& s, int depth, std::uint64_t max_nodes = 3'000'000,
                                             chc::Domain dom = chc::Domain::bounded(3, 2),
                                             const std::atomic<bool>* cancel = nullptr) {
  chc::Engine eng(s, dom, {max_nodes, cancel});
  auto r = eng.refute(depth);
  if (r && !chc::replay(s, *r)) return std::nullopt;
  return r;
}

// Refutation runs beside the mode sequence list → set → multiset → list-len;
// the first definitive verdict wins and cancels the rest.
inline Verdict solve_auto(const ChcSystem& s, const SolverConfig& cfg = {},
                          const std::vector<SolveMode>& modes = {SolveMode::List, SolveMode::Set, SolveMode::Multiset,
                                                                 SolveMode::ListLen}) {
  using clock = std::chrono::steady_clock;
  std::atomic<bool> stop_refute{false}, stop_modes{false};
  std::mutex mu;
  std::condition_variable cv;
  std::optional<chc::Refutation> found;
  bool refute_done = false;
  double refute_secs = 0;

  // forward outside cancellation to both sides
  std::jthread relay;
  if (cfg.cancel)
    relay = std::jthread([&, c = cfg.cancel](std::stop_token st) {
      while (!st.stop_requested()) {
        if (c->load()) {
          stop_refute = true;
          stop_modes = true;
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    });

  std::jthread refuter([&] {
    auto t0 = clock::now();
    auto r = refute(s, cfg.refute_depth, cfg.refute_nodes, cfg.refute_domain, &stop_refute);
    std::lock_guard lk(mu);
    refute_secs = std::chrono::duration<double>(clock::now() - t0).count();
    found = std::move(r);
    refute_done = true;
    if (found) stop_modes = true;
    cv.notify_all();
  });

  SolverConfig mcfg = cfg;
  mcfg.cancel = &stop_modes;
  Verdict last = Verdict::unknown("no mode succeeded");
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> reasons;
  for (auto m : modes) {
    if (stop_modes) break;
    auto t0 = clock::now();
    Verdict v = solve_mode(s, m, mcfg);
    timings.emplace_back(mode_name(m), std::chrono::duration<double>(clock::now() - t0).count());
    if (v.kind == Verdict::Kind::Sat) {
      // a replayed refutation outranks a model that may rest on bounded checks
      bool refuted = false;
      {
        std::lock_guard lk(mu);
        refuted = found.has_value();
      }
      if (!refuted) {
        stop_refute = true;
        refuter.join();
        v.timings = timings;
        return v;
      }
      break;
    }
    reasons.push_back(std::string(mode_name(m)) + ": " + v.reason);
    last = std::move(v);
  }
  {
    std::unique_lock lk(mu);
    cv.wait(lk, [&] { return refute_done; });
  }
  refuter.join();
  timings.emplace_back("refute", refute_secs);
  if (found) {
    Verdict v;
    v.kind = Verdict::Kind::Unsat;
    v.refutation = std::move(found);
    v.timings = timings;
    return v;
  }
  Verdict v = Verdict::unknown("");
  for (std::size_t k = 0; k < reasons.size(); ++k) v.reason += (k ? "; " : "") + reasons[k];
  if (v.reason.empty()) v.reason = cfg.cancel && cfg.cancel->load() ? "cancelled" : "no mode succeeded";
  v.stats = last.stats;
  v.timings = timings;
  return v;
}

}  // namespace stp::solver
