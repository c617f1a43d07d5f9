#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "stp/canonical.hpp"
#include "stp/chc/smtlib.hpp"
#include "stp/collection.hpp"
#include "stp/solver/solve.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kSat = 0, kUnsat = 1, kUnknown = 2, kUsage = 64, kDataErr = 65;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

stp::smt::Bounds parse_bounds(const std::string& s) {
  auto parts = stp::split(s, ',');
  if (parts.size() != 2) throw CLI::ValidationError("--bounds", "expected L,E");
  try {
    stp::smt::Bounds b{std::stoi(parts[0]), std::stoll(parts[1])};
    if (b.max_len < 0 || b.max_elem < 0 || b.max_len > 8) throw std::out_of_range("bounds");
    return b;
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--bounds", "expected L,E with 0 <= L <= 8, E >= 0");
  }
}

// comma-separated cells, letters as characters; "eps" or an empty cell is ε
stp::SequenceTuple parse_tuple(const std::string& s) {
  stp::SequenceTuple v;
  for (auto& c : stp::split(s, ',')) v.push_back(c == "eps" ? stp::Word{} : stp::word_from_chars(c));
  return v;
}

std::string cell_text(const stp::Word& w) {
  for (auto a : w)
    if (a < 32 || a > 126) {
      std::string out;
      for (std::size_t k = 0; k < w.size(); ++k) out += (k ? "." : "") + std::to_string(w[k]);
      return out;
    }
  return stp::word_to_chars(w);
}

// sets `flag` after `secs` unless finished first
class Watchdog {
public:
  Watchdog(double secs, std::atomic<bool>& flag) {
    if (secs <= 0) return;
    th_ = std::thread([this, secs, &flag] {
      std::unique_lock lk(mu_);
      if (!cv_.wait_for(lk, std::chrono::duration<double>(secs), [this] { return done_; })) flag = true;
    });
  }
  ~Watchdog() {
    {
      std::lock_guard lk(mu_);
      done_ = true;
    }
    cv_.notify_all();
    if (th_.joinable()) th_.join();
  }

private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool done_ = false;
  std::thread th_;
};

struct SolveOpts {
  std::string file, mode = "auto", smt_cmd, int_cmd, bounds = "4,2";
  bool smt_native_rev = false;
  std::uint64_t seed = 0;
  double timeout = 0;
};

int run_solve(const SolveOpts& o, bool as_json, bool verbose) {
  using namespace stp;
  chc::ChcSystem s;
  try {
    s = chc::parse_smtlib(read_file(o.file));
  } catch (const std::exception& e) {
    std::cerr << "stp-chc: " << e.what() << "\n";
    return kDataErr;
  }
  std::atomic<bool> cancel{false};
  solver::SolverConfig cfg;
  cfg.bounds = parse_bounds(o.bounds);
  cfg.seed = o.seed;
  cfg.cancel = &cancel;
  auto child_timeout = std::chrono::milliseconds(o.timeout > 0 ? static_cast<long>(o.timeout * 1000) : 10000);
  if (!o.smt_cmd.empty()) cfg.smt = smt::ExternalConfig{o.smt_cmd, o.smt_native_rev, child_timeout};
  if (!o.int_cmd.empty()) cfg.int_chc = smt::ExternalConfig{o.int_cmd, false, child_timeout};

  solver::Verdict v;
  {
    Watchdog dog(o.timeout, cancel);
    if (o.mode == "auto") v = solver::solve_auto(s, cfg);
    else {
      auto t0 = std::chrono::steady_clock::now();
      solver::SolveMode m = o.mode == "list"       ? solver::SolveMode::List
                            : o.mode == "set"      ? solver::SolveMode::Set
                            : o.mode == "multiset" ? solver::SolveMode::Multiset
                                                   : solver::SolveMode::ListLen;
      v = solver::solve_mode(s, m, cfg);
      v.timings.emplace_back(o.mode, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
  }
  if (v.kind == solver::Verdict::Kind::Unknown && cancel && v.reason.find("cancel") == std::string::npos)
    v.reason = "timeout; " + v.reason;

  const char* provider = !cfg.smt ? "bounded" : v.bounded ? "external+bounded" : "external";
  int code = v.kind == solver::Verdict::Kind::Sat ? kSat : v.kind == solver::Verdict::Kind::Unsat ? kUnsat : kUnknown;

  if (as_json) {
    json j;
    j["verdict"] = solver::verdict_name(v);
    j["mode"] = v.mode ? json(solver::mode_name(*v.mode)) : json(nullptr);
    j["provider"] = provider;
    j["bounds"] = smt::render(cfg.bounds);
    if (v.kind == solver::Verdict::Kind::Sat) {
      json m = json::object();
      for (const auto& d : s.preds) {
        auto it = v.model.preds.find(d.name);
        if (it == v.model.preds.end()) continue;
        std::vector<chc::Expr> args;
        auto names = solver::display_names(d);
        for (std::size_t k = 0; k < names.size(); ++k) args.push_back(chc::var(names[k], d.params[k]));
        m[d.name] = {{"params", names}, {"formula", chc::render(it->second.formula(args))}};
      }
      j["model"] = m;
    }
    if (v.refutation) j["refutation"] = chc::render(*v.refutation);
    if (v.kind == solver::Verdict::Kind::Unknown) j["reason"] = v.reason;
    j["stats"] = {{"iterations", v.stats.iterations},
                  {"samples", v.stats.samples},
                  {"counterexamples", v.stats.counterexamples_added},
                  {"rejected", v.stats.rejected.size()}};
    if (verbose) {
      json t = json::object();
      for (const auto& [k, secs] : v.timings) t[k] = secs;
      j["timings"] = t;
    }
    std::cout << j.dump(2) << "\n";
    return code;
  }

  std::cout << solver::verdict_name(v) << "\n";
  if (v.kind == solver::Verdict::Kind::Sat) {
    std::cout << "; mode " << solver::mode_name(*v.mode) << ", provider " << provider << "\n";
    std::cout << solver::render(v.model, s);
  } else if (v.kind == solver::Verdict::Kind::Unsat) {
    std::cout << chc::render(*v.refutation);
  } else {
    std::cout << "; " << v.reason << "\n";
  }
  if (verbose) {
    std::cout << "; iterations " << v.stats.iterations << ", samples " << v.stats.samples << ", counterexamples "
              << v.stats.counterexamples_added << ", rejected " << v.stats.rejected.size() << "\n";
    for (const auto& [k, secs] : v.timings) std::cout << "; time " << k << " " << secs << "s\n";
  }
  return code;
}

struct InferOpts {
  std::string file;
  bool postfix = false, reverse = false, constants = false, set = false, multiset = false, all = false,
       int_lists = false;
};

int run_infer(const InferOpts& o, bool as_json) {
  using namespace stp;
  LearningData m;
  try {
    CsvOptions csv;
    csv.int_lists = o.int_lists;
    m = read_csv_string(read_file(o.file), csv);
  } catch (const std::exception& e) {
    std::cerr << "stp-chc: " << e.what() << "\n";
    return kDataErr;
  }
  InferConfig cfg;
  cfg.enable_postfix = o.postfix;
  cfg.enable_reverse = o.reverse;
  cfg.enable_constants = o.constants;
  std::vector<TuplePattern> out;
  bool complete = true;
  try {
    Mode mode = o.set ? Mode::Set : o.multiset ? Mode::Multiset : Mode::Sequence;
    if (o.all) {
      auto r = mode == Mode::Sequence ? infer_all(m, cfg) : infer_collection_all({m, mode}, cfg);
      out.assign(r.patterns.begin(), r.patterns.end());
      complete = r.complete;
    } else {
      out.push_back(mode == Mode::Sequence ? infer(m, cfg) : infer_collection({m, mode}, cfg));
    }
  } catch (const PatternError& e) {
    std::cerr << "stp-chc: " << e.what() << "\n";
    return kDataErr;
  }
  if (as_json) {
    json j;
    j["patterns"] = json::array();
    for (const auto& t : out) j["patterns"].push_back(render(t));
    j["complete"] = complete;
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& t : out) std::cout << render(t) << "\n";
    if (!complete) std::cout << "; search limit reached, list may be incomplete\n";
  }
  return kSat;
}

struct DecideOpts {
  std::string question;
  std::vector<std::string> args;
  bool postfix = false, reverse = false;
};

int run_decide(const DecideOpts& o, bool as_json) {
  using namespace stp;
  RuleSet rules{o.postfix, o.reverse};
  auto need = [&](std::size_t n) {
    if (o.args.size() != n)
      throw CLI::ValidationError(o.question, "expects " + std::to_string(n) + " argument" + (n > 1 ? "s" : ""));
  };
  bool answer = false;
  try {
    if (o.question == "solvable") {
      need(1);
      answer = is_solvable(parse_pattern(o.args[0]), rules);
    } else if (o.question == "member") {
      need(2);
      answer = member(parse_tuple(o.args[1]), parse_pattern(o.args[0]), rules);
    } else if (o.question == "includes") {
      need(2);
      answer = includes(parse_pattern(o.args[0]), parse_pattern(o.args[1]), rules);
    } else {
      need(2);
      answer = equivalent(parse_pattern(o.args[0]), parse_pattern(o.args[1]), rules);
    }
  } catch (const ParseError& e) {
    std::cerr << "stp-chc: pattern " << e.what() << "\n";
    return kDataErr;
  } catch (const PatternError& e) {
    std::cerr << "stp-chc: " << e.what() << "\n";
    return kDataErr;
  }
  if (as_json) std::cout << json{{"question", o.question}, {"answer", answer}}.dump() << "\n";
  else std::cout << (answer ? "yes" : "no") << "\n";
  return kSat;
}

struct GenOpts {
  std::string pattern;
  bool postfix = false, reverse = false;
};

int run_gen(const GenOpts& o) {
  using namespace stp;
  try {
    auto m = canonical_data(parse_pattern(o.pattern), RuleSet{o.postfix, o.reverse});
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) std::cout << (c ? "," : "") << cell_text(m.at(r, c));
      std::cout << "\n";
    }
  } catch (const ParseError& e) {
    std::cerr << "stp-chc: pattern " << e.what() << "\n";
    return kDataErr;
  } catch (const PatternError& e) {
    std::cerr << "stp-chc: " << e.what() << "\n";
    return kDataErr;
  }
  return kSat;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solve constrained Horn clauses over lists with simple tuple patterns"};
  app.fallthrough();
  app.require_subcommand(1);
  bool as_json = false, verbose = false;
  app.add_flag("--json", as_json, "Emit one JSON object");
  app.add_flag("-v,--verbose", verbose, "Print statistics and timings");

  SolveOpts so;
  auto* solve = app.add_subcommand("solve", "Solve a HORN SMT-LIB file");
  solve->add_option("file", so.file, "SMT-LIB file")->required();
  solve->add_option("--mode", so.mode, "auto, list, set, multiset or list-len")
      ->check(CLI::IsMember({"auto", "list", "set", "multiset", "list-len"}));
  solve->add_option("--smt-cmd", so.smt_cmd, "External sequence solver, reads SMT-LIB on stdin");
  solve->add_flag("--smt-native-rev", so.smt_native_rev, "The external solver knows seq.rev");
  solve->add_option("--int-chc-cmd", so.int_cmd, "External integer HORN solver, reads SMT-LIB on stdin");
  solve->add_option("--seed", so.seed, "Sampling seed");
  solve->add_option("--bounds", so.bounds, "Bounded checker: max list length, max element (L,E)");
  solve->add_option("--timeout", so.timeout, "Wall-clock limit in seconds")->check(CLI::NonNegativeNumber);

  InferOpts io;
  auto* inf = app.add_subcommand("infer", "Infer a tuple pattern from a CSV matrix");
  inf->add_option("file", io.file, "CSV, one tuple per line")->required();
  inf->add_flag("--postfix", io.postfix, "Enable postfix rules");
  inf->add_flag("--reverse", io.reverse, "Enable reverse rules");
  inf->add_flag("--constants", io.constants, "Enable constant rules");
  auto* fset = inf->add_flag("--set", io.set, "Cells are sets");
  auto* fms = inf->add_flag("--multiset", io.multiset, "Cells are multisets");
  fset->excludes(fms);
  inf->add_flag("--all", io.all, "Every normal form instead of one");
  inf->add_flag("--int-lists", io.int_lists, "Cells are '.'-separated integers");

  DecideOpts dopt;
  auto* dec = app.add_subcommand("decide", "Decide a question about patterns");
  dec->add_option("question", dopt.question, "solvable, member, includes or equiv")
      ->required()
      ->check(CLI::IsMember({"solvable", "member", "includes", "equiv"}));
  dec->add_option("args", dopt.args, "Patterns, or pattern and tuple for member")->required();
  dec->add_flag("--postfix", dopt.postfix, "Enable postfix rules");
  dec->add_flag("--reverse", dopt.reverse, "Enable reverse rules");

  GenOpts go;
  auto* gen = app.add_subcommand("gen-data", "Print the canonical learning data of a pattern");
  gen->add_option("pattern", go.pattern, "Solvable pattern")->required();
  gen->add_flag("--postfix", go.postfix, "Enable postfix rules");
  gen->add_flag("--reverse", go.reverse, "Enable reverse rules");

  try {
    app.parse(argc, argv);
    if (*solve) {
      parse_bounds(so.bounds);
      return run_solve(so, as_json, verbose);
    }
    if (*inf) return run_infer(io, as_json);
    if (*dec) return run_decide(dopt, as_json);
    return run_gen(go);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
}
