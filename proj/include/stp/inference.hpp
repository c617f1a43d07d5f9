#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "stp/learning_data.hpp"
#include "stp/reduction.hpp"

namespace stp {

enum class Strategy : std::uint8_t { Deterministic, ExhaustiveAll };

struct InferConfig {
  bool enable_constants = false;
  bool enable_postfix = false;
  bool enable_reverse = false;
  Strategy strategy = Strategy::Deterministic;
  std::size_t limit = 200000;  // explored states for ExhaustiveAll

  RuleSet rules() const { return {enable_postfix, enable_reverse}; }
};

struct Rewrite {
  Rule rule = Rule::Epsilon;
  std::size_t j = 0;  // principal column
  std::optional<std::size_t> i;  // auxiliary column
  std::optional<Letter> constant;

  friend bool operator==(const Rewrite&, const Rewrite&) = default;
};

// pattern over the header variables plus their per-row values (column-major)
struct RewriteState {
  TuplePattern pattern;
  std::vector<VarId> header;
  std::vector<std::vector<Word>> columns;
  VarId next_var = 0;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

  std::size_t data_size() const {
    std::size_t n = 0;
    for (const auto& c : columns)
      for (const auto& w : c) n += 1 + w.size();
    return n;
  }

  SubstitutionRow row(std::size_t r) const {
    SubstitutionRow out;
    for (std::size_t c = 0; c < header.size(); ++c) out[header[c]] = columns[c][r];
    return out;
  }
};

inline RewriteState initial_state(const LearningData& m, Mode mode = Mode::Sequence) {
  if (m.rows() == 0 || m.cols() == 0) throw PatternError("inference: empty matrix");
  RewriteState s;
  std::vector<PatternString> elems;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    elems.push_back({Atom::var(static_cast<VarId>(c))});
    s.header.push_back(static_cast<VarId>(c));
    auto col = m.column(c);
    if (mode != Mode::Sequence)
      for (auto& w : col) {
        std::sort(w.begin(), w.end());
        if (mode == Mode::Set && ms::has_duplicates(w)) throw PatternError("set-mode cell with duplicate elements");
      }
    s.columns.push_back(std::move(col));
  }
  s.pattern = TuplePattern::raw(std::move(elems), mode);
  s.next_var = static_cast<VarId>(m.cols());
  return s;
}

namespace detail {

inline bool all_empty(const std::vector<Word>& col) {
  for (const auto& w : col)
    if (!w.empty()) return false;
  return true;
}

// remainder column for the rewrite, or nothing when the side condition fails
inline std::optional<std::vector<Word>> remainder(const RewriteState& s, const Rewrite& d) {
  const auto& cj = s.columns[d.j];
  const bool seq = s.pattern.mode() == Mode::Sequence;
  std::vector<Word> out;
  out.reserve(cj.size());
  for (std::size_t r = 0; r < cj.size(); ++r) {
    const Word& w = cj[r];
    switch (d.rule) {
      case Rule::Prefix:
      case Rule::Postfix:
      case Rule::RPrefix:
      case Rule::RPostfix: {
        const Word& aux = s.columns[*d.i][r];
        if (!seq) {
          if (!ms::contains(w, aux)) return std::nullopt;
          out.push_back(ms::minus(w, aux));
          break;
        }
        bool rev = d.rule == Rule::RPrefix || d.rule == Rule::RPostfix;
        bool pre = d.rule == Rule::Prefix || d.rule == Rule::RPrefix;
        Word a = rev ? reversed(aux) : aux;
        if (pre ? !is_prefix(a, w) : !is_suffix(a, w)) return std::nullopt;
        if (pre) out.emplace_back(w.begin() + static_cast<std::ptrdiff_t>(a.size()), w.end());
        else out.emplace_back(w.begin(), w.end() - static_cast<std::ptrdiff_t>(a.size()));
        break;
      }
      case Rule::CPrefix:
      case Rule::CPostfix: {
        Letter a = *d.constant;
        if (!seq) {
          Word one{a};
          if (!ms::contains(w, one)) return std::nullopt;
          out.push_back(ms::minus(w, one));
          break;
        }
        if (w.empty()) return std::nullopt;
        if (d.rule == Rule::CPrefix) {
          if (w.front() != a) return std::nullopt;
          out.emplace_back(w.begin() + 1, w.end());
        } else {
          if (w.back() != a) return std::nullopt;
          out.emplace_back(w.begin(), w.end() - 1);
        }
        break;
      }
      case Rule::Epsilon:
        if (!w.empty()) return std::nullopt;
        break;
    }
  }
  return out;
}

inline bool allowed(Rule r, const InferConfig& cfg, Mode mode) {
  if (mode != Mode::Sequence) {
    if (r == Rule::CPrefix) return cfg.enable_constants;
    return r == Rule::Epsilon || r == Rule::Prefix;
  }
  switch (r) {
    case Rule::CPrefix: return cfg.enable_constants;
    case Rule::CPostfix: return cfg.enable_constants && cfg.enable_postfix;
    case Rule::Postfix: return cfg.enable_postfix;
    case Rule::RPrefix:
    case Rule::RPostfix: return cfg.enable_reverse;
    default: return true;
  }
}

}  // namespace detail

// Rule-major order: Epsilon, Prefix, Postfix, RPrefix, RPostfix, CPrefix, CPostfix;
// inside a rule j ascending then i ascending.
inline void for_each_rewrite(const RewriteState& s, const InferConfig& cfg,
                             const std::function<bool(const Rewrite&)>& f) {
  static constexpr Rule order[] = {Rule::Epsilon,  Rule::Prefix,  Rule::Postfix, Rule::RPrefix,
                                   Rule::RPostfix, Rule::CPrefix, Rule::CPostfix};
  const Mode mode = s.pattern.mode();
  const std::size_t n = s.columns.size();
  std::vector<char> empty_col(n);
  for (std::size_t c = 0; c < n; ++c) empty_col[c] = detail::all_empty(s.columns[c]);
  for (Rule rule : order) {
    if (!detail::allowed(rule, cfg, mode)) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (rule == Rule::Epsilon) {
        if (empty_col[j] && f({rule, j, std::nullopt, std::nullopt})) return;
        continue;
      }
      if (has_const(rule)) {
        const auto& col = s.columns[j];
        if (col.front().empty()) continue;
        std::vector<Letter> cands;
        if (mode == Mode::Sequence) {
          cands.push_back(rule == Rule::CPrefix ? col.front().front() : col.front().back());
        } else {
          cands = col.front();
          cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
        }
        for (Letter a : cands) {
          Rewrite d{rule, j, std::nullopt, a};
          if (detail::remainder(s, d) && f(d)) return;
        }
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (i == j || empty_col[i]) continue;
        Rewrite d{rule, j, i, std::nullopt};
        if (detail::remainder(s, d) && f(d)) return;
      }
    }
  }
}

inline std::vector<Rewrite> applicable_rewrites(const RewriteState& s, const InferConfig& cfg) {
  std::vector<Rewrite> out;
  for_each_rewrite(s, cfg, [&](const Rewrite& d) {
    out.push_back(d);
    return false;
  });
  return out;
}

inline RewriteState rewrite_step(const RewriteState& s, const Rewrite& d) {
  if (d.j >= s.columns.size() || (d.i && (*d.i >= s.columns.size() || *d.i == d.j)) ||
      has_aux(d.rule) != d.i.has_value() || has_const(d.rule) != d.constant.has_value())
    throw PatternError("rewrite_step: malformed descriptor");
  if (d.i && detail::all_empty(s.columns[*d.i])) throw PatternError("rewrite_step: auxiliary column is all empty");
  auto rem = detail::remainder(s, d);
  if (!rem) throw PatternError(std::string("rewrite_step: ") + rule_name(d.rule) + " not applicable");

  RewriteState out;
  out.next_var = s.next_var;
  const VarId xj = s.header[d.j];
  PatternString repl;
  std::optional<VarId> fresh;
  if (d.rule != Rule::Epsilon) fresh = out.next_var++;
  switch (d.rule) {
    case Rule::Epsilon: break;
    case Rule::Prefix: repl = {Atom::var(s.header[*d.i]), Atom::var(*fresh)}; break;
    case Rule::Postfix: repl = {Atom::var(*fresh), Atom::var(s.header[*d.i])}; break;
    case Rule::RPrefix: repl = {Atom::rev(s.header[*d.i]), Atom::var(*fresh)}; break;
    case Rule::RPostfix: repl = {Atom::var(*fresh), Atom::rev(s.header[*d.i])}; break;
    case Rule::CPrefix: repl = {Atom::constant(*d.constant), Atom::var(*fresh)}; break;
    case Rule::CPostfix: repl = {Atom::var(*fresh), Atom::constant(*d.constant)}; break;
  }
  const PatternString repl_rev = reverse(repl);
  std::vector<PatternString> elems;
  for (const auto& e : s.pattern.elements()) {
    PatternString ne;
    for (const Atom& a : e) {
      if (a.has_var() && a.var_id() == xj) {
        const auto& r = a.is_rev() ? repl_rev : repl;
        ne.insert(ne.end(), r.begin(), r.end());
      } else {
        ne.push_back(a);
      }
    }
    if (s.pattern.mode() != Mode::Sequence) std::sort(ne.begin(), ne.end());
    elems.push_back(std::move(ne));
  }
  out.pattern = TuplePattern::raw(std::move(elems), s.pattern.mode());
  out.header = s.header;
  out.columns = s.columns;
  if (d.rule == Rule::Epsilon) {
    out.header.erase(out.header.begin() + static_cast<std::ptrdiff_t>(d.j));
    out.columns.erase(out.columns.begin() + static_cast<std::ptrdiff_t>(d.j));
  } else {
    out.header[d.j] = *fresh;
    out.columns[d.j] = std::move(*rem);
  }
  return out;
}

inline std::optional<Rewrite> first_rewrite(const RewriteState& s, const InferConfig& cfg) {
  std::optional<Rewrite> out;
  for_each_rewrite(s, cfg, [&](const Rewrite& d) {
    out = d;
    return true;
  });
  return out;
}

inline RewriteState run_deterministic(RewriteState s, const InferConfig& cfg) {
  while (auto d = first_rewrite(s, cfg)) s = rewrite_step(s, *d);
  return s;
}

inline TuplePattern infer(const LearningData& m, const InferConfig& cfg = {}) {
  return run_deterministic(initial_state(m), cfg).pattern.canonical();
}

struct InferAllResult {
  std::set<TuplePattern> patterns;  // normal forms
  std::set<TuplePattern> reachable;  // every pattern on the way, normal forms included
  bool complete = true;
  std::size_t states = 0;
};

namespace detail {

inline std::string state_key(const RewriteState& s) {
  std::vector<VarId> order;
  std::string key;
  auto index = [&](VarId v) {
    auto it = std::find(order.begin(), order.end(), v);
    if (it != order.end()) return static_cast<std::size_t>(it - order.begin());
    order.push_back(v);
    return order.size() - 1;
  };
  for (const auto& e : s.pattern.elements()) {
    for (const Atom& a : e) {
      key += static_cast<char>('0' + static_cast<int>(a.kind));
      key += std::to_string(a.is_const() ? static_cast<std::size_t>(a.letter()) : index(a.var_id()));
      key += ' ';
    }
    key += '|';
  }
  for (VarId v : order) {
    auto c = static_cast<std::size_t>(std::find(s.header.begin(), s.header.end(), v) - s.header.begin());
    key += '#';
    for (const auto& w : s.columns[c]) {
      for (Letter l : w) key += std::to_string(l) + '.';
      key += ';';
    }
  }
  return key;
}

}  // namespace detail

inline InferAllResult infer_all_from(const RewriteState& start, const InferConfig& cfg) {
  InferAllResult res;
  std::unordered_set<std::string> seen;
  std::vector<RewriteState> stack{start};
  seen.insert(detail::state_key(start));
  while (!stack.empty()) {
    RewriteState s = std::move(stack.back());
    stack.pop_back();
    ++res.states;
    res.reachable.insert(s.pattern.canonical());
    auto ds = applicable_rewrites(s, cfg);
    if (ds.empty()) {
      res.patterns.insert(s.pattern.canonical());
      continue;
    }
    for (const auto& d : ds) {
      RewriteState n = rewrite_step(s, d);
      if (!seen.insert(detail::state_key(n)).second) continue;
      if (seen.size() > cfg.limit) {
        res.complete = false;
        return res;
      }
      stack.push_back(std::move(n));
    }
  }
  return res;
}

inline InferAllResult infer_all(const LearningData& m, const InferConfig& cfg = {}) {
  return infer_all_from(initial_state(m), cfg);
}

inline bool validate(const LearningData& m, const TuplePattern& t, const RuleSet& rules = RuleSet::all()) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (!member(m.row(r), t, rules)) return false;
  return true;
}

}  // namespace stp
