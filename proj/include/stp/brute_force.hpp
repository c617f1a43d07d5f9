#pragma once

#include <map>
#include <optional>

#include "stp/pattern.hpp"

namespace stp {

namespace detail {

struct BruteForceSeq {
  const SequenceTuple& v;
  const TuplePattern& t;
  std::size_t max_len;
  std::map<VarId, Word> env;

  bool elem(std::size_t e) {
    if (e == t.arity()) return true;
    return atoms(e, 0, 0);
  }

  bool atoms(std::size_t e, std::size_t k, std::size_t pos) {
    const Word& w = v[e];
    const PatternString& p = t[e];
    if (k == p.size()) return pos == w.size() && elem(e + 1);
    const Atom& a = p[k];
    if (a.is_const()) return pos < w.size() && w[pos] == a.letter() && atoms(e, k + 1, pos + 1);
    auto it = env.find(a.var_id());
    if (it != env.end()) {
      const Word& val = it->second;
      if (pos + val.size() > w.size()) return false;
      for (std::size_t q = 0; q < val.size(); ++q) {
        Letter c = a.is_rev() ? val[val.size() - 1 - q] : val[q];
        if (w[pos + q] != c) return false;
      }
      return atoms(e, k + 1, pos + val.size());
    }
    std::size_t room = std::min(max_len, w.size() - pos);
    for (std::size_t len = 0; len <= room; ++len) {
      Word val(w.begin() + static_cast<std::ptrdiff_t>(pos), w.begin() + static_cast<std::ptrdiff_t>(pos + len));
      if (a.is_rev()) val = reversed(std::move(val));
      env[a.var_id()] = std::move(val);
      if (atoms(e, k + 1, pos + len)) return true;
      env.erase(a.var_id());
    }
    return false;
  }
};

struct BruteForceColl {
  const SequenceTuple& v;
  const TuplePattern& t;
  std::map<VarId, Word> env;

  bool elem(std::size_t e) {
    if (e == t.arity()) return true;
    return atoms(e, 0, v[e]);
  }

  bool atoms(std::size_t e, std::size_t k, const Word& rest) {
    const PatternString& p = t[e];
    if (k == p.size()) return rest.empty() && elem(e + 1);
    const Atom& a = p[k];
    if (a.is_const()) {
      Word one{a.letter()};
      return ms::contains(rest, one) && atoms(e, k + 1, ms::minus(rest, one));
    }
    auto it = env.find(a.var_id());
    if (it != env.end()) return ms::contains(rest, it->second) && atoms(e, k + 1, ms::minus(rest, it->second));
    // every sub-multiset of rest
    std::vector<std::pair<Letter, std::size_t>> groups;
    for (Letter c : rest) {
      if (!groups.empty() && groups.back().first == c) ++groups.back().second;
      else groups.emplace_back(c, 1);
    }
    std::vector<std::size_t> pick(groups.size(), 0);
    while (true) {
      Word sub;
      for (std::size_t g = 0; g < groups.size(); ++g) sub.insert(sub.end(), pick[g], groups[g].first);
      env[a.var_id()] = sub;
      if (atoms(e, k + 1, ms::minus(rest, sub))) return true;
      env.erase(a.var_id());
      std::size_t g = 0;
      while (g < groups.size() && pick[g] == groups[g].second) pick[g++] = 0;
      if (g == groups.size()) break;
      ++pick[g];
    }
    return false;
  }
};

}  // namespace detail

// Independent oracle: searches substitutions directly, variables bound to words of length <= max_len.
inline bool brute_force_member(const SequenceTuple& v, const TuplePattern& t, std::size_t max_len) {
  if (v.size() != t.arity()) return false;
  if (t.mode() == Mode::Sequence) return detail::BruteForceSeq{v, t, max_len, {}}.elem(0);
  SequenceTuple sorted = v;
  for (auto& w : sorted) std::sort(w.begin(), w.end());
  return detail::BruteForceColl{sorted, t, {}}.elem(0);
}

}  // namespace stp
