#pragma once

#include <algorithm>
#include <vector>

#include "stp/learning_data.hpp"
#include "stp/reduction.hpp"

namespace stp {

struct Codewords {
  std::vector<Word> alpha;
  std::size_t width = 0;
};

inline std::size_t ceil_log2(std::size_t n) {
  std::size_t w = 0;
  while ((std::size_t{1} << w) < n) ++w;
  return w;
}

// i-th word of the given width: binary expansion, MSB first, 0 -> a, 1 -> b
inline Word binary_word(std::size_t i, std::size_t width, Letter a, Letter b) {
  Word w(width);
  for (std::size_t k = 0; k < width; ++k) w[width - 1 - k] = ((i >> k) & 1U) ? b : a;
  return w;
}

// k fixed-width codewords 1..k; with reverse_safe, palindromes and reversal pairs are skipped
inline Codewords make_codewords(std::size_t k, bool reverse_safe, Letter a, Letter b) {
  std::size_t width = std::max<std::size_t>(1, ceil_log2(k + 1));
  while (true) {
    Codewords c{{}, width};
    for (std::size_t i = 1; i < (std::size_t{1} << width) && c.alpha.size() < k; ++i) {
      Word w = binary_word(i, width, a, b);
      if (reverse_safe) {
        Word r = reversed(w);
        if (r == w) continue;
        if (std::find(c.alpha.begin(), c.alpha.end(), r) != c.alpha.end()) continue;
      }
      c.alpha.push_back(std::move(w));
    }
    if (c.alpha.size() == k) return c;
    ++width;
  }
}

inline Word swap_letters(Word w, Letter a, Letter b) {
  for (auto& c : w) c = c == a ? b : (c == b ? a : c);
  return w;
}

// rows [alpha/x]t and [beta/x]t; alpha[k] is assigned to the k-th variable by first occurrence
inline LearningData canonical_data(const TuplePattern& t, const std::vector<Word>& alpha, Letter a = 'a',
                                   Letter b = 'b') {
  auto vars = t.variables();
  if (alpha.size() < vars.size()) throw PatternError("canonical_data: not enough codewords");
  SubstitutionRow r1, r2;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    r1[vars[k]] = alpha[k];
    r2[vars[k]] = swap_letters(alpha[k], a, b);
  }
  return LearningData({apply_substitution(r1, t), apply_substitution(r2, t)});
}

inline LearningData canonical_data(const TuplePattern& t, const RuleSet& rules = {}, const std::vector<Letter>& alphabet = {'a', 'b'}) {
  if (t.mode() != Mode::Sequence) throw PatternError("canonical_data: sequence patterns only");
  std::vector<Letter> sigma = alphabet;
  std::sort(sigma.begin(), sigma.end());
  sigma.erase(std::unique(sigma.begin(), sigma.end()), sigma.end());
  if (sigma.size() < 2) throw PatternError("canonical_data: alphabet needs at least two letters");
  if (!is_solvable(t, rules)) throw PatternError("canonical_data: pattern is not solvable");
  auto code = make_codewords(t.variables().size(), rules.reverse, sigma[0], sigma[1]);
  return canonical_data(t, code.alpha, sigma[0], sigma[1]);
}

}  // namespace stp
