#pragma once

#include "stp/inference.hpp"

namespace stp {

struct CollectionData {
  LearningData cells;  // each cell a multiset, order irrelevant
  Mode mode = Mode::Multiset;
};

inline TuplePattern infer_collection(const CollectionData& m, const InferConfig& cfg = {}) {
  if (m.mode == Mode::Sequence) throw PatternError("infer_collection: mode must be Set or Multiset");
  return run_deterministic(initial_state(m.cells, m.mode), cfg).pattern.canonical();
}

inline InferAllResult infer_collection_all(const CollectionData& m, const InferConfig& cfg = {}) {
  if (m.mode == Mode::Sequence) throw PatternError("infer_collection_all: mode must be Set or Multiset");
  return infer_all_from(initial_state(m.cells, m.mode), cfg);
}

inline bool collection_member(const SequenceTuple& v, const TuplePattern& t) {
  if (t.mode() == Mode::Sequence) throw PatternError("collection_member: pattern is in sequence mode");
  if (v.size() != t.arity()) throw PatternError("collection_member: arity mismatch");
  SequenceTuple sorted = v;
  for (auto& w : sorted) {
    std::sort(w.begin(), w.end());
    if (t.mode() == Mode::Set && ms::has_duplicates(w)) return false;
  }
  return member(sorted, t);
}

}  // namespace stp
