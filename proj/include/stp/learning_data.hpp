#pragma once

#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "stp/pattern.hpp"

namespace stp {

class LearningData {
public:
  LearningData() = default;
  explicit LearningData(std::vector<std::vector<Word>> rows) : rows_(std::move(rows)) {
    for (const auto& r : rows_)
      if (r.size() != rows_.front().size()) throw PatternError("learning data: ragged rows");
  }

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return rows_.empty() ? 0 : rows_.front().size(); }
  const Word& at(std::size_t r, std::size_t c) const { return rows_[r][c]; }
  const std::vector<Word>& row(std::size_t r) const { return rows_[r]; }
  const std::vector<std::vector<Word>>& data() const { return rows_; }

  std::vector<Word> column(std::size_t c) const {
    std::vector<Word> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r[c]);
    return out;
  }

  // sum over cells of 1 + |cell|
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& r : rows_)
      for (const auto& c : r) n += 1 + c.size();
    return n;
  }

  friend bool operator==(const LearningData&, const LearningData&) = default;

private:
  std::vector<std::vector<Word>> rows_;
};

struct CsvOptions {
  bool int_lists = false;  // cells are '.'-separated integers, as for collections
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline Word parse_cell(const std::string& cell, const CsvOptions& opt) {
  if (!opt.int_lists) return word_from_chars(cell);
  Word w;
  if (cell.empty() || cell == "eps") return w;
  for (const auto& tok : split(cell, '.')) {
    std::size_t used = 0;
    Letter v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tok.empty() || used != tok.size()) throw PatternError("bad integer cell '" + cell + "'");
    w.push_back(v);
  }
  return w;
}

inline LearningData read_csv(std::istream& in, const CsvOptions& opt = {}) {
  std::vector<std::vector<Word>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<Word> row;
    for (auto& cell : split(line, ',')) {
      auto b = cell.find_first_not_of(" \t");
      auto e = cell.find_last_not_of(" \t");
      row.push_back(parse_cell(b == std::string::npos ? "" : cell.substr(b, e - b + 1), opt));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw PatternError("csv: row " + std::to_string(rows.size() + 1) + " has " + std::to_string(row.size()) + " cells");
    rows.push_back(std::move(row));
  }
  return LearningData(std::move(rows));
}

inline LearningData read_csv_string(const std::string& text, const CsvOptions& opt = {}) {
  std::istringstream in(text);
  return read_csv(in, opt);
}

}  // namespace stp
