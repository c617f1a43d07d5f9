#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "stp/chc/expr.hpp"

namespace stp::chc {

class SmtParseError : public ChcError {
public:
  SmtParseError(int line, int col, const std::string& msg)
      : ChcError(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line(line), col(col) {}
  int line;
  int col;
};

struct SExpr {
  bool is_list = false;
  bool is_string = false;  // "..." literal
  std::string atom;
  std::vector<SExpr> items;
  int line = 1;
  int col = 1;

  bool is_atom(std::string_view s) const { return !is_list && !is_string && atom == s; }
  bool head_is(std::string_view s) const { return is_list && !items.empty() && items[0].is_atom(s); }
  [[noreturn]] void fail(const std::string& msg) const { throw SmtParseError(line, col, msg); }
};

class SExprReader {
public:
  explicit SExprReader(std::string_view text) : s_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    while (true) {
      skip();
      if (pos_ >= s_.size()) return out;
      out.push_back(read());
    }
  }

private:
  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  SExpr read() {
    skip();
    SExpr e;
    e.line = line_;
    e.col = col_;
    if (pos_ >= s_.size()) throw SmtParseError(line_, col_, "unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      advance();
      e.is_list = true;
      while (true) {
        skip();
        if (pos_ >= s_.size()) throw SmtParseError(e.line, e.col, "unbalanced parenthesis");
        if (s_[pos_] == ')') {
          advance();
          return e;
        }
        e.items.push_back(read());
      }
    }
    if (c == ')') throw SmtParseError(line_, col_, "unexpected ')'");
    if (c == '|') {
      advance();
      while (pos_ < s_.size() && s_[pos_] != '|') {
        e.atom += s_[pos_];
        advance();
      }
      if (pos_ >= s_.size()) throw SmtParseError(e.line, e.col, "unterminated quoted symbol");
      advance();
      return e;
    }
    if (c == '"') {
      e.is_string = true;
      advance();
      while (true) {
        if (pos_ >= s_.size()) throw SmtParseError(e.line, e.col, "unterminated string");
        if (s_[pos_] == '"') {
          advance();
          if (pos_ < s_.size() && s_[pos_] == '"') {
            e.atom += '"';
            advance();
            continue;
          }
          return e;
        }
        e.atom += s_[pos_];
        advance();
      }
    }
    while (pos_ < s_.size()) {
      char d = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' || d == '"') break;
      e.atom += d;
      advance();
    }
    return e;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline std::vector<SExpr> read_sexprs(std::string_view text) { return SExprReader(text).read_all(); }

inline std::string render(const SExpr& e) {
  if (e.is_string) return "\"" + e.atom + "\"";
  if (!e.is_list) return e.atom;
  std::string s = "(";
  for (std::size_t k = 0; k < e.items.size(); ++k) s += (k ? " " : "") + render(e.items[k]);
  return s + ")";
}

}  // namespace stp::chc
