#ifndef BCIDX_SEXPR_HPP
#define BCIDX_SEXPR_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bcidx {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_), col(col_) {}
};

struct SExpr {
  bool atom = false;
  std::string text;            // atom payload
  std::vector<SExpr> items;    // list payload
  int line = 0, col = 0;

  bool is_list() const { return !atom; }
  size_t size() const { return items.size(); }
  const SExpr& operator[](size_t i) const { return items[i]; }

  // Convenience for fixed-shape forms: "(head ...)".
  bool headed(std::string_view head) const {
    return is_list() && !items.empty() && items[0].atom && items[0].text == head;
  }
};

namespace detail {

class SexprReader {
 public:
  explicit SexprReader(std::string_view src) : src_(src) {}

  bool at_end() {
    skip_ws();
    return pos_ >= src_.size();
  }

  SExpr read() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", line_, col_);
    char c = src_[pos_];
    if (c == '(') {
      SExpr e;
      e.line = line_;
      e.col = col_;
      advance();
      for (;;) {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unclosed '('", e.line, e.col);
        if (src_[pos_] == ')') {
          advance();
          return e;
        }
        e.items.push_back(read());
      }
    }
    if (c == ')') throw ParseError("unexpected ')'", line_, col_);
    SExpr e;
    e.atom = true;
    e.line = line_;
    e.col = col_;
    while (pos_ < src_.size() && !is_ws(src_[pos_]) && src_[pos_] != '(' && src_[pos_] != ')' &&
           src_[pos_] != ';')
      e.text.push_back(take());
    if (e.text.empty()) throw ParseError("empty token", line_, col_);
    return e;
  }

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    while (!at_end()) out.push_back(read());
    return out;
  }

 private:
  static bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() && is_ws(src_[pos_])) advance();
      if (pos_ < src_.size() && src_[pos_] == ';') {  // line comment
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      return;
    }
  }

  char take() {
    char c = src_[pos_];
    advance();
    return c;
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

}  // namespace detail

inline SExpr parse_sexpr(std::string_view src) {
  detail::SexprReader r(src);
  SExpr e = r.read();
  if (!r.at_end()) throw ParseError("trailing input after expression", 0, 0);
  return e;
}

inline std::vector<SExpr> parse_sexprs(std::string_view src) {
  detail::SexprReader r(src);
  return r.read_all();
}

}  // namespace bcidx

#endif  // BCIDX_SEXPR_HPP
