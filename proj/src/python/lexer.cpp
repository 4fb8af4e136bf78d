#include "logeval/python/lexer.hpp"

#include <array>
#include <cctype>
#include <string>

#include "logeval/errors.hpp"

namespace logeval::python {
namespace {

constexpr std::array<std::string_view, 24> kThreeAndTwoCharOps = {
    "**=", "//=", ">>=", "<<=", "...", "!=", "==", "<=", ">=", "**", "//",
    "<<",  ">>",  "->",  ":=",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=",
    "^=",  "@=",
};

constexpr std::string_view kSingleCharOps = "()[]{},:.;@=+-*/%&|^~<>";

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

bool is_string_prefix(std::string_view p) {
  if (p.size() > 2) return false;
  std::string lower;
  for (char c : p) lower.push_back(static_cast<char>(std::tolower(c)));
  return lower.empty() || lower == "r" || lower == "u" || lower == "b" ||
         lower == "f" || lower == "br" || lower == "rb" || lower == "fr" ||
         lower == "rf";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  TokenStream run() {
    out_.line_starts.push_back(0);
    for (std::uint32_t i = 0; i < src_.size(); ++i) {
      if (src_[i] == '\n') out_.line_starts.push_back(i + 1);
    }
    indents_.push_back(0);
    bool at_line_start = true;
    while (pos_ < src_.size()) {
      if (at_line_start && depth_ == 0) {
        if (!handle_indentation()) continue;  // blank or comment-only line
        at_line_start = false;
      }
      char c = src_[pos_];
      if (c == '\n' || c == '\r') {
        consume_newline();
        if (depth_ == 0 && !out_.tokens.empty() &&
            out_.tokens.back().kind != TokenKind::kNewline &&
            out_.tokens.back().kind != TokenKind::kIndent &&
            out_.tokens.back().kind != TokenKind::kDedent) {
          emit_at(TokenKind::kNewline, newline_begin_, newline_begin_,
                  newline_line_, newline_col_);
        }
        if (depth_ == 0) at_line_start = true;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\f') {
        advance();
        continue;
      }
      if (c == '#') {
        lex_comment();
        continue;
      }
      if (c == '\\') {
        std::uint32_t next = pos_ + 1;
        if (next < src_.size() && src_[next] == '\r') ++next;
        if (next < src_.size() && src_[next] == '\n') {
          advance();
          if (src_[pos_] == '\r') advance();
          advance_line();
          continue;
        }
        if (next >= src_.size()) {
          fail("unexpected EOF after line continuation");
        }
        fail("unexpected character after line continuation");
      }
      lex_token();
    }
    if (depth_ != 0) {
      fail_at(open_line_, open_col_, "unclosed bracket at end of file");
    }
    auto end = static_cast<std::uint32_t>(src_.size());
    if (!out_.tokens.empty() &&
        out_.tokens.back().kind != TokenKind::kNewline &&
        out_.tokens.back().kind != TokenKind::kDedent) {
      emit_at(TokenKind::kNewline, end, end, line_, col_);
    }
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit_at(TokenKind::kDedent, end, end, line_, 0);
    }
    emit_at(TokenKind::kEndMarker, end, end, line_, 0);
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("", line_, col_, what);
  }
  [[noreturn]] void fail_at(int line, int col, const std::string& what) const {
    throw ParseError("", line, col, what);
  }

  void advance() {
    ++pos_;
    ++col_;
  }
  void advance_line() {
    ++pos_;
    ++line_;
    col_ = 0;
  }

  void consume_newline() {
    newline_begin_ = pos_;
    newline_line_ = line_;
    newline_col_ = col_;
    if (src_[pos_] == '\r') {
      advance();
      if (pos_ < src_.size() && src_[pos_] == '\n') advance_line();
      else {
        ++line_;
        col_ = 0;
      }
      return;
    }
    advance_line();
  }

  // Returns false when the line carries no tokens (blank / comment only).
  bool handle_indentation() {
    int width = 0;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ') {
        ++width;
      } else if (c == '\t') {
        width = (width / 8 + 1) * 8;
      } else if (c == '\f') {
        width = 0;
      } else {
        break;
      }
      advance();
    }
    if (pos_ >= src_.size()) return false;
    char c = src_[pos_];
    if (c == '#') {
      lex_comment();
      return false;
    }
    if (c == '\n' || c == '\r') {
      consume_newline();
      return false;
    }
    if (c == '\\') {
      // A continuation on an otherwise empty line joins with the next line;
      // treat the indentation of this line as authoritative.
    }
    if (width > indents_.back()) {
      indents_.push_back(width);
      emit_at(TokenKind::kIndent, pos_, pos_, line_, col_);
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        emit_at(TokenKind::kDedent, pos_, pos_, line_, col_);
      }
      if (width != indents_.back()) {
        fail("unindent does not match any outer indentation level");
      }
    }
    return true;
  }

  void lex_comment() {
    std::uint32_t begin = pos_;
    while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') {
      advance();
    }
    out_.comments.push_back(Comment{begin, pos_, line_});
  }

  void emit(TokenKind kind, std::uint32_t begin, int line, int col) {
    emit_at(kind, begin, pos_, line, col);
  }

  void emit_at(TokenKind kind, std::uint32_t begin, std::uint32_t end,
               int line, int col) {
    Token t;
    t.kind = kind;
    t.text = src_.substr(begin, end - begin);
    t.begin = begin;
    t.end = end;
    t.line = line;
    t.col = col;
    out_.tokens.push_back(t);
  }

  void lex_token() {
    const std::uint32_t begin = pos_;
    const int line = line_;
    const int col = col_;
    auto c = static_cast<unsigned char>(src_[pos_]);

    if (is_ident_start(c)) {
      while (pos_ < src_.size() &&
             is_ident_char(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      }
      if (pos_ < src_.size() && (src_[pos_] == '\'' || src_[pos_] == '"') &&
          is_string_prefix(src_.substr(begin, pos_ - begin))) {
        lex_string(begin, line, col);
        return;
      }
      emit(TokenKind::kName, begin, line, col);
      return;
    }
    if (c == '\'' || c == '"') {
      lex_string(begin, line, col);
      return;
    }
    if (std::isdigit(c) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number(begin, line, col);
      return;
    }
    for (auto op : kThreeAndTwoCharOps) {
      if (src_.substr(pos_, op.size()) == op) {
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        emit(TokenKind::kOp, begin, line, col);
        return;
      }
    }
    if (kSingleCharOps.find(static_cast<char>(c)) != std::string_view::npos) {
      advance();
      if (c == '(' || c == '[' || c == '{') {
        if (depth_ == 0) {
          open_line_ = line;
          open_col_ = col;
        }
        brackets_.push_back(static_cast<char>(c));
        ++depth_;
      } else if (c == ')' || c == ']' || c == '}') {
        char want = c == ')' ? '(' : c == ']' ? '[' : '{';
        if (brackets_.empty() || brackets_.back() != want) {
          fail_at(line, col, std::string("unmatched '") +
                                 static_cast<char>(c) + "'");
        }
        brackets_.pop_back();
        --depth_;
      }
      emit(TokenKind::kOp, begin, line, col);
      return;
    }
    fail("invalid character in source");
  }

  void lex_number(std::uint32_t begin, int line, int col) {
    auto peek = [&](std::size_t k = 0) -> char {
      return pos_ + k < src_.size() ? src_[pos_ + k] : '\0';
    };
    auto digits = [&](auto pred) {
      while (pred(static_cast<unsigned char>(peek())) || peek() == '_') {
        advance();
      }
    };
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance();
      advance();
      digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else if (peek() == '0' && (peek(1) == 'o' || peek(1) == 'O' ||
                                 peek(1) == 'b' || peek(1) == 'B')) {
      advance();
      advance();
      digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
    } else {
      auto dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
      digits(dec);
      if (peek() == '.') {
        advance();
        digits(dec);
      }
      if (peek() == 'e' || peek() == 'E') {
        std::size_t k = 1;
        if (peek(1) == '+' || peek(1) == '-') k = 2;
        if (std::isdigit(static_cast<unsigned char>(peek(k)))) {
          for (std::size_t i = 0; i < k; ++i) advance();
          digits(dec);
        }
      }
      if (peek() == 'j' || peek() == 'J') advance();
    }
    if (is_ident_start(static_cast<unsigned char>(peek()))) {
      fail("invalid numeric literal");
    }
    emit(TokenKind::kNumber, begin, line, col);
  }

  void lex_string(std::uint32_t begin, int line, int col) {
    std::string_view prefix = src_.substr(begin, pos_ - begin);
    bool raw = prefix.find_first_of("rR") != std::string_view::npos;
    char quote = src_[pos_];
    bool triple = src_.substr(pos_, 3) == std::string(3, quote);
    std::size_t qlen = triple ? 3 : 1;
    for (std::size_t i = 0; i < qlen; ++i) advance();
    while (true) {
      if (pos_ >= src_.size()) {
        fail_at(line, col, "unterminated string literal");
      }
      char c = src_[pos_];
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) fail_at(line, col, "unterminated string");
        if (src_[pos_] == '\n') {
          advance_line();
        } else if (src_[pos_] == '\r') {
          advance();
          if (pos_ < src_.size() && src_[pos_] == '\n') advance_line();
        } else {
          advance();
        }
        (void)raw;  // raw strings still cannot end in an odd backslash
        continue;
      }
      if (c == '\n' || c == '\r') {
        if (!triple) fail_at(line, col, "unterminated string literal");
        if (c == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
          advance();
        }
        advance_line();
        continue;
      }
      if (c == quote) {
        if (!triple) {
          advance();
          break;
        }
        if (src_.substr(pos_, 3) == std::string(3, quote)) {
          advance();
          advance();
          advance();
          break;
        }
      }
      advance();
    }
    emit(TokenKind::kString, begin, line, col);
  }

  std::string_view src_;
  std::uint32_t pos_ = 0;
  int line_ = 1;
  int col_ = 0;
  int depth_ = 0;
  int open_line_ = 1;
  int open_col_ = 0;
  std::uint32_t newline_begin_ = 0;
  int newline_line_ = 1;
  int newline_col_ = 0;
  std::vector<char> brackets_;
  std::vector<int> indents_;
  TokenStream out_;
};

}  // namespace

TokenStream tokenize(std::string_view source) { return Lexer(source).run(); }

std::string_view string_prefix(std::string_view token_text) {
  std::size_t q = token_text.find_first_of("'\"");
  return token_text.substr(0, q);
}

std::string_view string_body(std::string_view token_text) {
  std::string_view prefix = string_prefix(token_text);
  std::string_view rest = token_text.substr(prefix.size());
  if (rest.size() >= 6 && rest.substr(0, 3) == rest.substr(rest.size() - 3) &&
      (rest.substr(0, 3) == "'''" || rest.substr(0, 3) == "\"\"\"")) {
    return rest.substr(3, rest.size() - 6);
  }
  if (rest.size() >= 2) return rest.substr(1, rest.size() - 2);
  return {};
}

}  // namespace logeval::python
