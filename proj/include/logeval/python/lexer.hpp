#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace logeval::python {

enum class TokenKind : std::uint8_t {
  kName,
  kNumber,
  kString,
  kOp,
  kNewline,
  kIndent,
  kDedent,
  kEndMarker,
};

struct Token {
  TokenKind kind;
  std::string_view text;  // empty for INDENT/DEDENT/ENDMARKER
  std::uint32_t begin = 0;  // byte offset
  std::uint32_t end = 0;
  int line = 1;  // 1-based
  int col = 0;   // 0-based byte column

  bool is(TokenKind k, std::string_view t) const {
    return kind == k && text == t;
  }
  bool is_op(std::string_view t) const { return is(TokenKind::kOp, t); }
  bool is_name(std::string_view t) const { return is(TokenKind::kName, t); }
};

struct Comment {
  std::uint32_t begin;
  std::uint32_t end;
  int line;
};

struct TokenStream {
  std::vector<Token> tokens;
  std::vector<Comment> comments;
  std::vector<std::uint32_t> line_starts;  // offset of each physical line
};

// Tokenizes Python 3 source. Throws ParseError (with an empty file id) on
// malformed input: unterminated strings, unbalanced brackets, inconsistent
// dedents, stray characters.
TokenStream tokenize(std::string_view source);

// Prefix letters of a string token as written, e.g. "Rb" for Rb'..'.
std::string_view string_prefix(std::string_view token_text);

// The text between the quotes of a string token, escapes left as written.
std::string_view string_body(std::string_view token_text);

}  // namespace logeval::python
