#include <algorithm>
#include <array>
#include <string>

#include "logeval/errors.hpp"
#include "logeval/python/ast.hpp"

namespace logeval::python {
namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield",
};

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

constexpr std::array<std::string_view, 13> kAugAssignOps = {
    "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=",
    "<<=", "**=",
};

class Parser {
 public:
  Parser(std::string_view src, const TokenStream& ts)
      : src_(src), toks_(ts.tokens) {}

  Block parse_file() {
    Block body;
    while (!at(TokenKind::kEndMarker)) {
      if (at(TokenKind::kNewline)) {
        ++pos_;
        continue;
      }
      parse_statement(body.stmts);
    }
    return body;
  }

  ExprPtr parse_lone_expression() {
    while (at(TokenKind::kNewline)) ++pos_;
    ExprPtr e = parse_star_expressions();
    while (at(TokenKind::kNewline)) ++pos_;
    if (!at(TokenKind::kEndMarker)) fail("unexpected trailing tokens");
    return e;
  }

 private:
  // ---------------------------------------------------------------- tokens
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t k = 1) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(TokenKind k) const { return cur().kind == k; }
  bool at_op(std::string_view s) const { return cur().is_op(s); }
  bool at_kw(std::string_view s) const { return cur().is_name(s); }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = cur();
    std::string shown = t.kind == TokenKind::kNewline   ? "NEWLINE"
                        : t.kind == TokenKind::kIndent    ? "INDENT"
                        : t.kind == TokenKind::kDedent    ? "DEDENT"
                        : t.kind == TokenKind::kEndMarker ? "EOF"
                                                          : std::string(t.text);
    throw ParseError("", t.line, t.col, what + " (at '" + shown + "')");
  }

  const Token& take() { return toks_[pos_++]; }

  const Token& expect_op(std::string_view s) {
    if (!at_op(s)) fail("expected '" + std::string(s) + "'");
    return take();
  }
  const Token& expect_kw(std::string_view s) {
    if (!at_kw(s)) fail("expected '" + std::string(s) + "'");
    return take();
  }
  const Token& expect_identifier() {
    if (!at(TokenKind::kName) || is_keyword(cur().text)) {
      fail("expected identifier");
    }
    return take();
  }
  bool accept_op(std::string_view s) {
    if (at_op(s)) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_kw(std::string_view s) {
    if (at_kw(s)) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::uint32_t prev_end() const { return toks_[pos_ - 1].end; }

  ExprPtr node(ExprKind kind, const Token& start) const {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->begin = start.begin;
    e->line = start.line;
    e->col = start.col;
    return e;
  }
  ExprPtr wrap(ExprKind kind, ExprPtr first) const {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->begin = first->begin;
    e->line = first->line;
    e->col = first->col;
    e->kids.push_back(std::move(first));
    return e;
  }
  ExprPtr finish(ExprPtr e) const {
    e->end = prev_end();
    return e;
  }

  bool starts_expression() const {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::kNumber:
      case TokenKind::kString:
        return true;
      case TokenKind::kName:
        return !is_keyword(t.text) || t.text == "True" || t.text == "False" ||
               t.text == "None" || t.text == "not" || t.text == "lambda" ||
               t.text == "await" || t.text == "yield";
      case TokenKind::kOp:
        return t.text == "(" || t.text == "[" || t.text == "{" ||
               t.text == "-" || t.text == "+" || t.text == "~" ||
               t.text == "*" || t.text == "..." || t.text == "**";
      default:
        return false;
    }
  }

  // ------------------------------------------------------------ statements
  void parse_statement(std::vector<StmtPtr>& out) {
    const Token& t = cur();
    if (t.kind == TokenKind::kIndent) fail("unexpected indent");
    if (t.kind == TokenKind::kDedent) fail("unexpected dedent");
    if (t.kind == TokenKind::kName) {
      std::string_view w = t.text;
      if (w == "if") return out.push_back(parse_if());
      if (w == "while") return out.push_back(parse_while());
      if (w == "for") return out.push_back(parse_for(false, pos_));
      if (w == "try") return out.push_back(parse_try());
      if (w == "with") return out.push_back(parse_with(false, pos_));
      if (w == "def") return out.push_back(parse_def(false, pos_));
      if (w == "class") return out.push_back(parse_class(pos_));
      if (w == "async") return out.push_back(parse_async());
      if (w == "match") {
        if (auto m = try_parse_match()) return out.push_back(std::move(m));
      }
    }
    if (t.is_op("@")) return out.push_back(parse_decorated());
    parse_simple_statements(out);
  }

  StmtPtr new_stmt(StmtKind kind, std::size_t first) const {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->first_tok = first;
    s->begin = toks_[first].begin;
    s->line = toks_[first].line;
    return s;
  }

  void close_stmt(Stmt& s) const {
    s.last_tok = pos_ - 1;
    s.end = toks_[pos_ - 1].end;
    s.end_line = toks_[pos_ - 1].line;
    std::string_view last = toks_[pos_ - 1].text;
    s.end_line += static_cast<int>(std::count(last.begin(), last.end(), '\n'));
  }

  void parse_simple_statements(std::vector<StmtPtr>& out) {
    while (true) {
      out.push_back(parse_simple_statement());
      if (accept_op(";")) {
        if (at(TokenKind::kNewline)) break;
        continue;
      }
      break;
    }
    if (!at(TokenKind::kNewline)) fail("expected end of statement");
    ++pos_;
  }

  StmtPtr parse_simple_statement() {
    const std::size_t first = pos_;
    const Token& t = cur();
    StmtPtr s;
    if (t.kind == TokenKind::kName) {
      std::string_view w = t.text;
      if (w == "pass" || w == "break" || w == "continue") {
        ++pos_;
        s = new_stmt(w == "pass"    ? StmtKind::kPass
                     : w == "break" ? StmtKind::kBreak
                                    : StmtKind::kContinue,
                     first);
      } else if (w == "return") {
        ++pos_;
        s = new_stmt(StmtKind::kReturn, first);
        if (starts_expression()) parse_star_expressions();
      } else if (w == "raise") {
        ++pos_;
        s = new_stmt(StmtKind::kRaise, first);
        if (starts_expression()) {
          parse_expression();
          if (accept_kw("from")) parse_expression();
        }
      } else if (w == "global" || w == "nonlocal") {
        ++pos_;
        s = new_stmt(w == "global" ? StmtKind::kGlobal : StmtKind::kNonlocal,
                     first);
        do {
          expect_identifier();
        } while (accept_op(","));
      } else if (w == "del") {
        ++pos_;
        s = new_stmt(StmtKind::kDel, first);
        parse_star_expressions();
      } else if (w == "assert") {
        ++pos_;
        s = new_stmt(StmtKind::kAssert, first);
        parse_expression();
        if (accept_op(",")) parse_expression();
      } else if (w == "import") {
        s = parse_import(first);
      } else if (w == "from") {
        s = parse_from_import(first);
      }
    }
    if (!s) s = parse_expression_statement(first);
    close_stmt(*s);
    return s;
  }

  std::string parse_dotted_name() {
    std::string name(expect_identifier().text);
    while (at_op(".")) {
      ++pos_;
      name += ".";
      name += expect_identifier().text;
    }
    return name;
  }

  StmtPtr parse_import(std::size_t first) {
    expect_kw("import");
    auto s = new_stmt(StmtKind::kImport, first);
    do {
      s->imported_modules.push_back(parse_dotted_name());
      if (accept_kw("as")) expect_identifier();
    } while (accept_op(","));
    return s;
  }

  StmtPtr parse_from_import(std::size_t first) {
    expect_kw("from");
    auto s = new_stmt(StmtKind::kImportFrom, first);
    std::string module;
    while (at_op(".") || at_op("...")) module += take().text;
    if (!at_kw("import")) module += parse_dotted_name();
    if (module.empty()) fail("expected module name");
    s->imported_modules.push_back(module);
    expect_kw("import");
    if (accept_op("*")) return s;
    bool paren = accept_op("(");
    do {
      if (paren && at_op(")")) break;
      expect_identifier();
      if (accept_kw("as")) expect_identifier();
    } while (accept_op(","));
    if (paren) expect_op(")");
    return s;
  }

  ExprPtr parse_yield_or_star_expressions() {
    if (at_kw("yield")) return parse_yield();
    return parse_star_expressions();
  }

  StmtPtr parse_expression_statement(std::size_t first) {
    ExprPtr lhs = parse_yield_or_star_expressions();
    if (at_op(":")) {
      ++pos_;
      auto s = new_stmt(StmtKind::kAnnAssign, first);
      parse_expression();
      if (accept_op("=")) parse_yield_or_star_expressions();
      return s;
    }
    for (auto op : kAugAssignOps) {
      if (at_op(op)) {
        ++pos_;
        auto s = new_stmt(StmtKind::kAugAssign, first);
        parse_yield_or_star_expressions();
        return s;
      }
    }
    if (at_op("=")) {
      auto s = new_stmt(StmtKind::kAssign, first);
      while (accept_op("=")) parse_yield_or_star_expressions();
      return s;
    }
    auto s = new_stmt(StmtKind::kExpr, first);
    s->value = std::move(lhs);
    return s;
  }

  Block parse_block() {
    expect_op(":");
    Block b;
    if (at(TokenKind::kNewline)) {
      ++pos_;
      if (!at(TokenKind::kIndent)) fail("expected an indented block");
      ++pos_;
      while (!at(TokenKind::kDedent)) {
        if (at(TokenKind::kEndMarker)) fail("unexpected EOF in block");
        parse_statement(b.stmts);
      }
      ++pos_;
    } else {
      b.inline_suite = true;
      parse_simple_statements(b.stmts);
    }
    return b;
  }

  void add_clause(Stmt& s, ClauseKind kind, int line) {
    Clause c;
    c.kind = kind;
    c.line = line;
    c.block = parse_block();
    s.clauses.push_back(std::move(c));
  }

  void close_header(Stmt& s) const {
    s.end = toks_[pos_ - 1].end;
    s.end_line = toks_[pos_ - 1].line;
  }

  StmtPtr parse_if() {
    auto s = new_stmt(StmtKind::kIf, pos_);
    int line = expect_kw("if").line;
    parse_named_expression();
    add_clause(*s, ClauseKind::kBody, line);
    while (at_kw("elif")) {
      line = take().line;
      parse_named_expression();
      add_clause(*s, ClauseKind::kElif, line);
    }
    if (at_kw("else")) {
      line = take().line;
      add_clause(*s, ClauseKind::kElse, line);
    }
    close_header(*s);
    return s;
  }

  StmtPtr parse_while() {
    auto s = new_stmt(StmtKind::kWhile, pos_);
    int line = expect_kw("while").line;
    parse_named_expression();
    add_clause(*s, ClauseKind::kBody, line);
    if (at_kw("else")) {
      line = take().line;
      add_clause(*s, ClauseKind::kElse, line);
    }
    close_header(*s);
    return s;
  }

  StmtPtr parse_for(bool is_async, std::size_t first) {
    auto s = new_stmt(StmtKind::kFor, first);
    s->is_async = is_async;
    int line = expect_kw("for").line;
    parse_star_targets();
    expect_kw("in");
    parse_star_expressions();
    add_clause(*s, ClauseKind::kBody, line);
    if (at_kw("else")) {
      line = take().line;
      add_clause(*s, ClauseKind::kElse, line);
    }
    close_header(*s);
    return s;
  }

  StmtPtr parse_try() {
    auto s = new_stmt(StmtKind::kTry, pos_);
    int line = expect_kw("try").line;
    add_clause(*s, ClauseKind::kBody, line);
    bool handlers = false;
    while (at_kw("except")) {
      handlers = true;
      line = take().line;
      accept_op("*");
      if (!at_op(":")) {
        parse_expression();
        if (accept_kw("as")) expect_identifier();
      }
      add_clause(*s, ClauseKind::kExcept, line);
    }
    if (handlers && at_kw("else")) {
      line = take().line;
      add_clause(*s, ClauseKind::kElse, line);
    }
    bool has_finally = false;
    if (at_kw("finally")) {
      has_finally = true;
      line = take().line;
      add_clause(*s, ClauseKind::kFinally, line);
    }
    if (!handlers && !has_finally) fail("expected 'except' or 'finally'");
    close_header(*s);
    return s;
  }

  void parse_with_item() {
    parse_expression();
    if (accept_kw("as")) parse_star_target();
  }

  StmtPtr parse_with(bool is_async, std::size_t first) {
    auto s = new_stmt(StmtKind::kWith, first);
    s->is_async = is_async;
    int line = expect_kw("with").line;
    bool done = false;
    if (at_op("(")) {
      std::size_t save = pos_;
      try {
        ++pos_;
        do {
          if (at_op(")")) break;
          parse_with_item();
        } while (accept_op(","));
        expect_op(")");
        if (!at_op(":")) fail("expected ':'");
        done = true;
      } catch (const ParseError&) {
        pos_ = save;
      }
    }
    if (!done) {
      do {
        parse_with_item();
      } while (accept_op(","));
    }
    add_clause(*s, ClauseKind::kBody, line);
    close_header(*s);
    return s;
  }

  void skip_type_params() {
    if (!at_op("[")) return;
    int depth = 0;
    do {
      if (at_op("[")) ++depth;
      if (at_op("]")) --depth;
      if (at(TokenKind::kEndMarker)) fail("unterminated type parameters");
      ++pos_;
    } while (depth > 0);
  }

  void parse_params(bool annotations, std::string_view terminator) {
    while (!at_op(terminator)) {
      if (accept_op("/")) {
      } else if (accept_op("**")) {
        expect_identifier();
        if (annotations && accept_op(":")) parse_expression();
      } else if (accept_op("*")) {
        if (at(TokenKind::kName)) {
          expect_identifier();
          if (annotations && accept_op(":")) {
            if (accept_op("*")) parse_bitwise_or();
            else parse_expression();
          }
        }
      } else {
        expect_identifier();
        if (annotations && accept_op(":")) parse_expression();
        if (accept_op("=")) parse_expression();
      }
      if (!accept_op(",")) break;
    }
  }

  StmtPtr parse_def(bool is_async, std::size_t first) {
    auto s = new_stmt(StmtKind::kFunctionDef, first);
    s->is_async = is_async;
    int line = expect_kw("def").line;
    s->name = expect_identifier().text;
    skip_type_params();
    expect_op("(");
    parse_params(true, ")");
    expect_op(")");
    if (accept_op("->")) parse_expression();
    add_clause(*s, ClauseKind::kBody, line);
    close_header(*s);
    return s;
  }

  StmtPtr parse_class(std::size_t first) {
    auto s = new_stmt(StmtKind::kClassDef, first);
    int line = expect_kw("class").line;
    s->name = expect_identifier().text;
    skip_type_params();
    if (at_op("(")) {
      const Token& open = take();
      parse_call_arguments(*node(ExprKind::kCall, open));
    }
    add_clause(*s, ClauseKind::kBody, line);
    close_header(*s);
    return s;
  }

  StmtPtr parse_async() {
    std::size_t first = pos_;
    expect_kw("async");
    if (at_kw("def")) return parse_def(true, first);
    if (at_kw("for")) return parse_for(true, first);
    if (at_kw("with")) return parse_with(true, first);
    fail("expected 'def', 'for' or 'with' after 'async'");
  }

  StmtPtr parse_decorated() {
    std::size_t first = pos_;
    while (accept_op("@")) {
      parse_named_expression();
      if (!at(TokenKind::kNewline)) fail("expected newline after decorator");
      ++pos_;
    }
    if (at_kw("def")) return parse_def(false, first);
    if (at_kw("class")) return parse_class(first);
    if (at_kw("async")) {
      ++pos_;
      return parse_def(true, first);
    }
    fail("expected function or class after decorator");
  }

  StmtPtr try_parse_match() {
    const Token& nxt = peek();
    if (nxt.kind == TokenKind::kNewline ||
        (nxt.kind == TokenKind::kOp &&
         (nxt.text == "=" || nxt.text == "." || nxt.text == ":" ||
          nxt.text == "," || nxt.text == ")" || nxt.text == ";"))) {
      return nullptr;
    }
    std::size_t save = pos_;
    try {
      auto s = new_stmt(StmtKind::kMatch, pos_);
      ++pos_;
      parse_star_expressions();
      expect_op(":");
      if (!at(TokenKind::kNewline)) fail("expected newline");
      ++pos_;
      if (!at(TokenKind::kIndent)) fail("expected indent");
      ++pos_;
      if (!at_kw("case")) fail("expected 'case'");
      while (at_kw("case")) {
        int line = take().line;
        bool saved = in_pattern_;
        in_pattern_ = true;
        parse_star_expressions();
        in_pattern_ = saved;
        if (accept_kw("if")) parse_named_expression();
        add_clause(*s, ClauseKind::kCase, line);
      }
      if (!at(TokenKind::kDedent)) fail("expected 'case'");
      ++pos_;
      s->end = toks_[s->first_tok].end;
      s->end_line = s->line;
      return s;
    } catch (const ParseError&) {
      pos_ = save;
      in_pattern_ = false;
      return nullptr;
    }
  }

  // ----------------------------------------------------------- expressions
  ExprPtr parse_star_expressions() {
    const Token& start = cur();
    ExprPtr first = parse_star_expression();
    if (!at_op(",")) return first;
    auto tup = node(ExprKind::kTuple, start);
    tup->kids.push_back(std::move(first));
    while (accept_op(",")) {
      if (!starts_expression()) break;
      tup->kids.push_back(parse_star_expression());
    }
    return finish(std::move(tup));
  }

  ExprPtr parse_star_expression() {
    if (at_op("*")) {
      const Token& star = take();
      auto e = node(ExprKind::kStarred, star);
      e->kids.push_back(parse_bitwise_or());
      return finish(std::move(e));
    }
    if (in_pattern_ && at_op("**")) {
      const Token& star = take();
      auto e = node(ExprKind::kDoubleStarred, star);
      e->kids.push_back(parse_bitwise_or());
      return finish(std::move(e));
    }
    return parse_named_expression();
  }

  ExprPtr parse_named_expression() {
    if (at(TokenKind::kName) && peek().is_op(":=")) {
      const Token& name = take();
      ++pos_;
      auto e = node(ExprKind::kNamedExpr, name);
      e->ident = name.text;
      e->kids.push_back(parse_expression());
      return finish(std::move(e));
    }
    return parse_expression();
  }

  ExprPtr parse_expression() {
    if (at_kw("lambda")) return parse_lambda();
    ExprPtr body = parse_disjunction();
    if (in_pattern_) {
      if (at_kw("as")) {
        auto e = wrap(ExprKind::kAs, std::move(body));
        ++pos_;
        e->ident = expect_identifier().text;
        return finish(std::move(e));
      }
      return body;
    }
    if (at_kw("if")) {
      auto e = wrap(ExprKind::kIfExp, std::move(body));
      ++pos_;
      e->kids.push_back(parse_disjunction());
      expect_kw("else");
      e->kids.push_back(parse_expression());
      return finish(std::move(e));
    }
    return body;
  }

  ExprPtr parse_lambda() {
    const Token& kw = take();
    auto e = node(ExprKind::kLambda, kw);
    parse_params(false, ":");
    expect_op(":");
    e->kids.push_back(parse_expression());
    return finish(std::move(e));
  }

  ExprPtr parse_disjunction() {
    ExprPtr left = parse_conjunction();
    if (!at_kw("or")) return left;
    auto e = wrap(ExprKind::kBoolOp, std::move(left));
    e->ident = "or";
    while (accept_kw("or")) e->kids.push_back(parse_conjunction());
    return finish(std::move(e));
  }

  ExprPtr parse_conjunction() {
    ExprPtr left = parse_inversion();
    if (!at_kw("and")) return left;
    auto e = wrap(ExprKind::kBoolOp, std::move(left));
    e->ident = "and";
    while (accept_kw("and")) e->kids.push_back(parse_inversion());
    return finish(std::move(e));
  }

  ExprPtr parse_inversion() {
    if (at_kw("not")) {
      const Token& kw = take();
      auto e = node(ExprKind::kUnaryOp, kw);
      e->ident = "not";
      e->kids.push_back(parse_inversion());
      return finish(std::move(e));
    }
    return parse_comparison();
  }

  bool at_compare_op() const {
    const Token& t = cur();
    if (t.kind == TokenKind::kOp) {
      return t.text == "==" || t.text == "!=" || t.text == "<" ||
             t.text == "<=" || t.text == ">" || t.text == ">=";
    }
    if (t.kind == TokenKind::kName) {
      if (t.text == "in" || t.text == "is") return true;
      if (t.text == "not" && peek().is_name("in")) return true;
    }
    return false;
  }

  ExprPtr parse_comparison() {
    ExprPtr left = parse_bitwise_or();
    if (!at_compare_op()) return left;
    auto e = wrap(ExprKind::kCompare, std::move(left));
    while (at_compare_op()) {
      if (at_kw("not")) ++pos_;
      bool is = at_kw("is");
      ++pos_;
      if (is) accept_kw("not");
      e->kids.push_back(parse_bitwise_or());
    }
    return finish(std::move(e));
  }

  template <typename Next>
  ExprPtr parse_binary(std::initializer_list<std::string_view> ops,
                       Next next) {
    ExprPtr left = (this->*next)();
    while (true) {
      bool matched = false;
      for (auto op : ops) {
        if (at_op(op)) {
          auto e = wrap(ExprKind::kBinOp, std::move(left));
          e->ident = take().text;
          e->kids.push_back((this->*next)());
          left = finish(std::move(e));
          matched = true;
          break;
        }
      }
      if (!matched) return left;
    }
  }

  ExprPtr parse_bitwise_or() {
    return parse_binary({"|"}, &Parser::parse_bitwise_xor);
  }
  ExprPtr parse_bitwise_xor() {
    return parse_binary({"^"}, &Parser::parse_bitwise_and);
  }
  ExprPtr parse_bitwise_and() {
    return parse_binary({"&"}, &Parser::parse_shift);
  }
  ExprPtr parse_shift() {
    return parse_binary({"<<", ">>"}, &Parser::parse_sum);
  }
  ExprPtr parse_sum() { return parse_binary({"+", "-"}, &Parser::parse_term); }
  ExprPtr parse_term() {
    return parse_binary({"*", "/", "//", "%", "@"}, &Parser::parse_factor);
  }

  ExprPtr parse_factor() {
    if (at_op("+") || at_op("-") || at_op("~")) {
      const Token& op = take();
      auto e = node(ExprKind::kUnaryOp, op);
      e->ident = op.text;
      e->kids.push_back(parse_factor());
      return finish(std::move(e));
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base;
    if (at_kw("await")) {
      const Token& kw = take();
      base = node(ExprKind::kAwait, kw);
      base->kids.push_back(parse_primary());
      base = finish(std::move(base));
    } else {
      base = parse_primary();
    }
    if (at_op("**")) {
      auto e = wrap(ExprKind::kBinOp, std::move(base));
      e->ident = take().text;
      e->kids.push_back(parse_factor());
      return finish(std::move(e));
    }
    return base;
  }

  ExprPtr parse_primary() {
    ExprPtr e = parse_atom();
    while (true) {
      if (at_op(".")) {
        ++pos_;
        auto a = wrap(ExprKind::kAttribute, std::move(e));
        a->ident = expect_identifier().text;
        e = finish(std::move(a));
      } else if (at_op("(")) {
        ++pos_;
        auto c = wrap(ExprKind::kCall, std::move(e));
        parse_call_arguments(*c);
        e = finish(std::move(c));
      } else if (at_op("[")) {
        ++pos_;
        auto s = wrap(ExprKind::kSubscript, std::move(e));
        parse_slices(*s);
        e = finish(std::move(s));
      } else {
        return e;
      }
    }
  }

  // Consumes arguments through the closing ')'.
  void parse_call_arguments(Expr& call) {
    while (!at_op(")")) {
      const Token& start = cur();
      if (accept_op("*")) {
        auto a = node(ExprKind::kStarred, start);
        a->kids.push_back(parse_expression());
        call.kids.push_back(finish(std::move(a)));
      } else if (accept_op("**")) {
        auto a = node(ExprKind::kDoubleStarred, start);
        a->kids.push_back(parse_expression());
        call.kids.push_back(finish(std::move(a)));
      } else if (at(TokenKind::kName) && peek().is_op("=")) {
        auto a = node(ExprKind::kKeyword, start);
        a->ident = expect_identifier().text;
        expect_op("=");
        a->kids.push_back(parse_expression());
        call.kids.push_back(finish(std::move(a)));
      } else {
        ExprPtr arg = parse_named_expression();
        if (at_kw("for") || (at_kw("async") && peek().is_name("for"))) {
          arg = parse_comprehension(std::move(arg), start);
        }
        call.kids.push_back(std::move(arg));
      }
      if (!accept_op(",")) break;
    }
    expect_op(")");
  }

  void parse_slices(Expr& sub) {
    do {
      if (at_op("]")) break;
      sub.kids.push_back(parse_slice());
    } while (accept_op(","));
    expect_op("]");
  }

  ExprPtr parse_slice() {
    const Token& start = cur();
    if (at_op("*")) return parse_star_expression();
    ExprPtr lower;
    if (!at_op(":")) {
      lower = parse_named_expression();
      if (!at_op(":")) return lower;
    }
    auto s = node(ExprKind::kSlice, start);
    if (lower) s->kids.push_back(std::move(lower));
    expect_op(":");
    if (!at_op(":") && !at_op("]") && !at_op(",")) {
      s->kids.push_back(parse_expression());
    }
    if (accept_op(":")) {
      if (!at_op("]") && !at_op(",")) s->kids.push_back(parse_expression());
    }
    return finish(std::move(s));
  }

  ExprPtr parse_star_target() {
    if (at_op("*")) {
      const Token& star = take();
      auto e = node(ExprKind::kStarred, star);
      e->kids.push_back(parse_star_target());
      return finish(std::move(e));
    }
    return parse_bitwise_or();
  }

  ExprPtr parse_star_targets() {
    const Token& start = cur();
    ExprPtr first = parse_star_target();
    if (!at_op(",")) return first;
    auto tup = node(ExprKind::kTuple, start);
    tup->kids.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_kw("in") || at_op("=") || !starts_expression()) break;
      tup->kids.push_back(parse_star_target());
    }
    return finish(std::move(tup));
  }

  ExprPtr parse_comprehension(ExprPtr element, const Token& start) {
    auto comp = node(ExprKind::kComprehension, start);
    comp->kids.push_back(std::move(element));
    while (at_kw("for") || (at_kw("async") && peek().is_name("for"))) {
      accept_kw("async");
      expect_kw("for");
      comp->kids.push_back(parse_star_targets());
      expect_kw("in");
      comp->kids.push_back(parse_disjunction());
      while (accept_kw("if")) comp->kids.push_back(parse_disjunction());
    }
    return finish(std::move(comp));
  }

  ExprPtr parse_yield() {
    const Token& kw = expect_kw("yield");
    auto e = node(ExprKind::kYield, kw);
    if (accept_kw("from")) {
      e->kids.push_back(parse_expression());
    } else if (starts_expression()) {
      e->kids.push_back(parse_star_expressions());
    }
    return finish(std::move(e));
  }

  ExprPtr parse_atom() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::kName: {
        if (is_keyword(t.text) && t.text != "True" && t.text != "False" &&
            t.text != "None") {
          fail("unexpected keyword");
        }
        ++pos_;
        auto e = node(ExprKind::kName, t);
        e->ident = t.text;
        return finish(std::move(e));
      }
      case TokenKind::kNumber: {
        ++pos_;
        auto e = node(ExprKind::kNumber, t);
        e->ident = t.text;
        return finish(std::move(e));
      }
      case TokenKind::kString: {
        auto e = node(ExprKind::kString, t);
        while (at(TokenKind::kString)) e->pieces.push_back(take());
        return finish(std::move(e));
      }
      case TokenKind::kOp:
        break;
      default:
        fail("expected expression");
    }
    if (t.text == "...") {
      ++pos_;
      return finish(node(ExprKind::kEllipsis, t));
    }
    if (t.text == "(") return parse_paren();
    if (t.text == "[") return parse_list();
    if (t.text == "{") return parse_brace();
    fail("expected expression");
  }

  ExprPtr parse_paren() {
    const Token& open = take();
    ExprPtr result;
    if (at_op(")")) {
      result = node(ExprKind::kTuple, open);
    } else if (at_kw("yield")) {
      result = parse_yield();
    } else {
      ExprPtr first = parse_star_expression();
      if (at_kw("for") || (at_kw("async") && peek().is_name("for"))) {
        result = parse_comprehension(std::move(first), open);
      } else if (at_op(",")) {
        result = node(ExprKind::kTuple, open);
        result->kids.push_back(std::move(first));
        while (accept_op(",")) {
          if (at_op(")")) break;
          result->kids.push_back(parse_star_expression());
        }
      } else {
        result = std::move(first);
      }
    }
    expect_op(")");
    result->begin = open.begin;
    result->line = open.line;
    result->col = open.col;
    result->parenthesized = true;
    return finish(std::move(result));
  }

  ExprPtr parse_list() {
    const Token& open = take();
    auto list = node(ExprKind::kList, open);
    if (!at_op("]")) {
      ExprPtr first = parse_star_expression();
      if (at_kw("for") || (at_kw("async") && peek().is_name("for"))) {
        list->kids.push_back(parse_comprehension(std::move(first), open));
      } else {
        list->kids.push_back(std::move(first));
        while (accept_op(",")) {
          if (at_op("]")) break;
          list->kids.push_back(parse_star_expression());
        }
      }
    }
    expect_op("]");
    return finish(std::move(list));
  }

  ExprPtr parse_dict_or_set_item(bool& is_dict, bool& decided) {
    const Token& start = cur();
    if (at_op("**")) {
      ++pos_;
      if (decided && !is_dict) fail("'**' in set display");
      is_dict = decided = true;
      auto e = node(ExprKind::kDoubleStarred, start);
      e->kids.push_back(parse_bitwise_or());
      return finish(std::move(e));
    }
    ExprPtr key = parse_star_expression();
    if (at_op(":")) {
      if (decided && !is_dict) fail("mixed dict and set display");
      is_dict = decided = true;
      ++pos_;
      auto pair = wrap(ExprKind::kTuple, std::move(key));
      pair->kids.push_back(parse_expression());
      return finish(std::move(pair));
    }
    if (decided && is_dict) fail("expected ':' in dict display");
    decided = true;
    is_dict = false;
    return key;
  }

  ExprPtr parse_brace() {
    const Token& open = take();
    bool is_dict = true;
    bool decided = false;
    auto e = node(ExprKind::kDict, open);
    if (!at_op("}")) {
      ExprPtr first = parse_dict_or_set_item(is_dict, decided);
      if (at_kw("for") || (at_kw("async") && peek().is_name("for"))) {
        e->kids.push_back(parse_comprehension(std::move(first), open));
      } else {
        e->kids.push_back(std::move(first));
        while (accept_op(",")) {
          if (at_op("}")) break;
          e->kids.push_back(parse_dict_or_set_item(is_dict, decided));
        }
      }
    }
    expect_op("}");
    e->kind = is_dict ? ExprKind::kDict : ExprKind::kSet;
    return finish(std::move(e));
  }

  std::string_view src_;
  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  bool in_pattern_ = false;
};

}  // namespace

Module parse_module(std::string source, const std::string& file_id) {
  Module m;
  m.source = std::make_unique<const std::string>(std::move(source));
  try {
    m.tokens = tokenize(*m.source);
    Parser p(*m.source, m.tokens);
    m.body = p.parse_file();
  } catch (const ParseError& e) {
    throw e.with_file(file_id);
  }
  return m;
}

ParsedExpr parse_expression(std::string source) {
  ParsedExpr out;
  out.source = std::make_unique<const std::string>(std::move(source));
  out.tokens = tokenize(*out.source);
  Parser p(*out.source, out.tokens);
  out.expr = p.parse_lone_expression();
  return out;
}

bool parses(std::string_view source) {
  try {
    parse_module(std::string(source));
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

}  // namespace logeval::python
