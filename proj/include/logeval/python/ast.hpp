#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "logeval/python/lexer.hpp"

namespace logeval::python {

enum class ExprKind : std::uint8_t {
  kName,
  kNumber,
  kString,  // one or more adjacent string tokens, see Expr::pieces
  kEllipsis,
  kAttribute,   // kids[0].ident
  kCall,        // kids[0](kids[1..])
  kSubscript,   // kids[0][kids[1..]]
  kSlice,
  kBinOp,       // ident holds the operator
  kUnaryOp,
  kBoolOp,
  kCompare,
  kIfExp,
  kLambda,
  kNamedExpr,
  kStarred,       // *kids[0]
  kDoubleStarred, // **kids[0]
  kKeyword,       // ident=kids[0] inside a call
  kTuple,
  kList,
  kSet,
  kDict,
  kComprehension,  // generator / list / set / dict comprehension
  kAwait,
  kYield,
  kAs,  // pattern capture inside `case` clauses
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  int line = 0;
  int col = 0;
  std::string_view ident;
  std::vector<ExprPtr> kids;
  std::vector<Token> pieces;  // string tokens of a kString node
  bool parenthesized = false;
};

enum class StmtKind : std::uint8_t {
  kExpr,
  kAssign,
  kAugAssign,
  kAnnAssign,
  kPass,
  kBreak,
  kContinue,
  kReturn,
  kRaise,
  kGlobal,
  kNonlocal,
  kDel,
  kAssert,
  kImport,
  kImportFrom,
  kIf,
  kFor,
  kWhile,
  kTry,
  kWith,
  kFunctionDef,
  kClassDef,
  kMatch,
};

enum class ClauseKind : std::uint8_t {
  kBody,     // the leading suite of a compound statement
  kElif,
  kElse,
  kExcept,
  kFinally,
  kCase,
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Block {
  std::vector<StmtPtr> stmts;
  bool inline_suite = false;  // `if x: a; b` form
};

struct Clause {
  ClauseKind kind;
  int line = 0;
  Block block;
};

struct Stmt {
  StmtKind kind;
  std::uint32_t begin = 0;  // first token
  std::uint32_t end = 0;    // end of last token of the header / simple stmt
  std::size_t first_tok = 0;
  std::size_t last_tok = 0;  // simple statements only
  int line = 0;
  int end_line = 0;
  bool is_async = false;
  std::string_view name;       // def / class name
  ExprPtr value;               // expression statement payload
  std::vector<Clause> clauses; // compound statements
  std::vector<std::string> imported_modules;
};

struct Module {
  std::unique_ptr<const std::string> source;
  TokenStream tokens;
  Block body;

  std::string_view text() const { return *source; }
  std::string_view slice(std::uint32_t begin, std::uint32_t end) const {
    return text().substr(begin, end - begin);
  }
  std::string_view slice(const Expr& e) const { return slice(e.begin, e.end); }
};

// Parses a full module. Throws ParseError carrying `file_id`.
Module parse_module(std::string source, const std::string& file_id = "");

// Parses a standalone expression (one logical line). Used for parsing
// call text handed in by callers.
struct ParsedExpr {
  std::unique_ptr<const std::string> source;
  TokenStream tokens;
  ExprPtr expr;
  std::string_view slice(const Expr& e) const {
    return std::string_view(*source).substr(e.begin, e.end - e.begin);
  }
};
ParsedExpr parse_expression(std::string source);

// True when `source` parses as a Python 3 module.
bool parses(std::string_view source);

}  // namespace logeval::python
