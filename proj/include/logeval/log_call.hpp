#pragma once

// Syntax-tree level machinery shared by extraction, stripping and the
// mock provider.

#include <functional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "logeval/python/ast.hpp"
#include "logeval/source_model.hpp"

namespace logeval {

class LoggerMatcher {
 public:
  explicit LoggerMatcher(std::string_view pattern);
  bool matches(std::string_view identifier) const;

 private:
  std::regex re_;
};

enum class CallClass { kNotLog, kLog, kUnresolvedLevel };

struct LogCallView {
  CallClass cls = CallClass::kNotLog;
  LogLevel level = LogLevel::kInfo;
  const python::Expr* call = nullptr;
  const python::Expr* message = nullptr;  // may be null (no message given)
  std::vector<const python::Expr*> remaining;  // positional args after msg
};

LogCallView classify_call(const python::Expr& expr, const LoggerMatcher& m);

// Log call carried by an expression statement, if any.
LogCallView classify_statement(const python::Stmt& stmt,
                               const LoggerMatcher& m);

std::string message_template(const LogCallView& call, std::string_view src);
std::vector<std::string> message_variables(const LogCallView& call,
                                           std::string_view src);

// Depth-first walk over every statement, reporting the block labels that
// enclose it (first label is always "global").
using PathVisitor =
    std::function<void(const python::Stmt&, const std::vector<std::string>&)>;
void walk_with_paths(const python::Block& root, const PathVisitor& visit);

// Calls `visit` for every block (suite) in the tree, outermost first.
void walk_blocks(const python::Block& root,
                 const std::function<void(const python::Block&)>& visit);

}  // namespace logeval
