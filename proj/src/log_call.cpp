#include "logeval/log_call.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "logeval/text.hpp"

namespace logeval {

using python::ClauseKind;
using python::Expr;
using python::ExprKind;
using python::StmtKind;

LoggerMatcher::LoggerMatcher(std::string_view pattern) {
  auto flags = std::regex::ECMAScript | std::regex::optimize;
  if (pattern.substr(0, 4) == "(?i)") {
    flags |= std::regex::icase;
    pattern.remove_prefix(4);
  }
  re_ = std::regex(std::string(pattern), flags);
}

bool LoggerMatcher::matches(std::string_view identifier) const {
  return std::regex_search(identifier.begin(), identifier.end(), re_);
}

namespace {

std::optional<LogLevel> level_of_method(std::string_view method) {
  if (method == "debug") return LogLevel::kDebug;
  if (method == "info") return LogLevel::kInfo;
  if (method == "warning" || method == "warn") return LogLevel::kWarning;
  if (method == "error" || method == "exception") return LogLevel::kError;
  if (method == "critical") return LogLevel::kCritical;
  return std::nullopt;
}

// Constant levels accepted as the first argument of `.log(...)`.
std::optional<LogLevel> level_of_constant(const Expr& e) {
  std::string_view id;
  if (e.kind == ExprKind::kName || e.kind == ExprKind::kAttribute) {
    id = e.ident;
    if (id == "DEBUG") return LogLevel::kDebug;
    if (id == "INFO") return LogLevel::kInfo;
    if (id == "WARNING" || id == "WARN") return LogLevel::kWarning;
    if (id == "ERROR") return LogLevel::kError;
    if (id == "CRITICAL" || id == "FATAL") return LogLevel::kCritical;
    return std::nullopt;
  }
  if (e.kind == ExprKind::kNumber) {
    id = e.ident;
    if (id == "10") return LogLevel::kDebug;
    if (id == "20") return LogLevel::kInfo;
    if (id == "30") return LogLevel::kWarning;
    if (id == "40") return LogLevel::kError;
    if (id == "50") return LogLevel::kCritical;
  }
  return std::nullopt;
}

bool receiver_is_logger(const Expr& receiver, const LoggerMatcher& m) {
  switch (receiver.kind) {
    case ExprKind::kName:
    case ExprKind::kAttribute:
      return m.matches(receiver.ident);
    case ExprKind::kCall: {
      // logging.getLogger(__name__).info(...)
      const Expr& fn = *receiver.kids[0];
      return (fn.kind == ExprKind::kName || fn.kind == ExprKind::kAttribute) &&
             fn.ident == "getLogger";
    }
    default:
      return false;
  }
}

bool is_fstring_piece(const python::Token& t) {
  auto prefix = python::string_prefix(t.text);
  return prefix.find_first_of("fF") != std::string_view::npos;
}

bool is_raw_piece(const python::Token& t) {
  auto prefix = python::string_prefix(t.text);
  return prefix.find_first_of("rR") != std::string_view::npos;
}

std::string decode_simple_escapes(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\' || i + 1 >= body.size()) {
      out.push_back(c);
      continue;
    }
    char n = body[i + 1];
    switch (n) {
      case 'n':
      case 't':
      case 'r':
        out.push_back(' ');
        ++i;
        break;
      case '\\':
      case '\'':
      case '"':
        out.push_back(n);
        ++i;
        break;
      case '\n':
        ++i;
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string literal_text(const Expr& str) {
  std::string out;
  for (const auto& piece : str.pieces) {
    std::string_view body = python::string_body(piece.text);
    if (is_raw_piece(piece)) {
      out.append(body);
    } else {
      out += decode_simple_escapes(body);
    }
  }
  return out;
}

struct Located {
  std::uint32_t offset;
  std::string text;
};

// Placeholder expressions of one f-string token body.
void fstring_placeholders(std::string_view body, std::uint32_t base,
                          std::vector<Located>& out) {
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
      i += 2;
      continue;
    }
    if (c != '{') {
      ++i;
      continue;
    }
    std::size_t start = i + 1;
    std::size_t j = start;
    int nesting = 0;
    char quote = 0;
    std::size_t expr_end = std::string_view::npos;
    while (j < body.size()) {
      char d = body[j];
      if (quote) {
        if (d == quote) quote = 0;
        ++j;
        continue;
      }
      if (d == '\'' || d == '"') {
        quote = d;
      } else if (d == '(' || d == '[' || d == '{') {
        ++nesting;
      } else if (d == ')' || d == ']' || d == '}') {
        if (nesting == 0) {
          if (expr_end == std::string_view::npos) expr_end = j;
          break;
        }
        --nesting;
      } else if (nesting == 0 && expr_end == std::string_view::npos) {
        if (d == '!' && (j + 1 >= body.size() || body[j + 1] != '=')) {
          expr_end = j;
        } else if (d == ':') {
          expr_end = j;
        }
      }
      ++j;
    }
    if (expr_end == std::string_view::npos) expr_end = j;
    std::string expr(body.substr(start, expr_end - start));
    std::string_view trimmed = text::trim(expr);
    if (!trimmed.empty() && trimmed.back() == '=' && trimmed.size() >= 2) {
      char before = trimmed[trimmed.size() - 2];
      if (before != '=' && before != '!' && before != '<' && before != '>') {
        trimmed.remove_suffix(1);
      }
    }
    std::string collapsed = text::collapse_whitespace(trimmed);
    if (!collapsed.empty()) {
      out.push_back({static_cast<std::uint32_t>(base + start), collapsed});
    }
    i = j + 1;
  }
}

void fstring_variables(const Expr& str, std::vector<Located>& out) {
  for (const auto& piece : str.pieces) {
    if (!is_fstring_piece(piece)) continue;
    std::string_view prefix = python::string_prefix(piece.text);
    std::string_view rest = piece.text.substr(prefix.size());
    std::size_t qlen = (rest.substr(0, 3) == "'''" || rest.substr(0, 3) == "\"\"\"") ? 3 : 1;
    fstring_placeholders(python::string_body(piece.text),
                         piece.begin + static_cast<std::uint32_t>(prefix.size() + qlen),
                         out);
  }
}

Located located(const Expr& e, std::string_view src) {
  return {e.begin,
          text::collapse_whitespace(src.substr(e.begin, e.end - e.begin))};
}

bool is_string(const Expr* e) { return e && e->kind == ExprKind::kString; }

bool is_format_call(const Expr* e) {
  return e && e->kind == ExprKind::kCall &&
         e->kids[0]->kind == ExprKind::kAttribute &&
         e->kids[0]->ident == "format" &&
         is_string(e->kids[0]->kids[0].get());
}

bool is_percent_format(const Expr* e) {
  return e && e->kind == ExprKind::kBinOp && e->ident == "%" &&
         is_string(e->kids[0].get());
}

void flatten_concat(const Expr& e, std::vector<const Expr*>& out,
                    bool root = true) {
  if (e.kind == ExprKind::kBinOp && e.ident == "+" &&
      (root || !e.parenthesized)) {
    for (const auto& k : e.kids) flatten_concat(*k, out, false);
    return;
  }
  out.push_back(&e);
}

bool is_string_concat(const Expr* e) {
  if (!e || e->kind != ExprKind::kBinOp || e->ident != "+") return false;
  std::vector<const Expr*> parts;
  flatten_concat(*e, parts);
  return std::any_of(parts.begin(), parts.end(),
                     [](const Expr* p) { return is_string(p); });
}

}  // namespace

LogCallView classify_call(const Expr& expr, const LoggerMatcher& m) {
  LogCallView view;
  if (expr.kind != ExprKind::kCall) return view;
  const Expr& fn = *expr.kids[0];
  if (fn.kind != ExprKind::kAttribute) return view;
  std::string_view method = fn.ident;
  bool is_log_method = method == "log";
  auto level = level_of_method(method);
  if (!level && !is_log_method) return view;
  if (!receiver_is_logger(*fn.kids[0], m)) return view;

  std::vector<const Expr*> positional;
  const Expr* msg_keyword = nullptr;
  const Expr* level_keyword = nullptr;
  for (std::size_t i = 1; i < expr.kids.size(); ++i) {
    const Expr* arg = expr.kids[i].get();
    if (arg->kind == ExprKind::kKeyword) {
      if (arg->ident == "msg") msg_keyword = arg->kids[0].get();
      if (arg->ident == "level") level_keyword = arg->kids[0].get();
      continue;
    }
    if (arg->kind == ExprKind::kDoubleStarred) continue;
    positional.push_back(arg);
  }

  std::size_t msg_index = 0;
  view.call = &expr;
  if (is_log_method) {
    const Expr* level_arg = level_keyword;
    if (!level_arg && !positional.empty()) {
      level_arg = positional[0];
      msg_index = 1;
    }
    auto resolved = level_arg ? level_of_constant(*level_arg) : std::nullopt;
    if (!resolved) {
      view.cls = CallClass::kUnresolvedLevel;
      return view;
    }
    level = resolved;
  }
  view.cls = CallClass::kLog;
  view.level = *level;
  if (msg_keyword) {
    view.message = msg_keyword;
  } else if (positional.size() > msg_index) {
    view.message = positional[msg_index];
    ++msg_index;
  }
  for (std::size_t i = msg_index; i < positional.size(); ++i) {
    view.remaining.push_back(positional[i]);
  }
  return view;
}

LogCallView classify_statement(const python::Stmt& stmt,
                               const LoggerMatcher& m) {
  if (stmt.kind != StmtKind::kExpr || !stmt.value) return {};
  return classify_call(*stmt.value, m);
}

std::string message_template(const LogCallView& call, std::string_view src) {
  const Expr* msg = call.message;
  std::string raw;
  if (is_string(msg)) {
    raw = literal_text(*msg);
  } else if (is_format_call(msg)) {
    raw = literal_text(*msg->kids[0]->kids[0]);
  } else if (is_percent_format(msg)) {
    raw = literal_text(*msg->kids[0]);
  } else if (is_string_concat(msg)) {
    std::vector<const Expr*> parts;
    flatten_concat(*msg, parts);
    for (const Expr* p : parts) {
      if (is_string(p)) {
        raw += literal_text(*p);
        raw += ' ';
      }
    }
  }
  (void)src;
  return normalize_template(raw);
}

std::vector<std::string> message_variables(const LogCallView& call,
                                           std::string_view src) {
  std::vector<Located> found;
  const Expr* msg = call.message;
  if (is_string(msg)) {
    fstring_variables(*msg, found);
  } else if (is_format_call(msg)) {
    fstring_variables(*msg->kids[0]->kids[0], found);
    for (std::size_t i = 1; i < msg->kids.size(); ++i) {
      const Expr* arg = msg->kids[i].get();
      if (arg->kind == ExprKind::kKeyword) arg = arg->kids[0].get();
      found.push_back(located(*arg, src));
    }
  } else if (is_percent_format(msg)) {
    fstring_variables(*msg->kids[0], found);
    const Expr* rhs = msg->kids[1].get();
    if (rhs->kind == ExprKind::kTuple) {
      for (const auto& k : rhs->kids) found.push_back(located(*k, src));
    } else {
      found.push_back(located(*rhs, src));
    }
  } else if (is_string_concat(msg)) {
    std::vector<const Expr*> parts;
    flatten_concat(*msg, parts);
    for (const Expr* p : parts) {
      if (is_string(p)) {
        fstring_variables(*p, found);
      } else {
        found.push_back(located(*p, src));
      }
    }
  }
  for (const Expr* arg : call.remaining) found.push_back(located(*arg, src));

  std::stable_sort(found.begin(), found.end(),
                   [](const Located& a, const Located& b) {
                     return a.offset < b.offset;
                   });
  std::vector<std::string> out;
  for (auto& f : found) {
    if (std::find(out.begin(), out.end(), f.text) == out.end()) {
      out.push_back(std::move(f.text));
    }
  }
  return out;
}

namespace {

struct Frame {
  std::string label;
  std::unordered_map<std::string_view, int> counters;
};

class PathWalker {
 public:
  explicit PathWalker(const PathVisitor& visit) : visit_(visit) {
    stack_.push_back(Frame{"global", {}});
    labels_.push_back("global");
  }

  void walk(const python::Block& block) {
    for (const auto& stmt : block.stmts) {
      visit_(*stmt, labels_);
      descend(*stmt);
    }
  }

 private:
  void push_named(std::string_view name) {
    stack_.push_back(Frame{std::string(name), {}});
    labels_.push_back(std::string(name));
  }

  void push_numbered(std::string_view kind) {
    int n = ++stack_.back().counters[kind];
    std::string label = std::string(kind) + std::to_string(n);
    stack_.push_back(Frame{label, {}});
    labels_.push_back(std::move(label));
  }

  void pop() {
    stack_.pop_back();
    labels_.pop_back();
  }

  static std::string_view control_label(StmtKind stmt, ClauseKind clause) {
    switch (clause) {
      case ClauseKind::kElif:
        return "if";
      case ClauseKind::kElse:
        return "else";
      case ClauseKind::kExcept:
        return "except";
      case ClauseKind::kFinally:
        return "finally";
      case ClauseKind::kCase:
        return {};
      case ClauseKind::kBody:
        break;
    }
    switch (stmt) {
      case StmtKind::kIf:
        return "if";
      case StmtKind::kFor:
        return "for";
      case StmtKind::kWhile:
        return "while";
      case StmtKind::kTry:
        return "try";
      case StmtKind::kWith:
        return "with";
      default:
        return {};
    }
  }

  void descend(const python::Stmt& stmt) {
    if (stmt.kind == StmtKind::kFunctionDef ||
        stmt.kind == StmtKind::kClassDef) {
      push_named(stmt.name);
      walk(stmt.clauses.front().block);
      pop();
      return;
    }
    for (const auto& clause : stmt.clauses) {
      std::string_view label = control_label(stmt.kind, clause.kind);
      if (label.empty()) {
        walk(clause.block);
        continue;
      }
      push_numbered(label);
      walk(clause.block);
      pop();
    }
  }

  const PathVisitor& visit_;
  std::vector<Frame> stack_;
  std::vector<std::string> labels_;
};

}  // namespace

void walk_with_paths(const python::Block& root, const PathVisitor& visit) {
  PathWalker(visit).walk(root);
}

void walk_blocks(const python::Block& root,
                 const std::function<void(const python::Block&)>& visit) {
  visit(root);
  for (const auto& stmt : root.stmts) {
    for (const auto& clause : stmt->clauses) walk_blocks(clause.block, visit);
  }
}

}  // namespace logeval
