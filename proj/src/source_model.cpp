#include "logeval/source_model.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <stdexcept>

#include "logeval/errors.hpp"
#include "logeval/log_call.hpp"
#include "logeval/text.hpp"

namespace logeval {

using python::ExprKind;
using python::StmtKind;
using python::TokenKind;

namespace {
constexpr std::array<std::string_view, 5> kLevelNames = {
    "debug", "info", "warning", "error", "critical"};
constexpr std::array<std::string_view, 8> kControlKinds = {
    "if", "for", "else", "while", "try", "except", "with", "finally"};
}  // namespace

std::string_view to_string(LogLevel level) {
  return kLevelNames[static_cast<std::size_t>(ordinal(level))];
}

std::optional<LogLevel> level_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kLevelNames.size(); ++i) {
    if (kLevelNames[i] == name) return static_cast<LogLevel>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Origin origin) {
  return origin == Origin::kGroundTruth ? "GT" : "LLM";
}

std::optional<Origin> origin_from_string(std::string_view name) {
  if (name == "GT") return Origin::kGroundTruth;
  if (name == "LLM") return Origin::kLlm;
  return std::nullopt;
}

// ---------------------------------------------------------------- CodePath

bool CodePath::is_control_label(std::string_view label) {
  for (auto kind : kControlKinds) {
    if (label.size() > kind.size() && label.substr(0, kind.size()) == kind) {
      std::string_view digits = label.substr(kind.size());
      if (digits[0] < '1' || digits[0] > '9') continue;
      if (std::all_of(digits.begin(), digits.end(),
                      [](char c) { return c >= '0' && c <= '9'; })) {
        return true;
      }
    }
  }
  return false;
}

CodePath::CodePath(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.empty() || labels_.front() != "global") {
    throw std::invalid_argument("code path must start with 'global'");
  }
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    const auto& l = labels_[i];
    if (l.empty() || l.find('/') != std::string::npos) {
      throw std::invalid_argument("invalid code path label '" + l + "'");
    }
  }
}

CodePath CodePath::parse(std::string_view joined) {
  std::vector<std::string> labels;
  std::size_t start = 0;
  while (true) {
    std::size_t slash = joined.find('/', start);
    labels.emplace_back(joined.substr(start, slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return CodePath(std::move(labels));
}

std::string CodePath::str() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) out.push_back('/');
    out += labels_[i];
  }
  return out;
}

// -------------------------------------------------------------- extraction

ExtractionResult extract_logs_detailed(const SourceFile& file,
                                       const ExtractionConfig& cfg,
                                       Origin origin) {
  python::Module module = python::parse_module(file.content, file.file_id);
  LoggerMatcher matcher(cfg.logger_pattern);
  ExtractionResult result;
  walk_with_paths(module.body, [&](const python::Stmt& stmt,
                                   const std::vector<std::string>& labels) {
    LogCallView call = classify_statement(stmt, matcher);
    if (call.cls == CallClass::kUnresolvedLevel) {
      ++result.unrecognized_level;
      return;
    }
    if (call.cls != CallClass::kLog) return;
    LogStatement log;
    log.origin = origin;
    log.repo_id = file.repo_id;
    log.file_id = file.file_id;
    log.path = CodePath(labels);
    log.line = stmt.line;
    log.level = call.level;
    log.raw_statement = std::string(module.slice(stmt.begin, stmt.end));
    log.template_text = message_template(call, module.text());
    log.variables = message_variables(call, module.text());
    result.logs.push_back(std::move(log));
  });
  std::stable_sort(result.logs.begin(), result.logs.end(),
                   [](const LogStatement& a, const LogStatement& b) {
                     return a.line < b.line;
                   });
  return result;
}

std::vector<LogStatement> extract_logs(const SourceFile& file,
                                       const ExtractionConfig& cfg,
                                       Origin origin) {
  return extract_logs_detailed(file, cfg, origin).logs;
}

std::optional<LogCallInfo> identify_log_call(std::string_view call_text,
                                             const ExtractionConfig& cfg) {
  python::ParsedExpr parsed;
  try {
    parsed = python::parse_expression(std::string(call_text));
  } catch (const ParseError&) {
    return std::nullopt;
  }
  LoggerMatcher matcher(cfg.logger_pattern);
  LogCallView call = classify_call(*parsed.expr, matcher);
  if (call.cls != CallClass::kLog) return std::nullopt;
  LogCallInfo info;
  info.level = call.level;
  if (call.message) {
    info.message = std::string(parsed.slice(*call.message));
    if (call.message->kind == ExprKind::kString) {
      std::string body;
      for (const auto& piece : call.message->pieces) {
        body += python::string_body(piece.text);
      }
      info.message_text = body;
    } else {
      info.message_text = info.message;
    }
  }
  for (const auto* arg : call.remaining) {
    info.remaining.emplace_back(parsed.slice(*arg));
  }
  return info;
}

std::vector<std::string> extract_variables(std::string_view log_call_text,
                                           const ExtractionConfig& cfg) {
  python::ParsedExpr parsed;
  try {
    parsed = python::parse_expression(std::string(log_call_text));
  } catch (const ParseError&) {
    return {};
  }
  LoggerMatcher matcher(cfg.logger_pattern);
  LogCallView call = classify_call(*parsed.expr, matcher);
  if (call.cls != CallClass::kLog) return {};
  return message_variables(call, *parsed.source);
}

namespace {

std::string remove_placeholders(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '{') {
      int depth = 0;
      std::size_t j = i;
      for (; j < s.size(); ++j) {
        if (s[j] == '{') ++depth;
        if (s[j] == '}' && --depth == 0) break;
      }
      if (j < s.size()) {
        i = j + 1;
        continue;
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

const std::regex& format_specifier() {
  static const std::regex re(
      R"(%(\([^)]*\))?[-+ #0]?[0-9]*(\.[0-9]+)?[sdifruxXeEgGc])");
  return re;
}

}  // namespace

std::string normalize_template(std::string_view message_text) {
  std::string current(message_text);
  while (true) {
    std::string next = remove_placeholders(current);
    next = std::regex_replace(next, format_specifier(), "");
    next = text::collapse_whitespace(next);
    if (next == current) return next;
    current = std::move(next);
  }
}

// ---------------------------------------------------------------- stripping

namespace {

struct Edit {
  std::uint32_t begin;
  std::uint32_t end;
  std::string replacement;
};

bool is_docstring_like(const python::Stmt& stmt) {
  if (stmt.kind != StmtKind::kExpr || !stmt.value) return false;
  const python::Expr& v = *stmt.value;
  if (v.kind != ExprKind::kString) return false;
  return std::none_of(v.pieces.begin(), v.pieces.end(), [](const auto& t) {
    auto p = python::string_prefix(t.text);
    return p.find_first_of("fF") != std::string_view::npos;
  });
}

class Stripper {
 public:
  Stripper(const python::Module& m, const LoggerMatcher& matcher)
      : m_(m), toks_(m.tokens.tokens), matcher_(matcher) {}

  StrippedFile run(const std::string& file_id) {
    walk_blocks(m_.body, [&](const python::Block& b) { strip_block(b); });
    strip_comments();
    StrippedFile out;
    out.file_id = file_id;
    out.content = apply();
    out.removed_logs = removed_logs_;
    out.removed_comment_lines = removed_comment_lines_;
    return out;
  }

 private:
  std::uint32_t line_start(int line) const {
    const auto& starts = m_.tokens.line_starts;
    if (line - 1 < static_cast<int>(starts.size())) return starts[line - 1];
    return static_cast<std::uint32_t>(m_.text().size());
  }

  bool starts_logical_line(std::size_t tok) const {
    if (tok == 0) return true;
    auto k = toks_[tok - 1].kind;
    return k == TokenKind::kNewline || k == TokenKind::kIndent ||
           k == TokenKind::kDedent;
  }

  bool removable(const python::Stmt& s) {
    if (classify_statement(s, matcher_).cls != CallClass::kNotLog) {
      ++removed_logs_;
      return true;
    }
    if (is_docstring_like(s)) {
      removed_comment_lines_ += s.end_line - s.line + 1;
      return true;
    }
    return false;
  }

  void strip_block(const python::Block& block) {
    const auto& stmts = block.stmts;
    std::vector<bool> removed(stmts.size());
    bool any = false;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
      removed[i] = removable(*stmts[i]);
      any = any || removed[i];
    }
    if (!any) return;
    bool all = std::all_of(removed.begin(), removed.end(),
                           [](bool r) { return r; });

    // Group statements that share a logical line (a; b; c).
    std::size_t i = 0;
    bool first_group = true;
    while (i < stmts.size()) {
      std::size_t j = i;
      while (j + 1 < stmts.size() &&
             toks_[stmts[j + 1]->first_tok - 1].is_op(";")) {
        ++j;
      }
      edit_group(stmts, removed, i, j, all && first_group);
      first_group = false;
      i = j + 1;
    }
  }

  void edit_group(const std::vector<python::StmtPtr>& stmts,
                  const std::vector<bool>& removed, std::size_t first,
                  std::size_t last, bool needs_pass) {
    bool any = false;
    std::string kept;
    for (std::size_t k = first; k <= last; ++k) {
      if (removed[k]) {
        any = true;
        continue;
      }
      if (!kept.empty()) kept += "; ";
      kept += m_.slice(stmts[k]->begin, stmts[k]->end);
    }
    if (!any) return;
    const python::Stmt& head = *stmts[first];
    const python::Stmt& tail = *stmts[last];
    std::size_t after = tail.last_tok + 1;
    std::uint32_t group_end = tail.end;
    if (toks_[after].is_op(";")) {
      group_end = toks_[after].end;
      ++after;
    }
    if (needs_pass) kept = "pass";
    if (kept.empty() && starts_logical_line(head.first_tok)) {
      const python::Token& nl = toks_[after];
      edits_.push_back({line_start(head.line), line_start(nl.line + 1), ""});
      return;
    }
    edits_.push_back({head.begin, group_end, kept});
  }

  void strip_comments() {
    std::string_view src = m_.text();
    for (const auto& c : m_.tokens.comments) {
      std::uint32_t ls = line_start(c.line);
      std::uint32_t before = c.begin;
      while (before > ls && (src[before - 1] == ' ' || src[before - 1] == '\t' ||
                             src[before - 1] == '\f')) {
        --before;
      }
      ++removed_comment_lines_;
      if (before == ls) {
        edits_.push_back({ls, line_start(c.line + 1), ""});
      } else {
        edits_.push_back({before, c.end, ""});
      }
    }
  }

  std::string apply() {
    std::stable_sort(edits_.begin(), edits_.end(),
                     [](const Edit& a, const Edit& b) {
                       return a.begin < b.begin;
                     });
    std::string_view src = m_.text();
    std::string out;
    out.reserve(src.size());
    std::uint32_t cursor = 0;
    for (const auto& e : edits_) {
      if (e.begin < cursor) continue;  // inside an earlier deletion
      out.append(src.substr(cursor, e.begin - cursor));
      out += e.replacement;
      cursor = e.end;
    }
    out.append(src.substr(cursor));
    return out;
  }

  const python::Module& m_;
  const std::vector<python::Token>& toks_;
  const LoggerMatcher& matcher_;
  std::vector<Edit> edits_;
  int removed_logs_ = 0;
  int removed_comment_lines_ = 0;
};

}  // namespace

StrippedFile strip_file(const SourceFile& file, const ExtractionConfig& cfg) {
  python::Module module = python::parse_module(file.content, file.file_id);
  LoggerMatcher matcher(cfg.logger_pattern);
  return Stripper(module, matcher).run(file.file_id);
}

bool imports_logging(const SourceFile& file) {
  python::Module module = python::parse_module(file.content, file.file_id);
  bool found = false;
  walk_with_paths(module.body, [&](const python::Stmt& stmt,
                                   const std::vector<std::string>&) {
    for (const auto& mod : stmt.imported_modules) {
      if (mod == "logging" || mod.rfind("logging.", 0) == 0) found = true;
    }
  });
  return found;
}

}  // namespace logeval
