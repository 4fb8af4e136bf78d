#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logeval {

// Python logging severities in ascending order.
enum class LogLevel : int {
  kDebug = 0,
  kInfo = 1,
  kWarning = 2,
  kError = 3,
  kCritical = 4,
};

inline constexpr int kMaxLevelOrdinal = 4;

inline int ordinal(LogLevel level) { return static_cast<int>(level); }
std::string_view to_string(LogLevel level);
std::optional<LogLevel> level_from_string(std::string_view name);

enum class Origin { kGroundTruth, kLlm };
std::string_view to_string(Origin origin);
std::optional<Origin> origin_from_string(std::string_view name);

struct SourceFile {
  std::string file_id;  // repo-relative path
  std::string content;
  std::string repo_id;
};

// Address of a log inside the block structure of a file, e.g.
// global/Analysis/__init__/if2.
class CodePath {
 public:
  CodePath() : labels_{"global"} {}
  // Throws std::invalid_argument when labels violate the path invariants.
  explicit CodePath(std::vector<std::string> labels);
  static CodePath parse(std::string_view joined);

  const std::vector<std::string>& labels() const { return labels_; }
  std::string str() const;

  auto operator<=>(const CodePath&) const = default;
  bool operator==(const CodePath&) const = default;

  // True for labels of the form if1, else3, finally2, ...
  static bool is_control_label(std::string_view label);

 private:
  std::vector<std::string> labels_;
};

struct LogStatement {
  Origin origin = Origin::kGroundTruth;
  std::string repo_id;
  std::string file_id;
  CodePath path;
  int line = 1;
  LogLevel level = LogLevel::kInfo;
  std::string raw_statement;
  std::string template_text;
  std::vector<std::string> variables;

  bool operator==(const LogStatement&) const = default;
};

struct StrippedFile {
  std::string file_id;
  std::string content;
  int removed_logs = 0;
  int removed_comment_lines = 0;
};

struct ExtractionConfig {
  // Matched against the last identifier of the call receiver. A leading
  // "(?i)" makes the match case-insensitive.
  std::string logger_pattern = "(?i)^_{0,2}log(ger|ging)?$";
};

struct ExtractionResult {
  std::vector<LogStatement> logs;
  int unrecognized_level = 0;  // `.log(expr, ...)` calls with a dynamic level
};

// Throws ParseError when the content does not parse.
ExtractionResult extract_logs_detailed(const SourceFile& file,
                                       const ExtractionConfig& cfg,
                                       Origin origin = Origin::kGroundTruth);

std::vector<LogStatement> extract_logs(const SourceFile& file,
                                       const ExtractionConfig& cfg,
                                       Origin origin = Origin::kGroundTruth);

struct LogCallInfo {
  LogLevel level;
  std::string message;       // source text of the message argument
  std::string message_text;  // literal text when the message is a string
  std::vector<std::string> remaining;  // source text of later arguments
};

// Classifies a call expression given as source text. Returns nullopt for
// anything that is not a recognizable logging call (including text that is
// not a call at all).
std::optional<LogCallInfo> identify_log_call(std::string_view call_text,
                                             const ExtractionConfig& cfg = {});

// Variables referenced by a log call: f-string placeholders, %-style
// arguments and `.format(...)` arguments, in source order, deduplicated.
std::vector<std::string> extract_variables(std::string_view log_call_text,
                                           const ExtractionConfig& cfg = {});

// Drops %-specifiers and {...} placeholders and collapses whitespace.
std::string normalize_template(std::string_view message_text);

// Removes log statements, comments and docstrings. Throws ParseError.
StrippedFile strip_file(const SourceFile& file,
                        const ExtractionConfig& cfg = {});

// True when the file imports the standard `logging` package in any form.
// Throws ParseError.
bool imports_logging(const SourceFile& file);

}  // namespace logeval
