#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "logeval/errors.hpp"
#include "logeval/source_model.hpp"

namespace logeval::corpus {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with optional fraction and a
// trailing "Z" or "+HH:MM"/"-HH:MM" offset. Throws ConfigError.
Timestamp parse_timestamp(std::string_view s);
Date parse_date(std::string_view s);
std::string format_timestamp(Timestamp t);
std::string format_date(Date d);

struct RepoRecord {
  std::string repo_id;  // owner/name
  long long stars = 0;
  long long contributors = 0;
  Timestamp last_push{};
  Timestamp created_at{};
  std::string primary_language;
  long long commits = 0;

  bool operator==(const RepoRecord&) const = default;
};

nlohmann::json to_json(const RepoRecord& r);
// Throws ConfigError on missing or malformed fields.
RepoRecord repo_from_json(const nlohmann::json& j);

struct SelectionCriteria {
  std::string language = "Python";
  long long min_stars = 50;
  long long min_contributors = 3;
  long long max_days_since_push = 365;
};

long long days_between(Timestamp earlier, Date later);

std::vector<RepoRecord> select_repos(const std::vector<RepoRecord>& records,
                                     const SelectionCriteria& criteria, Date as_of);

class RateLimited : public Error {
 public:
  RateLimited(const std::string& what, std::chrono::seconds retry_after)
      : Error(what), retry_after_(retry_after) {}
  std::chrono::seconds retry_after() const { return retry_after_; }

 private:
  std::chrono::seconds retry_after_;
};

class AuthError : public Error {
 public:
  using Error::Error;
};

struct Unresolved {
  std::string repo_id;
  std::string reason;
};

struct FetchResult {
  std::vector<RepoRecord> records;
  std::vector<Unresolved> unresolved;
};

// Reads <dir>/<owner>__<name>.json for every id.
FetchResult fetch_metadata_offline(const std::vector<std::string>& repo_ids,
                                   const std::filesystem::path& fixture_dir);

struct GithubOptions {
  std::string api_base = "https://api.github.com";
  std::string token;
  int max_rate_limit_waits = 2;
  std::chrono::seconds max_wait{120};
  std::function<void(std::chrono::seconds)> sleep;  // defaults to a real sleep
  std::chrono::milliseconds timeout{30000};

  // GITHUB_API_URL and GITHUB_TOKEN.
  static GithubOptions from_env();
};

// Throws AuthError on 401/403 without rate-limit headers and RateLimited when
// the limit persists after the allowed waits.
FetchResult fetch_metadata_live(const std::vector<std::string>& repo_ids,
                                const GithubOptions& options);

// Ids from a repos.txt: one owner/name per line, '#' comments and blanks ignored.
std::vector<std::string> read_repo_list(const std::filesystem::path& path);

struct CollectedFile {
  SourceFile file;
  bool invalid_utf8 = false;
};

struct CollectResult {
  std::vector<CollectedFile> files;
  std::vector<std::string> io_errors;
};

// Replaces every invalid UTF-8 sequence with U+FFFD. Returns whether any
// replacement happened.
bool sanitize_utf8(std::string& s);

// Every *.py under `dir` (skipping .git), ids relative to `dir` with '/'
// separators, sorted.
CollectResult collect_files(const std::filesystem::path& dir, const std::string& repo_id);

struct FilterResult {
  std::vector<SourceFile> kept;
  std::vector<std::string> parse_failures;
};

FilterResult filter_logged_files(const std::vector<SourceFile>& files,
                                 const ExtractionConfig& cfg = {});

struct FieldStats {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

FieldStats field_stats(std::vector<double> values);

// stars, commits, contributors, days_since_push, age_years.
std::map<std::string, FieldStats> repo_stats(const std::vector<RepoRecord>& repos, Date as_of);

struct CorpusManifest {
  std::vector<RepoRecord> selected_repos;
  std::vector<std::string> qualifying_files;
  Date snapshot_date{};
  std::map<std::string, FieldStats> stats;
};

nlohmann::json to_json(const CorpusManifest& m);

}  // namespace logeval::corpus
