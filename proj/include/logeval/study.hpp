#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "logeval/pairing.hpp"

namespace logeval::study {

enum class Category { kUnderlogging, kOverlogging, kDifferentLevel, kDifferentVariables };
inline constexpr std::array<Category, 4> kCategories = {
    Category::kUnderlogging, Category::kOverlogging, Category::kDifferentLevel,
    Category::kDifferentVariables};

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);

struct CategorizedRecord {
  Category category = Category::kOverlogging;
  std::string repo_id;
  std::string file_id;
  CodePath path;
  std::optional<LogStatement> gt;
  std::optional<LogStatement> llm;
  // Set when the same pair also lands in the other of DifferentLevel /
  // DifferentVariables.
  bool multi_flag = false;

  std::optional<int> gt_line() const;
  std::optional<int> llm_line() const;
};

// Records in canonical order: category, file, path, GT line, LLM line.
std::vector<CategorizedRecord> categorize(const PairingOutcome& outcome);

std::map<Category, std::size_t> category_counts(const std::vector<CategorizedRecord>& records);

// Two-sided standard normal quantile for the given confidence level.
double z_score(double confidence);

std::size_t sample_size(std::size_t population, double confidence = 0.95,
                        double margin = 0.05);

struct SamplePlan {
  double confidence = 0.95;
  double margin = 0.05;
  std::size_t total_n = 0;
  std::map<Category, std::size_t> allocation;
  std::uint64_t seed = 0;
};

// Largest-remainder proportional allocation of n over the strata. Ties on the
// remainder go to the earlier category.
std::map<Category, std::size_t> allocate(const std::map<Category, std::size_t>& strata,
                                         std::size_t n);

SamplePlan make_plan(const std::vector<CategorizedRecord>& records, std::uint64_t seed,
                     double confidence = 0.95, double margin = 0.05);

std::vector<CategorizedRecord> stratified_sample(const std::vector<CategorizedRecord>& records,
                                                 const SamplePlan& plan);

// Source text of the GT (original) or LLM (generated) version of a file.
using SourceLookup =
    std::function<std::optional<std::string>(Origin origin, const std::string& file_id)>;

// Lines [line-radius, line+radius] clipped to the file, each prefixed with its
// line number.
std::string context_snippet(std::string_view source, int line, int radius = 5);

struct ReviewRow {
  std::string category;
  std::string repo;
  std::string file;
  std::string path;
  std::string gt_level;
  std::string llm_level;
  std::string gt_text;
  std::string llm_text;
  std::string gt_vars;
  std::string llm_vars;
  std::string gt_context;
  std::string llm_context;
  std::string annotation;
};

inline constexpr std::array<std::string_view, 13> kReviewColumns = {
    "category", "repo",     "file",     "path",       "gt_level",    "llm_level",  "gt_text",
    "llm_text", "gt_vars",  "llm_vars", "gt_context", "llm_context", "annotation"};

// Throws MissingSource when a referenced file cannot be resolved.
std::vector<ReviewRow> review_rows(const std::vector<CategorizedRecord>& sample,
                                   const SourceLookup& sources);

void write_review_csv(std::ostream& out, const std::vector<ReviewRow>& rows);
void write_review_jsonl(std::ostream& out, const std::vector<ReviewRow>& rows);

}  // namespace logeval::study
