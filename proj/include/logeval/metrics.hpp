#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "logeval/pairing.hpp"

namespace logeval::metrics {

using Tokens = std::vector<std::string>;

// ----------------------------------------------------------- placement

struct PathCounts {
  std::size_t total = 0;
  std::size_t over = 0;    // GT == 0, LLM > 0
  std::size_t under = 0;   // GT > 0, LLM == 0
  std::size_t agree = 0;   // both > 0
  std::size_t gt_paths = 0;
};

struct PlacementReport {
  double coverage = 0.0;
  double quantified_coverage_raw = 0.0;
  double quantified_coverage_capped = 0.0;
  // Same ratios restricted to paths where both sides logged.
  double quantified_coverage_raw_agree = 0.0;
  double quantified_coverage_capped_agree = 0.0;
  double overlogging_rate = 0.0;
  double underlogging_rate = 0.0;
  double agree_rate = 0.0;
  double llm_to_gt_log_ratio = 0.0;
  std::size_t gt_logs = 0;
  std::size_t llm_logs = 0;
  PathCounts path_counts;
};

// Throws EmptyCorpus on an empty table.
PlacementReport placement_metrics(const std::vector<PathBucket>& table);

// ---------------------------------------------------------- ingredients

// The pairs that carry an LLM log.
std::vector<const LogPair*> llm_present(const std::vector<LogPair>& pairs);

// Both throw NoPairs when `pairs` is empty.
double level_accuracy(const std::vector<const LogPair*>& pairs);
double aod(const std::vector<const LogPair*>& pairs);

// 1 - |a - s| / max(a, 4 - a) for GT ordinal a and LLM ordinal s.
double ordinal_closeness(LogLevel gt, LogLevel llm);

// Absent when the GT log has no variables.
std::optional<double> variable_coverage(const LogPair& pair);

// Candidate = LLM text, reference = GT text.
double bleu(const Tokens& candidate, const Tokens& reference, int max_order);

enum class RougeVariant { kOne, kTwo, kL };
double rouge(const Tokens& candidate, const Tokens& reference,
             RougeVariant variant);

double meteor(const Tokens& candidate, const Tokens& reference);

double ntlev(const Tokens& candidate, const Tokens& reference);

// Tokens used for all text metrics.
Tokens text_tokens(std::string_view normalized_template);

struct LevelReport {
  double l_acc = 0.0;
  double aod = 0.0;
  std::size_t n_pairs = 0;
};

struct TextReport {
  double bleu_1 = 0.0;
  double bleu_2 = 0.0;
  double bleu_4 = 0.0;
  double meteor = 0.0;
  double rouge_1 = 0.0;
  double rouge_2 = 0.0;
  double rouge_l = 0.0;
  double ntlev = 0.0;
  std::size_t n_pairs = 0;
};

struct PairMetrics {
  const LogPair* pair = nullptr;
  bool level_match = false;
  double ordinal_closeness = 0.0;
  std::optional<double> variable_coverage;
  double bleu_1 = 0.0;
  double bleu_2 = 0.0;
  double bleu_4 = 0.0;
  double meteor = 0.0;
  double rouge_1 = 0.0;
  double rouge_2 = 0.0;
  double rouge_l = 0.0;
  double ntlev = 0.0;
};

PairMetrics score_pair(const LogPair& pair);

struct IngredientReport {
  LevelReport level;
  std::optional<double> variable_coverage;  // absent if no pair has GT vars
  std::size_t variable_coverage_pairs = 0;
  TextReport text;
  std::vector<PairMetrics> per_pair;
};

// Throws NoPairs when no pair carries an LLM log.
IngredientReport ingredient_report(const std::vector<LogPair>& pairs);

}  // namespace logeval::metrics
