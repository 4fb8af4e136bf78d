#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logeval/source_model.hpp"

namespace logeval {

struct PathKey {
  std::string file_id;
  CodePath path;

  auto operator<=>(const PathKey&) const = default;
  bool operator==(const PathKey&) const = default;
};

using PathIndex = std::map<PathKey, std::vector<LogStatement>>;

enum class Scenario { kOneOne, kOneN, kNOne, kNN, kGtOnly };
std::string_view to_string(Scenario s);
std::optional<Scenario> scenario_from_string(std::string_view s);
Scenario scenario_for(std::size_t gt_count, std::size_t llm_count);

struct LogPair {
  LogStatement gt;
  std::optional<LogStatement> llm;
  std::optional<double> similarity;
  Scenario scenario = Scenario::kGtOnly;
};

struct UnpairedLlm {
  LogStatement log;
  // true: lost the argmax at a path the GT also logged.
  // false: the GT has no log at this path (overlogging).
  bool excluded = false;
};

struct PathBucket {
  PathKey key;
  std::size_t gt_count = 0;
  std::size_t llm_count = 0;
};

struct PairingOutcome {
  std::vector<LogPair> pairs;
  std::vector<UnpairedLlm> unpaired_llm;
  std::vector<PathBucket> bucket_table;
};

// Groups logs by (file_id, path); each list sorted by line.
PathIndex index_by_path(const std::vector<LogStatement>& logs);

// TF cosine over lowercased identifier-like tokens of raw_statement.
double statement_similarity(const LogStatement& a, const LogStatement& b);

using SimilarityFn =
    std::function<double(const LogStatement&, const LogStatement&)>;

// Pairs every GT log with its most similar LLM log at the same path.
PairingOutcome pair_logs(const PathIndex& gt_index, const PathIndex& llm_index,
                         const SimilarityFn& similarity = statement_similarity);

}  // namespace logeval
