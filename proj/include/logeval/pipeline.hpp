#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "logeval/corpus.hpp"
#include "logeval/generation.hpp"
#include "logeval/source_model.hpp"
#include "logeval/study.hpp"

namespace logeval::pipeline {

namespace fs = std::filesystem;

struct RunConfig {
  // Corpus inputs.
  fs::path repos_file;
  fs::path metadata_dir;  // offline metadata records
  std::string metadata_source = "fixtures";  // or "github"
  fs::path checkouts_dir;
  bool clone_missing = false;
  std::string as_of = "2024-10-31";
  corpus::SelectionCriteria criteria;

  ExtractionConfig extraction;
  generation::GenerationConfig generation;
  fs::path replay_dir;
  fs::path cache_dir;  // empty: <out>/generate/cache

  fs::path out_dir = "logeval-out";
  std::uint64_t seed = 0;
  int jobs = 1;
  bool offline = false;
  bool force = false;
  double confidence = 0.95;
  double margin = 0.05;

  // Relative paths inside the file resolve against its directory. Throws
  // ConfigError.
  static RunConfig load(const fs::path& file);
  static RunConfig from_json(const nlohmann::json& j, const fs::path& base_dir);
  void validate() const;
  fs::path stage_dir(const std::string& stage) const { return out_dir / stage; }
};

struct StageResult {
  std::string stage;
  bool skipped = false;  // inputs unchanged since the recorded run
  std::vector<std::string> failures;
  nlohmann::json counts = nlohmann::json::object();

  bool partial() const { return !failures.empty(); }
};

// Each stage reads its predecessors' artifacts and writes
// <out>/<stage>/{artifacts..., stage.json}. Missing inputs raise ConfigError.
StageResult run_mine(const RunConfig& cfg);
StageResult run_prepare(const RunConfig& cfg);
StageResult run_generate(const RunConfig& cfg);
StageResult run_extract(const RunConfig& cfg);
StageResult run_pair(const RunConfig& cfg);
StageResult run_evaluate(const RunConfig& cfg);
StageResult run_categorize(const RunConfig& cfg);
StageResult run_sample(const RunConfig& cfg);
StageResult run_report(const RunConfig& cfg);

const std::vector<std::string>& stage_names();
StageResult run_stage(const std::string& name, const RunConfig& cfg);

// Human-readable summary built only from metrics.json and the categorized
// records.
std::string render_report(const nlohmann::json& metrics,
                          const std::vector<study::CategorizedRecord>& records);

// Command-line entry point. Exit codes: 0 success, 1 partial (per-file
// failures recorded), 2 configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace logeval::pipeline
