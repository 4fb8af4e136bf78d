#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "logeval/metrics.hpp"
#include "logeval/pairing.hpp"
#include "logeval/source_model.hpp"
#include "logeval/study.hpp"

namespace logeval::io {

using nlohmann::json;

json to_json(const LogStatement& s);
// Throws ConfigError on malformed input.
LogStatement log_from_json(const json& j);

json to_json(const metrics::PlacementReport& r);
json to_json(const metrics::IngredientReport& r);
json to_json(const metrics::PairMetrics& m);

json to_json(const study::CategorizedRecord& r);
study::CategorizedRecord record_from_json(const json& j);

// One pairs.jsonl line per pair; `excluded_llm_lines` lists the bucket's
// argmax losers.
std::vector<json> pair_lines(const PairingOutcome& outcome);

std::string read_text(const std::filesystem::path& p);
// Writes through a temporary file and a rename.
void write_text(const std::filesystem::path& p, const std::string& content);

std::vector<json> read_jsonl(const std::filesystem::path& p);
std::string to_jsonl(const std::vector<json>& rows);

}  // namespace logeval::io
