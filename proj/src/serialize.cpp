#include "logeval/serialize.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "logeval/errors.hpp"
#include "logeval/text.hpp"

namespace logeval::io {

namespace fs = std::filesystem;

json to_json(const LogStatement& s) {
  return json{{"origin", to_string(s.origin)},
              {"repo_id", s.repo_id},
              {"file_id", s.file_id},
              {"path", s.path.str()},
              {"line", s.line},
              {"level", to_string(s.level)},
              {"raw", s.raw_statement},
              {"template", s.template_text},
              {"variables", s.variables}};
}

LogStatement log_from_json(const json& j) {
  try {
    LogStatement s;
    auto origin = origin_from_string(j.at("origin").get<std::string>());
    auto level = level_from_string(j.at("level").get<std::string>());
    if (!origin || !level) throw ConfigError("bad origin or level in log record");
    s.origin = *origin;
    s.level = *level;
    s.repo_id = j.at("repo_id").get<std::string>();
    s.file_id = j.at("file_id").get<std::string>();
    s.path = CodePath::parse(j.at("path").get<std::string>());
    s.line = j.at("line").get<int>();
    s.raw_statement = j.at("raw").get<std::string>();
    s.template_text = j.at("template").get<std::string>();
    s.variables = j.at("variables").get<std::vector<std::string>>();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed log record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("malformed log path: ") + e.what());
  }
}

json to_json(const metrics::PlacementReport& r) {
  const auto& pc = r.path_counts;
  return json{
      {"coverage", r.coverage},
      {"quantified_coverage_raw", r.quantified_coverage_raw},
      {"quantified_coverage_capped", r.quantified_coverage_capped},
      {"quantified_coverage_raw_covered_paths", r.quantified_coverage_raw_agree},
      {"quantified_coverage_capped_covered_paths", r.quantified_coverage_capped_agree},
      {"overlogging_rate", r.overlogging_rate},
      {"underlogging_rate", r.underlogging_rate},
      {"agree_rate", r.agree_rate},
      {"llm_to_gt_log_ratio", r.llm_to_gt_log_ratio},
      {"gt_logs", r.gt_logs},
      {"llm_logs", r.llm_logs},
      {"path_counts",
       {{"total", pc.total},
        {"over", pc.over},
        {"under", pc.under},
        {"agree", pc.agree},
        {"gt_paths", pc.gt_paths}}},
  };
}

json to_json(const metrics::IngredientReport& r) {
  const auto& t = r.text;
  json vc = r.variable_coverage ? json(*r.variable_coverage) : json(nullptr);
  return json{
      {"level", {{"l_acc", r.level.l_acc}, {"aod", r.level.aod}, {"n_pairs", r.level.n_pairs}}},
      {"variable_coverage", {{"mean", vc}, {"n_pairs", r.variable_coverage_pairs}}},
      {"text",
       {{"bleu_1", t.bleu_1},
        {"bleu_2", t.bleu_2},
        {"bleu_4", t.bleu_4},
        {"meteor", t.meteor},
        {"rouge_1", t.rouge_1},
        {"rouge_2", t.rouge_2},
        {"rouge_l", t.rouge_l},
        {"ntlev", t.ntlev},
        {"n_pairs", t.n_pairs}}},
  };
}

json to_json(const metrics::PairMetrics& m) {
  const LogPair& p = *m.pair;
  json j{{"file_id", p.gt.file_id},
         {"path", p.gt.path.str()},
         {"gt_line", p.gt.line},
         {"llm_line", p.llm ? json(p.llm->line) : json(nullptr)},
         {"scenario", to_string(p.scenario)},
         {"level_match", m.level_match},
         {"ordinal_closeness", m.ordinal_closeness},
         {"variable_coverage",
          m.variable_coverage ? json(*m.variable_coverage) : json(nullptr)},
         {"bleu_1", m.bleu_1},
         {"bleu_2", m.bleu_2},
         {"bleu_4", m.bleu_4},
         {"meteor", m.meteor},
         {"rouge_1", m.rouge_1},
         {"rouge_2", m.rouge_2},
         {"rouge_l", m.rouge_l},
         {"ntlev", m.ntlev}};
  return j;
}

json to_json(const study::CategorizedRecord& r) {
  return json{{"category", study::to_string(r.category)},
              {"repo_id", r.repo_id},
              {"file_id", r.file_id},
              {"path", r.path.str()},
              {"multi_flag", r.multi_flag},
              {"gt", r.gt ? to_json(*r.gt) : json(nullptr)},
              {"llm", r.llm ? to_json(*r.llm) : json(nullptr)}};
}

study::CategorizedRecord record_from_json(const json& j) {
  try {
    study::CategorizedRecord r;
    auto c = study::category_from_string(j.at("category").get<std::string>());
    if (!c) throw ConfigError("unknown category in record");
    r.category = *c;
    r.repo_id = j.at("repo_id").get<std::string>();
    r.file_id = j.at("file_id").get<std::string>();
    r.path = CodePath::parse(j.at("path").get<std::string>());
    r.multi_flag = j.at("multi_flag").get<bool>();
    if (!j.at("gt").is_null()) r.gt = log_from_json(j["gt"]);
    if (!j.at("llm").is_null()) r.llm = log_from_json(j["llm"]);
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed categorized record: ") + e.what());
  }
}

std::vector<json> pair_lines(const PairingOutcome& outcome) {
  std::map<PathKey, std::vector<int>> excluded;
  for (const auto& u : outcome.unpaired_llm) {
    if (u.excluded) excluded[PathKey{u.log.file_id, u.log.path}].push_back(u.log.line);
  }
  std::vector<json> rows;
  for (const auto& p : outcome.pairs) {
    auto it = excluded.find(PathKey{p.gt.file_id, p.gt.path});
    json row{{"file_id", p.gt.file_id},
             {"path", p.gt.path.str()},
             {"scenario", to_string(p.scenario)},
             {"gt_line", p.gt.line}};
    if (p.llm) {
      row["llm_line"] = p.llm->line;
      row["similarity"] = *p.similarity;
    }
    row["excluded_llm_lines"] = it == excluded.end() ? std::vector<int>{} : it->second;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> rows;
  const std::string content = read_text(p);
  std::size_t n = 0;
  for (const auto& line : text::split_lines(content)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ConfigError(p.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

std::string to_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

}  // namespace logeval::io
