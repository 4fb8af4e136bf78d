#include "logeval/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "logeval/text.hpp"

namespace logeval {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::kOneOne:
      return "one_one";
    case Scenario::kOneN:
      return "one_n";
    case Scenario::kNOne:
      return "n_one";
    case Scenario::kNN:
      return "n_n";
    case Scenario::kGtOnly:
      return "gt_only";
  }
  return "gt_only";
}

std::optional<Scenario> scenario_from_string(std::string_view s) {
  for (auto sc : {Scenario::kOneOne, Scenario::kOneN, Scenario::kNOne,
                  Scenario::kNN, Scenario::kGtOnly}) {
    if (to_string(sc) == s) return sc;
  }
  return std::nullopt;
}

Scenario scenario_for(std::size_t gt_count, std::size_t llm_count) {
  if (llm_count == 0) return Scenario::kGtOnly;
  if (gt_count == 1) return llm_count == 1 ? Scenario::kOneOne : Scenario::kOneN;
  return llm_count == 1 ? Scenario::kNOne : Scenario::kNN;
}

namespace {
bool line_order(const LogStatement& a, const LogStatement& b) {
  if (a.line != b.line) return a.line < b.line;
  return a.raw_statement < b.raw_statement;
}
}  // namespace

PathIndex index_by_path(const std::vector<LogStatement>& logs) {
  PathIndex index;
  for (const auto& log : logs) {
    index[PathKey{log.file_id, log.path}].push_back(log);
  }
  for (auto& [key, list] : index) {
    std::stable_sort(list.begin(), list.end(), line_order);
  }
  return index;
}

double statement_similarity(const LogStatement& a, const LogStatement& b) {
  auto ta = text::word_tokens(a.raw_statement);
  auto tb = text::word_tokens(b.raw_statement);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;
  std::unordered_map<std::string, double> fa;
  std::unordered_map<std::string, double> fb;
  for (const auto& t : ta) fa[t] += 1.0;
  for (const auto& t : tb) fb[t] += 1.0;
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [tok, w] : fa) {
    na += w * w;
    auto it = fb.find(tok);
    if (it != fb.end()) dot += w * it->second;
  }
  for (const auto& [tok, w] : fb) nb += w * w;
  double cos = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(cos, 0.0, 1.0);
}

PairingOutcome pair_logs(const PathIndex& gt_index, const PathIndex& llm_index,
                         const SimilarityFn& similarity) {
  PairingOutcome out;
  std::set<PathKey> keys;
  for (const auto& [k, v] : gt_index) {
    if (!v.empty()) keys.insert(k);
  }
  for (const auto& [k, v] : llm_index) {
    if (!v.empty()) keys.insert(k);
  }
  static const std::vector<LogStatement> kNone;

  for (const auto& key : keys) {
    auto git = gt_index.find(key);
    auto lit = llm_index.find(key);
    const auto& gts = git == gt_index.end() ? kNone : git->second;
    const auto& llms = lit == llm_index.end() ? kNone : lit->second;
    out.bucket_table.push_back(PathBucket{key, gts.size(), llms.size()});

    if (gts.empty()) {
      for (const auto& l : llms) out.unpaired_llm.push_back({l, false});
      continue;
    }
    const Scenario scenario = scenario_for(gts.size(), llms.size());
    std::vector<bool> chosen(llms.size(), false);
    for (const auto& g : gts) {
      LogPair pair;
      pair.gt = g;
      pair.scenario = scenario;
      if (!llms.empty()) {
        std::size_t best = 0;
        double best_sim = similarity(g, llms[0]);
        for (std::size_t i = 1; i < llms.size(); ++i) {
          double s = similarity(g, llms[i]);
          if (s > best_sim) {
            best = i;
            best_sim = s;
          }
        }
        chosen[best] = true;
        pair.llm = llms[best];
        pair.similarity = best_sim;
      }
      out.pairs.push_back(std::move(pair));
    }
    for (std::size_t i = 0; i < llms.size(); ++i) {
      if (!chosen[i]) out.unpaired_llm.push_back({llms[i], true});
    }
  }
  return out;
}

}  // namespace logeval
