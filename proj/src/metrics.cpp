#include "logeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "logeval/errors.hpp"
#include "logeval/porter.hpp"
#include "logeval/text.hpp"

namespace logeval::metrics {

PlacementReport placement_metrics(const std::vector<PathBucket>& table) {
  if (table.empty()) throw EmptyCorpus();
  PlacementReport rep;
  PathCounts& pc = rep.path_counts;
  double qc_raw = 0.0;
  double qc_cap = 0.0;
  double qc_raw_agree = 0.0;
  double qc_cap_agree = 0.0;
  for (const auto& b : table) {
    if (b.gt_count == 0 && b.llm_count == 0) continue;
    ++pc.total;
    rep.gt_logs += b.gt_count;
    rep.llm_logs += b.llm_count;
    if (b.gt_count == 0) {
      ++pc.over;
      continue;
    }
    ++pc.gt_paths;
    double ratio = static_cast<double>(b.llm_count) / static_cast<double>(b.gt_count);
    qc_raw += ratio;
    qc_cap += std::min(1.0, ratio);
    if (b.llm_count == 0) {
      ++pc.under;
    } else {
      ++pc.agree;
      qc_raw_agree += ratio;
      qc_cap_agree += std::min(1.0, ratio);
    }
  }
  if (pc.total == 0) throw EmptyCorpus();
  const double total = static_cast<double>(pc.total);
  rep.overlogging_rate = static_cast<double>(pc.over) / total;
  rep.underlogging_rate = static_cast<double>(pc.under) / total;
  rep.agree_rate = static_cast<double>(pc.agree) / total;
  if (pc.gt_paths > 0) {
    const double g = static_cast<double>(pc.gt_paths);
    rep.coverage = static_cast<double>(pc.agree) / g;
    rep.quantified_coverage_raw = qc_raw / g;
    rep.quantified_coverage_capped = qc_cap / g;
  }
  if (pc.agree > 0) {
    const double a = static_cast<double>(pc.agree);
    rep.quantified_coverage_raw_agree = qc_raw_agree / a;
    rep.quantified_coverage_capped_agree = qc_cap_agree / a;
  }
  if (rep.gt_logs > 0) {
    rep.llm_to_gt_log_ratio =
        static_cast<double>(rep.llm_logs) / static_cast<double>(rep.gt_logs);
  }
  return rep;
}

std::vector<const LogPair*> llm_present(const std::vector<LogPair>& pairs) {
  std::vector<const LogPair*> out;
  for (const auto& p : pairs) {
    if (p.llm) out.push_back(&p);
  }
  return out;
}

double level_accuracy(const std::vector<const LogPair*>& pairs) {
  if (pairs.empty()) throw NoPairs();
  std::size_t hits = 0;
  for (const auto* p : pairs) {
    if (p->gt.level == p->llm->level) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double ordinal_closeness(LogLevel gt, LogLevel llm) {
  const int a = ordinal(gt);
  const int s = ordinal(llm);
  const int max_dis = std::max(a, 4 - a);
  return 1.0 - static_cast<double>(std::abs(a - s)) / static_cast<double>(max_dis);
}

double aod(const std::vector<const LogPair*>& pairs) {
  if (pairs.empty()) throw NoPairs();
  double sum = 0.0;
  for (const auto* p : pairs) sum += ordinal_closeness(p->gt.level, p->llm->level);
  return sum / static_cast<double>(pairs.size());
}

std::optional<double> variable_coverage(const LogPair& pair) {
  std::set<std::string> gt(pair.gt.variables.begin(), pair.gt.variables.end());
  if (gt.empty()) return std::nullopt;
  std::size_t hit = 0;
  if (pair.llm) {
    std::set<std::string> llm(pair.llm->variables.begin(), pair.llm->variables.end());
    for (const auto& v : gt) hit += llm.count(v);
  }
  return static_cast<double>(hit) / static_cast<double>(gt.size());
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const Tokens& t, std::size_t n) {
  NgramCounts out;
  if (t.size() < n) return out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    ++out[std::vector<std::string>(t.begin() + static_cast<std::ptrdiff_t>(i),
                                   t.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

std::size_t overlap(const NgramCounts& a, const NgramCounts& b) {
  std::size_t n = 0;
  for (const auto& [g, c] : a) {
    auto it = b.find(g);
    if (it != b.end()) n += std::min(c, it->second);
  }
  return n;
}

double f1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

std::size_t lcs(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

constexpr double kEpsilon = 1e-9;

}  // namespace

double bleu(const Tokens& candidate, const Tokens& reference, int max_order) {
  if (candidate.empty() || reference.empty() || max_order < 1) return 0.0;
  // Orders longer than the candidate have no n-grams and are left out of the
  // geometric mean.
  const std::size_t order =
      std::min(static_cast<std::size_t>(max_order), candidate.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= order; ++n) {
    const auto cand = ngrams(candidate, n);
    const auto ref = ngrams(reference, n);
    const double total = static_cast<double>(candidate.size() - n + 1);
    const double hits = static_cast<double>(overlap(cand, ref));
    const double p = hits > 0.0 ? hits / total : kEpsilon / total;
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / static_cast<double>(order));
}

double rouge(const Tokens& candidate, const Tokens& reference, RougeVariant variant) {
  if (candidate.empty() || reference.empty()) return 0.0;
  if (variant == RougeVariant::kL) {
    const double l = static_cast<double>(lcs(candidate, reference));
    return f1(l / static_cast<double>(candidate.size()),
              l / static_cast<double>(reference.size()));
  }
  const std::size_t n = variant == RougeVariant::kOne ? 1 : 2;
  if (candidate.size() < n || reference.size() < n) return 0.0;
  const auto cand = ngrams(candidate, n);
  const auto ref = ngrams(reference, n);
  const double hits = static_cast<double>(overlap(cand, ref));
  return f1(hits / static_cast<double>(candidate.size() - n + 1),
            hits / static_cast<double>(reference.size() - n + 1));
}

double meteor(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> align(candidate.size(), kNone);
  std::vector<bool> ref_used(reference.size(), false);

  auto stage = [&](auto&& key) {
    std::vector<std::string> ck(candidate.size());
    std::vector<std::string> rk(reference.size());
    for (std::size_t i = 0; i < candidate.size(); ++i) ck[i] = key(candidate[i]);
    for (std::size_t j = 0; j < reference.size(); ++j) rk[j] = key(reference[j]);
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (align[i] != kNone) continue;
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (!ref_used[j] && ck[i] == rk[j]) {
          align[i] = j;
          ref_used[j] = true;
          break;
        }
      }
    }
  };
  stage([](const std::string& s) { return s; });
  stage([](const std::string& s) { return porter_stem(s); });

  std::size_t matches = 0;
  std::size_t chunks = 0;
  std::size_t prev_ref = kNone;
  bool in_chunk = false;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (align[i] == kNone) {
      in_chunk = false;
      continue;
    }
    ++matches;
    if (!in_chunk || align[i] != prev_ref + 1) ++chunks;
    in_chunk = true;
    prev_ref = align[i];
  }
  if (matches == 0) return 0.0;
  const double m = static_cast<double>(matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double fmean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(chunks) / m;
  const double penalty = 0.5 * frag * frag * frag;
  return fmean * (1.0 - penalty);
}

double ntlev(const Tokens& candidate, const Tokens& reference) {
  const std::size_t longest = std::max(candidate.size(), reference.size());
  if (longest == 0) return 0.0;
  std::vector<std::size_t> prev(reference.size() + 1);
  std::vector<std::size_t> cur(reference.size() + 1);
  for (std::size_t j = 0; j <= reference.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= candidate.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (candidate[i - 1] == reference[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[reference.size()]) / static_cast<double>(longest);
}

Tokens text_tokens(std::string_view normalized_template) {
  return text::word_tokens(normalized_template);
}

PairMetrics score_pair(const LogPair& pair) {
  PairMetrics pm;
  pm.pair = &pair;
  if (!pair.llm) return pm;
  pm.level_match = pair.gt.level == pair.llm->level;
  pm.ordinal_closeness = ordinal_closeness(pair.gt.level, pair.llm->level);
  pm.variable_coverage = variable_coverage(pair);
  const Tokens cand = text_tokens(pair.llm->template_text);
  const Tokens ref = text_tokens(pair.gt.template_text);
  pm.bleu_1 = bleu(cand, ref, 1);
  pm.bleu_2 = bleu(cand, ref, 2);
  pm.bleu_4 = bleu(cand, ref, 4);
  pm.meteor = meteor(cand, ref);
  pm.rouge_1 = rouge(cand, ref, RougeVariant::kOne);
  pm.rouge_2 = rouge(cand, ref, RougeVariant::kTwo);
  pm.rouge_l = rouge(cand, ref, RougeVariant::kL);
  pm.ntlev = ntlev(cand, ref);
  return pm;
}

IngredientReport ingredient_report(const std::vector<LogPair>& pairs) {
  const auto present = llm_present(pairs);
  if (present.empty()) throw NoPairs();
  IngredientReport rep;
  rep.level.l_acc = level_accuracy(present);
  rep.level.aod = aod(present);
  rep.level.n_pairs = present.size();

  double var_sum = 0.0;
  TextReport& t = rep.text;
  for (const auto* p : present) {
    PairMetrics pm = score_pair(*p);
    if (pm.variable_coverage) {
      var_sum += *pm.variable_coverage;
      ++rep.variable_coverage_pairs;
    }
    t.bleu_1 += pm.bleu_1;
    t.bleu_2 += pm.bleu_2;
    t.bleu_4 += pm.bleu_4;
    t.meteor += pm.meteor;
    t.rouge_1 += pm.rouge_1;
    t.rouge_2 += pm.rouge_2;
    t.rouge_l += pm.rouge_l;
    t.ntlev += pm.ntlev;
    rep.per_pair.push_back(pm);
  }
  const double n = static_cast<double>(present.size());
  t.bleu_1 /= n;
  t.bleu_2 /= n;
  t.bleu_4 /= n;
  t.meteor /= n;
  t.rouge_1 /= n;
  t.rouge_2 /= n;
  t.rouge_l /= n;
  t.ntlev /= n;
  t.n_pairs = present.size();
  if (rep.variable_coverage_pairs > 0) {
    rep.variable_coverage = var_sum / static_cast<double>(rep.variable_coverage_pairs);
  }
  return rep;
}

}  // namespace logeval::metrics
