#include "logeval/study.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>
#include <limits>

#include "logeval/errors.hpp"
#include "logeval/text.hpp"

namespace logeval::study {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kUnderlogging:
      return "Underlogging";
    case Category::kOverlogging:
      return "Overlogging";
    case Category::kDifferentLevel:
      return "DifferentLevel";
    case Category::kDifferentVariables:
      return "DifferentVariables";
  }
  return "Overlogging";
}

std::optional<Category> category_from_string(std::string_view s) {
  for (auto c : kCategories) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::optional<int> CategorizedRecord::gt_line() const {
  if (!gt) return std::nullopt;
  return gt->line;
}

std::optional<int> CategorizedRecord::llm_line() const {
  if (!llm) return std::nullopt;
  return llm->line;
}

namespace {

auto record_key(const CategorizedRecord& r) {
  return std::tuple<int, const std::string&, const CodePath&, int, int>(
      static_cast<int>(r.category), r.file_id, r.path, r.gt_line().value_or(0),
      r.llm_line().value_or(0));
}

CategorizedRecord make_record(Category c, const LogPair& p) {
  CategorizedRecord r;
  r.category = c;
  r.repo_id = p.gt.repo_id;
  r.file_id = p.gt.file_id;
  r.path = p.gt.path;
  r.gt = p.gt;
  r.llm = p.llm;
  return r;
}

}  // namespace

std::vector<CategorizedRecord> categorize(const PairingOutcome& outcome) {
  std::vector<CategorizedRecord> out;
  for (const auto& u : outcome.unpaired_llm) {
    if (u.excluded) continue;
    CategorizedRecord r;
    r.category = Category::kOverlogging;
    r.repo_id = u.log.repo_id;
    r.file_id = u.log.file_id;
    r.path = u.log.path;
    r.llm = u.log;
    out.push_back(std::move(r));
  }
  for (const auto& p : outcome.pairs) {
    if (!p.llm) {
      out.push_back(make_record(Category::kUnderlogging, p));
      continue;
    }
    const bool level_differs = p.gt.level != p.llm->level;
    const std::set<std::string> gv(p.gt.variables.begin(), p.gt.variables.end());
    const std::set<std::string> lv(p.llm->variables.begin(), p.llm->variables.end());
    const bool vars_differ = !gv.empty() && !lv.empty() && gv != lv;
    const bool both = level_differs && vars_differ;
    if (level_differs) {
      out.push_back(make_record(Category::kDifferentLevel, p));
      out.back().multi_flag = both;
    }
    if (vars_differ) {
      out.push_back(make_record(Category::kDifferentVariables, p));
      out.back().multi_flag = both;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return record_key(a) < record_key(b);
  });
  return out;
}

std::map<Category, std::size_t> category_counts(const std::vector<CategorizedRecord>& records) {
  std::map<Category, std::size_t> counts;
  for (auto c : kCategories) counts[c] = 0;
  for (const auto& r : records) ++counts[r.category];
  return counts;
}

double z_score(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ConfigError("confidence must lie in (0, 1)");
  }
  boost::math::normal_distribution<double> n;
  return boost::math::quantile(n, 1.0 - (1.0 - confidence) / 2.0);
}

std::size_t sample_size(std::size_t population, double confidence, double margin) {
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  const double z = z_score(confidence);
  const double n0 = z * z * 0.25 / (margin * margin);
  const auto n = static_cast<std::size_t>(std::llround(n0));
  return std::min(population, n);
}

std::map<Category, std::size_t> allocate(const std::map<Category, std::size_t>& strata,
                                         std::size_t n) {
  std::map<Category, std::size_t> out;
  std::size_t population = 0;
  for (auto c : kCategories) {
    out[c] = 0;
    auto it = strata.find(c);
    if (it != strata.end()) population += it->second;
  }
  n = std::min(n, population);
  if (n == 0) return out;

  struct Share {
    Category c;
    std::size_t size;
    std::size_t whole;
    // Remainder numerator: (size * n) mod population.
    std::size_t rem;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (auto c : kCategories) {
    auto it = strata.find(c);
    const std::size_t size = it == strata.end() ? 0 : it->second;
    // Exact integer arithmetic; populations stay far below overflow range.
    const unsigned __int128 prod = static_cast<unsigned __int128>(size) * n;
    const auto whole = static_cast<std::size_t>(prod / population);
    const auto rem = static_cast<std::size_t>(prod % population);
    shares.push_back({c, size, whole, rem});
    assigned += whole;
  }
  std::vector<std::size_t> order(shares.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return shares[a].rem > shares[b].rem;
  });
  for (std::size_t k = 0; assigned < n && k < order.size(); ++k) {
    Share& s = shares[order[k]];
    if (s.whole < s.size) {
      ++s.whole;
      ++assigned;
    }
  }
  for (const auto& s : shares) out[s.c] = s.whole;
  return out;
}

SamplePlan make_plan(const std::vector<CategorizedRecord>& records, std::uint64_t seed,
                     double confidence, double margin) {
  SamplePlan plan;
  plan.confidence = confidence;
  plan.margin = margin;
  plan.seed = seed;
  const auto counts = category_counts(records);
  plan.total_n = sample_size(records.size(), confidence, margin);
  plan.allocation = allocate(counts, plan.total_n);
  return plan;
}

namespace {

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  while (true) {
    const std::uint64_t v = rng();
    if (v < limit) return v % bound;
  }
}

}  // namespace

std::vector<CategorizedRecord> stratified_sample(const std::vector<CategorizedRecord>& records,
                                                 const SamplePlan& plan) {
  std::vector<CategorizedRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return record_key(a) < record_key(b);
  });
  std::vector<CategorizedRecord> out;
  for (auto c : kCategories) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i].category == c) idx.push_back(i);
    }
    auto it = plan.allocation.find(c);
    const std::size_t want = std::min(it == plan.allocation.end() ? 0 : it->second, idx.size());
    std::mt19937_64 rng(plan.seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(c) + 1)));
    // Partial Fisher-Yates: the first `want` slots become the sample.
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(bounded(rng, idx.size() - k));
      std::swap(idx[k], idx[j]);
    }
    std::vector<std::size_t> picked(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want));
    std::sort(picked.begin(), picked.end());
    for (auto i : picked) out.push_back(sorted[i]);
  }
  return out;
}

std::string context_snippet(std::string_view source, int line, int radius) {
  const auto lines = text::split_lines(source);
  const int n = static_cast<int>(lines.size());
  const int lo = std::max(1, line - radius);
  const int hi = std::min(n, line + radius);
  std::ostringstream os;
  for (int i = lo; i <= hi; ++i) {
    os << i << ": " << lines[static_cast<std::size_t>(i - 1)];
    if (i < hi) os << '\n';
  }
  return os.str();
}

namespace {

std::string join_vars(const std::vector<std::string>& vars) {
  std::string out;
  for (const auto& v : vars) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

std::string context_for(const SourceLookup& sources, Origin origin, const LogStatement& log) {
  auto src = sources(origin, log.file_id);
  if (!src) throw MissingSource(std::string(to_string(origin)) + ":" + log.file_id);
  return context_snippet(*src, log.line);
}

}  // namespace

std::vector<ReviewRow> review_rows(const std::vector<CategorizedRecord>& sample,
                                   const SourceLookup& sources) {
  std::vector<ReviewRow> rows;
  for (const auto& r : sample) {
    ReviewRow row;
    row.category = std::string(to_string(r.category));
    if (r.multi_flag) row.category += " (multi-flag)";
    row.repo = r.repo_id;
    row.file = r.file_id;
    row.path = r.path.str();
    if (r.gt) {
      row.gt_level = std::string(to_string(r.gt->level));
      row.gt_text = r.gt->raw_statement;
      row.gt_vars = join_vars(r.gt->variables);
      row.gt_context = context_for(sources, Origin::kGroundTruth, *r.gt);
    }
    if (r.llm) {
      row.llm_level = std::string(to_string(r.llm->level));
      row.llm_text = r.llm->raw_statement;
      row.llm_vars = join_vars(r.llm->variables);
      row.llm_context = context_for(sources, Origin::kLlm, *r.llm);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::array<const std::string*, 13> fields(const ReviewRow& r) {
  return {&r.category, &r.repo,     &r.file,       &r.path,        &r.gt_level,
          &r.llm_level, &r.gt_text, &r.llm_text,   &r.gt_vars,     &r.llm_vars,
          &r.gt_context, &r.llm_context, &r.annotation};
}

void csv_field(std::ostream& out, std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void write_review_csv(std::ostream& out, const std::vector<ReviewRow>& rows) {
  for (std::size_t i = 0; i < kReviewColumns.size(); ++i) {
    if (i) out << ',';
    out << kReviewColumns[i];
  }
  out << "\r\n";
  for (const auto& r : rows) {
    const auto f = fields(r);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out << ',';
      csv_field(out, *f[i]);
    }
    out << "\r\n";
  }
}

void write_review_jsonl(std::ostream& out, const std::vector<ReviewRow>& rows) {
  for (const auto& r : rows) {
    const auto f = fields(r);
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < f.size(); ++i) j[std::string(kReviewColumns[i])] = *f[i];
    out << j.dump() << '\n';
  }
}

}  // namespace logeval::study
