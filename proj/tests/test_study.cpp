#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "logeval/errors.hpp"
#include "logeval/study.hpp"
#include "support/oracles.hpp"

using namespace logeval;
using namespace logeval::study;
using oracle::make_log;

namespace {

constexpr Origin GT = Origin::kGroundTruth;
constexpr Origin LLM = Origin::kLlm;

PairingOutcome outcome_of(const std::vector<LogStatement>& gt,
                          const std::vector<LogStatement>& llm) {
  return pair_logs(index_by_path(gt), index_by_path(llm));
}

std::vector<CategorizedRecord> synthetic_records(std::size_t under, std::size_t over,
                                                 std::size_t level, std::size_t vars) {
  std::vector<CategorizedRecord> out;
  auto add = [&](Category c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      CategorizedRecord r;
      r.category = c;
      r.repo_id = "r";
      r.file_id = "f" + std::to_string(i % 7) + ".py";
      r.path = CodePath::parse("global/p" + std::to_string(i));
      r.gt = make_log(GT, r.file_id, r.path.str(), static_cast<int>(i + 1), "m");
      out.push_back(r);
    }
  };
  add(Category::kUnderlogging, under);
  add(Category::kOverlogging, over);
  add(Category::kDifferentLevel, level);
  add(Category::kDifferentVariables, vars);
  return out;
}

}  // namespace

TEST(Categorize, Examples) {
  const auto recs = categorize(outcome_of(
      {make_log(GT, "a.py", "global/f", 1, "same text", LogLevel::kInfo),
       make_log(GT, "a.py", "global/g", 5, "step", LogLevel::kInfo, {"i", "state", "op"}),
       make_log(GT, "a.py", "global/u", 9, "lonely")},
      {make_log(LLM, "a.py", "global/f", 2, "same text", LogLevel::kDebug),
       make_log(LLM, "a.py", "global/g", 6, "step", LogLevel::kInfo, {"op", "state"}),
       make_log(LLM, "a.py", "global/new", 20, "extra")}));
  const auto counts = category_counts(recs);
  EXPECT_EQ(counts.at(Category::kUnderlogging), 1u);
  EXPECT_EQ(counts.at(Category::kOverlogging), 1u);
  EXPECT_EQ(counts.at(Category::kDifferentLevel), 1u);
  EXPECT_EQ(counts.at(Category::kDifferentVariables), 1u);
  for (const auto& r : recs) {
    switch (r.category) {
      case Category::kOverlogging:
        EXPECT_EQ(r.path.str(), "global/new");
        EXPECT_FALSE(r.gt);
        break;
      case Category::kUnderlogging:
        EXPECT_EQ(r.path.str(), "global/u");
        EXPECT_FALSE(r.llm);
        break;
      case Category::kDifferentLevel:
        EXPECT_EQ(r.path.str(), "global/f");
        break;
      case Category::kDifferentVariables:
        EXPECT_EQ(r.path.str(), "global/g");
        break;
    }
    EXPECT_FALSE(r.multi_flag);
  }
}

TEST(Categorize, MultiFlagAndExcludedLogs) {
  const auto recs = categorize(outcome_of(
      {make_log(GT, "a.py", "global/f", 1, "x", LogLevel::kInfo, {"a"})},
      {make_log(LLM, "a.py", "global/f", 2, "x", LogLevel::kError, {"b"}),
       make_log(LLM, "a.py", "global/f", 3, "unrelated words", LogLevel::kInfo)}));
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].category, Category::kDifferentLevel);
  EXPECT_EQ(recs[1].category, Category::kDifferentVariables);
  EXPECT_TRUE(recs[0].multi_flag);
  EXPECT_TRUE(recs[1].multi_flag);
}

TEST(Categorize, ReconcilesWithPairing) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<LogStatement> gt, llm;
    int line = 1;
    for (int i = 0; i < 12; ++i) {
      const std::string p = "global/p" + std::to_string(rng() % 5);
      const auto lvl = static_cast<LogLevel>(rng() % 5);
      if (rng() % 2) gt.push_back(make_log(GT, "a.py", p, line++, "m", lvl, {"v"}));
      if (rng() % 2) llm.push_back(make_log(LLM, "a.py", p, line++, "m", lvl));
    }
    const auto o = outcome_of(gt, llm);
    const auto counts = category_counts(categorize(o));
    std::size_t gt_only = 0, over = 0;
    for (const auto& p : o.pairs) gt_only += !p.llm;
    for (const auto& u : o.unpaired_llm) over += !u.excluded;
    EXPECT_EQ(counts.count(Category::kUnderlogging) ? counts.at(Category::kUnderlogging) : 0,
              gt_only);
    EXPECT_EQ(counts.count(Category::kOverlogging) ? counts.at(Category::kOverlogging) : 0,
              over);
  }
}

TEST(SampleSize, Examples) {
  EXPECT_EQ(sample_size(114522, 0.95, 0.05), 384u);
  EXPECT_EQ(sample_size(100, 0.95, 0.05), 100u);
  EXPECT_EQ(sample_size(1000000000, 0.95, 0.05), 384u);
  EXPECT_EQ(sample_size(0), 0u);
  EXPECT_NEAR(z_score(0.95), 1.959963984540054, 1e-12);
  EXPECT_GT(sample_size(1000000, 0.99, 0.05), 384u);
}

TEST(Allocate, LargestRemainderExample) {
  const auto a = allocate({{Category::kUnderlogging, 5382},
                           {Category::kOverlogging, 98208},
                           {Category::kDifferentLevel, 6018},
                           {Category::kDifferentVariables, 4914}},
                          384);
  EXPECT_EQ(a.at(Category::kUnderlogging), 18u);
  EXPECT_EQ(a.at(Category::kOverlogging), 329u);
  EXPECT_EQ(a.at(Category::kDifferentLevel), 20u);
  EXPECT_EQ(a.at(Category::kDifferentVariables), 17u);
}

TEST(Allocate, SingleStratumAndSums) {
  const auto one = allocate({{Category::kOverlogging, 1000}}, 384);
  EXPECT_EQ(one.at(Category::kOverlogging), 384u);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 500; ++t) {
    std::map<Category, std::size_t> strata;
    std::size_t pop = 0;
    for (auto c : kCategories) {
      const std::size_t v = rng() % 50;
      strata[c] = v;
      pop += v;
    }
    const std::size_t n = rng() % 120;
    const auto a = allocate(strata, n);
    std::size_t sum = 0;
    for (const auto& [c, k] : a) {
      sum += k;
      EXPECT_LE(k, strata[c]);
    }
    EXPECT_EQ(sum, std::min(n, pop));
  }
}

TEST(Allocate, EqualRemaindersFavourEarlierCategory) {
  const auto a = allocate({{Category::kUnderlogging, 1},
                           {Category::kOverlogging, 1},
                           {Category::kDifferentLevel, 1},
                           {Category::kDifferentVariables, 1}},
                          2);
  EXPECT_EQ(a.at(Category::kUnderlogging), 1u);
  EXPECT_EQ(a.at(Category::kOverlogging), 1u);
  EXPECT_EQ(a.at(Category::kDifferentLevel), 0u);
}

TEST(Sample, SeedDeterministicAndWithinStrata) {
  const auto recs = synthetic_records(120, 900, 60, 40);
  const auto plan = make_plan(recs, 17);
  EXPECT_EQ(plan.total_n, sample_size(recs.size()));
  std::size_t planned = 0;
  for (const auto& [c, k] : plan.allocation) planned += k;
  EXPECT_EQ(planned, plan.total_n);

  const auto s1 = stratified_sample(recs, plan);
  const auto s2 = stratified_sample(recs, plan);
  ASSERT_EQ(s1.size(), plan.total_n);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_EQ(s1[i].path, s2[i].path);
    EXPECT_EQ(s1[i].category, s2[i].category);
  }
  std::map<Category, std::size_t> got;
  std::set<std::pair<int, std::string>> uniq;
  for (const auto& r : s1) {
    ++got[r.category];
    uniq.insert({static_cast<int>(r.category), r.path.str()});
  }
  EXPECT_EQ(uniq.size(), s1.size());
  for (const auto& [c, k] : plan.allocation) EXPECT_EQ(got[c], k);

  const auto other = stratified_sample(recs, make_plan(recs, 18));
  bool differs = false;
  for (std::size_t i = 0; i < other.size(); ++i) differs |= !(other[i].path == s1[i].path);
  EXPECT_TRUE(differs);
}

TEST(Sample, RoughlyUniformWithinStratum) {
  const auto recs = synthetic_records(0, 20, 0, 0);
  std::map<std::string, int> hits;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    SamplePlan plan;
    plan.total_n = 5;
    plan.allocation = {{Category::kOverlogging, 5}};
    plan.seed = seed;
    for (const auto& r : stratified_sample(recs, plan)) ++hits[r.path.str()];
  }
  ASSERT_EQ(hits.size(), 20u);
  // Expected 500 per record; allow a wide band.
  for (const auto& [k, v] : hits) {
    EXPECT_GT(v, 400) << k;
    EXPECT_LT(v, 600) << k;
  }
}

TEST(Snippet, WindowAndBoundaries) {
  std::string src;
  for (int i = 1; i <= 20; ++i) src += "line" + std::to_string(i) + "\n";
  EXPECT_EQ(context_snippet(src, 10), "5: line5\n6: line6\n7: line7\n8: line8\n9: line9\n"
                                      "10: line10\n11: line11\n12: line12\n13: line13\n"
                                      "14: line14\n15: line15");
  EXPECT_EQ(context_snippet(src, 1, 2), "1: line1\n2: line2\n3: line3");
  EXPECT_EQ(context_snippet(src, 20, 1), "19: line19\n20: line20");
}

TEST(ReviewSheet, RowsCsvAndMissingSource) {
  const std::string gt_src =
      "def load(path):\n"
      "    if not exists(path):\n"
      "        logger.error(\"missing %s\", path)\n"
      "        raise FileNotFoundError(path)\n"
      "    return read(path)\n";
  const std::string llm_src =
      "def load(path):\n"
      "    logging.info(\"enter load\")\n"
      "    if not exists(path):\n"
      "        raise FileNotFoundError(path)\n"
      "    return read(path)\n";
  const auto recs = categorize(outcome_of(
      {make_log(GT, "a.py", "global/load/if1", 3, "missing", LogLevel::kError, {"path"}),
       make_log(GT, "a.py", "global/load", 1, "head", LogLevel::kInfo)},
      {make_log(LLM, "a.py", "global/load", 2, "enter load", LogLevel::kDebug),
       make_log(LLM, "a.py", "global/other", 1, "x")}));
  ASSERT_EQ(recs.size(), 3u);
  const SourceLookup lookup = [&](Origin o, const std::string& id) -> std::optional<std::string> {
    if (id != "a.py") return std::nullopt;
    return o == GT ? gt_src : llm_src;
  };
  const auto rows = review_rows(recs, lookup);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) EXPECT_FALSE(r.gt_context.empty() && r.llm_context.empty());
  bool saw_raise = false;
  for (const auto& r : rows) {
    if (r.category == "Underlogging") {
      EXPECT_NE(r.gt_context.find("4:         raise FileNotFoundError(path)"), std::string::npos);
      EXPECT_EQ(r.gt_context.substr(0, 3), "1: ");
      EXPECT_EQ(r.gt_vars, "path");
      saw_raise = true;
    }
  }
  EXPECT_TRUE(saw_raise);

  std::ostringstream csv;
  write_review_csv(csv, rows);
  const std::string s = csv.str();
  EXPECT_EQ(s.substr(0, s.find("\r\n")),
            "category,repo,file,path,gt_level,llm_level,gt_text,llm_text,gt_vars,llm_vars,"
            "gt_context,llm_context,annotation");
  EXPECT_NE(s.find("\"logger.error(\"\"missing\"\")\""), std::string::npos);

  std::ostringstream jl;
  write_review_jsonl(jl, rows);
  const std::string jls = jl.str();
  EXPECT_EQ(std::count(jls.begin(), jls.end(), '\n'), 3);

  const SourceLookup none = [](Origin, const std::string&) { return std::nullopt; };
  EXPECT_THROW(review_rows(recs, none), MissingSource);
}
