#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "logeval/pairing.hpp"
#include "logeval/source_model.hpp"
#include "logeval/text.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"

using namespace logeval;
using oracle::make_log;

namespace {

constexpr Origin GT = Origin::kGroundTruth;
constexpr Origin LLM = Origin::kLlm;
const std::string kPath = "global/f";

// Similarity looked up by (gt line, llm line).
SimilarityFn table(std::map<std::pair<int, int>, double> t) {
  return [t](const LogStatement& g, const LogStatement& l) { return t.at({g.line, l.line}); };
}

std::vector<int> excluded_lines(const PairingOutcome& o) {
  std::vector<int> out;
  for (const auto& u : o.unpaired_llm) {
    if (u.excluded) out.push_back(u.log.line);
  }
  return out;
}

}  // namespace

TEST(IndexByPath, Examples) {
  EXPECT_TRUE(index_by_path({}).empty());
  const auto idx = index_by_path({make_log(GT, "a.py", kPath, 9, "x"),
                                  make_log(GT, "a.py", kPath, 4, "y")});
  ASSERT_EQ(idx.size(), 1u);
  const auto& v = idx.begin()->second;
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].line, 4);
  EXPECT_EQ(v[1].line, 9);
}

TEST(IndexByPath, AnalysisExampleKeys) {
  const SourceFile f{"analysis.py", testkit::slurp(testkit::fixtures_dir() / "analysis.py"), "r"};
  const auto idx = index_by_path(extract_logs(f, {}));
  std::set<std::string> keys;
  for (const auto& [k, v] : idx) keys.insert(k.path.str());
  EXPECT_EQ(keys, (std::set<std::string>{"global/Analysis/__init__",
                                         "global/Analysis/__init__/if1",
                                         "global/Analysis/__init__/else1",
                                         "global/Analysis/__init__/if2"}));
}

TEST(Similarity, Examples) {
  auto a = make_log(GT, "a.py", kPath, 1, "");
  auto b = a;
  a.raw_statement = "logger.info(\"load model\")";
  b.raw_statement = "logger.info(\"load data\")";
  EXPECT_NEAR(statement_similarity(a, b), 0.75, 1e-12);
  EXPECT_NEAR(statement_similarity(a, a), 1.0, 1e-12);
  b.raw_statement = "print(\"xyz\")";
  EXPECT_EQ(statement_similarity(a, b), 0.0);
}

TEST(Similarity, MatchesCosineOracle) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto ta = oracle::random_tokens(rng, 8);
    const auto tb = oracle::random_tokens(rng, 8);
    auto a = make_log(GT, "a.py", kPath, 1, "");
    auto b = make_log(LLM, "a.py", kPath, 1, "");
    a.raw_statement = b.raw_statement = "";
    for (const auto& t : ta) a.raw_statement += t + " ";
    for (const auto& t : tb) b.raw_statement += t + ",";
    EXPECT_NEAR(statement_similarity(a, b),
                oracle::cosine(text::word_tokens(a.raw_statement),
                               text::word_tokens(b.raw_statement)),
                1e-12);
  }
}

TEST(PairLogs, OneToManyPanel) {
  const auto gt = index_by_path({make_log(GT, "a.py", kPath, 10, "g")});
  const auto llm = index_by_path({make_log(LLM, "a.py", kPath, 11, "l1"),
                                  make_log(LLM, "a.py", kPath, 12, "l2"),
                                  make_log(LLM, "a.py", kPath, 13, "l3")});
  const auto o = pair_logs(gt, llm, table({{{10, 11}, 0.82}, {{10, 12}, 0.65}, {{10, 13}, 0.47}}));
  ASSERT_EQ(o.pairs.size(), 1u);
  ASSERT_TRUE(o.pairs[0].llm);
  EXPECT_EQ(o.pairs[0].llm->line, 11);
  EXPECT_DOUBLE_EQ(*o.pairs[0].similarity, 0.82);
  EXPECT_EQ(o.pairs[0].scenario, Scenario::kOneN);
  EXPECT_EQ(excluded_lines(o), (std::vector<int>{12, 13}));
}

TEST(PairLogs, ManyToOnePanel) {
  const auto gt = index_by_path({make_log(GT, "a.py", kPath, 1, "g1"),
                                 make_log(GT, "a.py", kPath, 2, "g2"),
                                 make_log(GT, "a.py", kPath, 3, "g3")});
  const auto llm = index_by_path({make_log(LLM, "a.py", kPath, 5, "l")});
  const auto o = pair_logs(gt, llm, table({{{1, 5}, 0.4}, {{2, 5}, 0.9}, {{3, 5}, 0.1}}));
  ASSERT_EQ(o.pairs.size(), 3u);
  for (const auto& p : o.pairs) {
    ASSERT_TRUE(p.llm);
    EXPECT_EQ(p.llm->line, 5);
    EXPECT_EQ(p.scenario, Scenario::kNOne);
  }
  EXPECT_TRUE(o.unpaired_llm.empty());
}

TEST(PairLogs, ManyToManyPanel) {
  const auto gt = index_by_path({make_log(GT, "a.py", kPath, 1, "g1"),
                                 make_log(GT, "a.py", kPath, 2, "g2")});
  const auto llm = index_by_path({make_log(LLM, "a.py", kPath, 11, "l1"),
                                  make_log(LLM, "a.py", kPath, 12, "l2"),
                                  make_log(LLM, "a.py", kPath, 13, "l3")});
  const auto o = pair_logs(gt, llm,
                           table({{{1, 11}, 0.88}, {{1, 12}, 0.3}, {{1, 13}, 0.2},
                                  {{2, 11}, 0.49}, {{2, 12}, 0.73}, {{2, 13}, 0.1}}));
  ASSERT_EQ(o.pairs.size(), 2u);
  EXPECT_EQ(o.pairs[0].gt.line, 1);
  EXPECT_EQ(o.pairs[0].llm->line, 11);
  EXPECT_EQ(o.pairs[1].gt.line, 2);
  EXPECT_EQ(o.pairs[1].llm->line, 12);
  EXPECT_EQ(o.pairs[0].scenario, Scenario::kNN);
  EXPECT_EQ(excluded_lines(o), (std::vector<int>{13}));
}

TEST(PairLogs, GtOnlyAndOverloggingBuckets) {
  const auto gt = index_by_path({make_log(GT, "a.py", "global/f", 1, "g")});
  const auto llm = index_by_path({make_log(LLM, "a.py", "global/h", 3, "l")});
  const auto o = pair_logs(gt, llm);
  ASSERT_EQ(o.pairs.size(), 1u);
  EXPECT_FALSE(o.pairs[0].llm);
  EXPECT_FALSE(o.pairs[0].similarity);
  EXPECT_EQ(o.pairs[0].scenario, Scenario::kGtOnly);
  ASSERT_EQ(o.unpaired_llm.size(), 1u);
  EXPECT_FALSE(o.unpaired_llm[0].excluded);
  ASSERT_EQ(o.bucket_table.size(), 2u);
  EXPECT_EQ(o.bucket_table[0].gt_count, 1u);
  EXPECT_EQ(o.bucket_table[1].llm_count, 1u);
}

TEST(PairLogs, NeverCrossesFilesOrPaths) {
  const auto gt = index_by_path({make_log(GT, "a.py", kPath, 1, "same")});
  const auto llm = index_by_path({make_log(LLM, "b.py", kPath, 1, "same")});
  const auto o = pair_logs(gt, llm);
  EXPECT_FALSE(o.pairs[0].llm);
}

TEST(PairLogs, TiesGoToSmallerLine) {
  const auto gt = index_by_path({make_log(GT, "a.py", kPath, 1, "x")});
  const auto llm = index_by_path({make_log(LLM, "a.py", kPath, 9, "x"),
                                  make_log(LLM, "a.py", kPath, 4, "x")});
  const auto o = pair_logs(gt, llm);
  EXPECT_EQ(o.pairs[0].llm->line, 4);
}

TEST(Scenario, Shapes) {
  EXPECT_EQ(scenario_for(1, 1), Scenario::kOneOne);
  EXPECT_EQ(scenario_for(1, 3), Scenario::kOneN);
  EXPECT_EQ(scenario_for(3, 1), Scenario::kNOne);
  EXPECT_EQ(scenario_for(2, 2), Scenario::kNN);
  EXPECT_EQ(scenario_for(2, 0), Scenario::kGtOnly);
  for (auto s : {Scenario::kOneOne, Scenario::kOneN, Scenario::kNOne, Scenario::kNN,
                 Scenario::kGtOnly}) {
    EXPECT_EQ(scenario_from_string(to_string(s)), s);
  }
}

// ------------------------------------------------------------ properties

namespace {

struct RandomBucket {
  std::vector<LogStatement> gt;
  std::vector<LogStatement> llm;
};

RandomBucket random_bucket(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"load", "model", "data", "step", "save", "done"};
  std::uniform_int_distribution<int> count(0, 4);
  std::uniform_int_distribution<int> wlen(1, 3);
  std::uniform_int_distribution<std::size_t> w(0, words.size() - 1);
  std::uniform_int_distribution<int> path(0, 2);
  auto msg = [&] {
    std::string s;
    for (int i = wlen(rng); i > 0; --i) s += words[w(rng)] + " ";
    return s;
  };
  RandomBucket b;
  int line = 1;
  const int files = 1 + static_cast<int>(rng() % 2);
  for (int f = 0; f < files; ++f) {
    const std::string file = "f" + std::to_string(f) + ".py";
    for (int i = count(rng); i > 0; --i) {
      b.gt.push_back(make_log(GT, file, "global/p" + std::to_string(path(rng)), line++, msg()));
    }
    for (int i = count(rng); i > 0; --i) {
      b.llm.push_back(make_log(LLM, file, "global/p" + std::to_string(path(rng)), line++, msg()));
    }
  }
  return b;
}

}  // namespace

TEST(PairingProperties, ConservationArgmaxPartitionOrderIndependence) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    auto b = random_bucket(rng);
    const auto o = pair_logs(index_by_path(b.gt), index_by_path(b.llm));
    ASSERT_EQ(o.pairs.size(), b.gt.size());

    std::set<std::pair<std::string, int>> paired_llm;
    for (const auto& p : o.pairs) {
      if (!p.llm) {
        for (const auto& l : b.llm) {
          EXPECT_FALSE(l.file_id == p.gt.file_id && l.path == p.gt.path);
        }
        continue;
      }
      EXPECT_EQ(p.llm->path, p.gt.path);
      EXPECT_EQ(p.llm->file_id, p.gt.file_id);
      for (const auto& l : b.llm) {
        if (l.file_id == p.gt.file_id && l.path == p.gt.path) {
          EXPECT_GE(*p.similarity + 1e-15, statement_similarity(p.gt, l));
        }
      }
      paired_llm.insert({p.llm->file_id, p.llm->line});
    }
    std::set<std::pair<std::string, int>> unpaired;
    for (const auto& u : o.unpaired_llm) unpaired.insert({u.log.file_id, u.log.line});
    std::set<std::pair<std::string, int>> all;
    for (const auto& l : b.llm) all.insert({l.file_id, l.line});
    EXPECT_EQ(paired_llm.size() + unpaired.size(), all.size());
    std::set<std::pair<std::string, int>> uni = paired_llm;
    uni.insert(unpaired.begin(), unpaired.end());
    EXPECT_EQ(uni, all);

    std::shuffle(b.gt.begin(), b.gt.end(), rng);
    std::shuffle(b.llm.begin(), b.llm.end(), rng);
    const auto o2 = pair_logs(index_by_path(b.gt), index_by_path(b.llm));
    ASSERT_EQ(o2.pairs.size(), o.pairs.size());
    for (std::size_t i = 0; i < o.pairs.size(); ++i) {
      EXPECT_EQ(o.pairs[i].gt, o2.pairs[i].gt);
      EXPECT_EQ(o.pairs[i].llm, o2.pairs[i].llm);
    }
  }
}
