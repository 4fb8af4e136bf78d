#include <gtest/gtest.h>

#include <cstdlib>
#include <set>
#include <sstream>

#include <json.hpp>

#include "logeval/pipeline.hpp"
#include "logeval/serialize.hpp"
#include "support/paths.hpp"

using namespace logeval;
using logeval::testkit::TempDir;
using logeval::testkit::slurp;
using logeval::testkit::spit;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = pipeline::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture_config() {
  return (testkit::fixtures_dir() / "corpus" / "config.json").string();
}

// Minimal one-repo corpus holding the golden Analysis example. `import logging` goes
// after the class so the quoted line numbers stay put.
std::filesystem::path analysis_corpus(const std::filesystem::path& root) {
  spit(root / "repos.txt", "golden/analysis\n");
  spit(root / "metadata" / "golden__analysis.json",
       R"({"repo_id":"golden/analysis","stars":80,"contributors":4,"last_push":"2024-10-01T00:00:00Z",
           "created_at":"2020-01-01T00:00:00Z","primary_language":"Python","commits":9})");
  spit(root / "checkouts" / "golden__analysis" / "analysis.py",
       slurp(testkit::fixtures_dir() / "analysis.py") + "\nimport logging\n");
  spit(root / "config.json",
       R"({"corpus":{"repos":"repos.txt","metadata_dir":"metadata","checkouts_dir":"checkouts",
           "as_of":"2024-10-31"},"generation":{"provider":"mock"},"seed":1})");
  return root / "config.json";
}

}  // namespace

TEST(Cli, RunAllIsDeterministicAcrossRunsAndWorkers) {
  TempDir a("runa"), b("runb"), c("runc");
  const auto ra = cli({"run-all", "--config", fixture_config(), "--out", a.path().string()});
  ASSERT_EQ(ra.code, 0) << ra.err;
  const auto rb = cli({"run-all", "--config", fixture_config(), "--out", b.path().string()});
  ASSERT_EQ(rb.code, 0) << rb.err;
  const auto rc = cli({"run-all", "--config", fixture_config(), "--out", c.path().string(),
                       "--jobs", "8"});
  ASSERT_EQ(rc.code, 0) << rc.err;
  const std::string ma = slurp(a.path() / "evaluate" / "metrics.json");
  ASSERT_FALSE(ma.empty());
  EXPECT_EQ(ma, slurp(b.path() / "evaluate" / "metrics.json"));
  EXPECT_EQ(ma, slurp(c.path() / "evaluate" / "metrics.json"));
  for (const char* f : {"sample/review_sheet.csv", "extract/logs.jsonl", "pair/pairs.jsonl",
                        "categorize/records.jsonl", "report/report.md"}) {
    EXPECT_EQ(slurp(a.path() / f), slurp(c.path() / f)) << f;
  }

  const auto metrics = nlohmann::json::parse(ma);
  EXPECT_EQ(metrics["header"]["seed"], 7);
  EXPECT_EQ(metrics["header"]["model_id"], "gpt-4o-mini");
  const auto manifest = nlohmann::json::parse(slurp(a.path() / "mine" / "manifest.json"));
  EXPECT_EQ(manifest["qualifying_files"].size(), 12u);
  EXPECT_EQ(manifest["selected_repos"].size(), 3u);
  EXPECT_NE(ra.out.find("# "), std::string::npos);
}

TEST(Cli, RerunIsNoOpUnlessForced) {
  TempDir dir("rerun");
  ASSERT_EQ(cli({"run-all", "--config", fixture_config(), "--out", dir.path().string()}).code, 0);
  const std::string before = slurp(dir.path() / "evaluate" / "metrics.json");
  const auto again = cli({"run-all", "--config", fixture_config(), "--out", dir.path().string()});
  ASSERT_EQ(again.code, 0);
  for (const auto& stage : pipeline::stage_names()) {
    EXPECT_NE(again.out.find(stage + ": up to date"), std::string::npos) << again.out;
  }
  EXPECT_EQ(before, slurp(dir.path() / "evaluate" / "metrics.json"));

  const auto forced =
      cli({"evaluate", "--config", fixture_config(), "--out", dir.path().string(), "--force"});
  EXPECT_EQ(forced.code, 0);
  EXPECT_NE(forced.out.find("evaluate: ok"), std::string::npos);
  EXPECT_EQ(before, slurp(dir.path() / "evaluate" / "metrics.json"));

  // A changed seed invalidates sampling but not evaluation inputs.
  const auto reseeded = cli({"run-all", "--config", fixture_config(), "--out",
                             dir.path().string(), "--seed", "99"});
  EXPECT_EQ(reseeded.code, 0);
  EXPECT_NE(reseeded.out.find("sample: ok"), std::string::npos) << reseeded.out;
  EXPECT_NE(reseeded.out.find("pair: up to date"), std::string::npos) << reseeded.out;
}

TEST(Cli, ExtractOnAnalysisExample) {
  TempDir dir("analysis");
  const auto cfg = analysis_corpus(dir.path() / "corpus");
  const auto out = (dir.path() / "out").string();
  for (const char* stage : {"mine", "prepare", "generate", "extract"}) {
    const auto r = cli({stage, "--config", cfg.string(), "--out", out});
    ASSERT_EQ(r.code, 0) << stage << ": " << r.err;
  }
  std::set<std::string> gt_paths;
  for (const auto& row : io::read_jsonl(std::filesystem::path(out) / "extract" / "logs.jsonl")) {
    if (row["origin"] == "GT") {
      EXPECT_EQ(row["file_id"], "golden/analysis/analysis.py");
      gt_paths.insert(row["path"].get<std::string>());
    }
    for (const char* k : {"origin", "repo_id", "file_id", "path", "line", "level", "raw",
                          "template", "variables"}) {
      EXPECT_TRUE(row.contains(k)) << k;
    }
  }
  EXPECT_EQ(gt_paths, (std::set<std::string>{"global/Analysis/__init__",
                                             "global/Analysis/__init__/if1",
                                             "global/Analysis/__init__/else1",
                                             "global/Analysis/__init__/if2"}));
}

TEST(Cli, LiveProviderWithoutKeyIsConfigError) {
  const char* k1 = std::getenv("LOGEVAL_API_KEY");
  const char* k2 = std::getenv("OPENAI_API_KEY");
  const std::string v1 = k1 ? k1 : "", v2 = k2 ? k2 : "";
  unsetenv("LOGEVAL_API_KEY");
  unsetenv("OPENAI_API_KEY");
  TempDir dir("nokey");
  const auto out = dir.path().string();
  ASSERT_EQ(cli({"mine", "--config", fixture_config(), "--out", out}).code, 0);
  ASSERT_EQ(cli({"prepare", "--config", fixture_config(), "--out", out}).code, 0);
  const auto r = cli({"generate", "--config", fixture_config(), "--out", out, "--provider",
                      "openai"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("configuration error"), std::string::npos) << r.err;
  if (k1) setenv("LOGEVAL_API_KEY", v1.c_str(), 1);
  if (k2) setenv("OPENAI_API_KEY", v2.c_str(), 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({"bogus"}).code, 2);
  EXPECT_EQ(cli({"run-all", "--config", "/nonexistent/config.json"}).code, 2);
  TempDir dir("missing");
  const auto r = cli({"pair", "--config", fixture_config(), "--out", dir.path().string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Report, PureFunctionOfInputs) {
  TempDir dir("report");
  ASSERT_EQ(cli({"run-all", "--config", fixture_config(), "--out", dir.path().string()}).code, 0);
  const auto metrics = nlohmann::json::parse(slurp(dir.path() / "evaluate" / "metrics.json"));
  std::vector<study::CategorizedRecord> recs;
  for (const auto& row : io::read_jsonl(dir.path() / "categorize" / "records.jsonl")) {
    recs.push_back(io::record_from_json(row));
  }
  const std::string rendered = pipeline::render_report(metrics, recs);
  EXPECT_EQ(rendered, pipeline::render_report(metrics, recs));
  EXPECT_EQ(rendered, slurp(dir.path() / "report" / "report.md"));
}

TEST(Serialize, LogRoundTrip) {
  LogStatement s;
  s.origin = Origin::kLlm;
  s.repo_id = "o/r";
  s.file_id = "o/r/a.py";
  s.path = CodePath::parse("global/f/if1");
  s.line = 12;
  s.level = LogLevel::kWarning;
  s.raw_statement = "logger.warning('x %s', y)";
  s.template_text = "x";
  s.variables = {"y"};
  EXPECT_EQ(io::log_from_json(io::to_json(s)), s);
}
