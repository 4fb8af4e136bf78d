// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "logeval/generation.hpp"
#include "logeval/metrics.hpp"
#include "logeval/pairing.hpp"
#include "logeval/pipeline.hpp"
#include "logeval/python/ast.hpp"
#include "logeval/source_model.hpp"
#include "logeval/study.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"
#include "support/synthetic.hpp"

using namespace logeval;
using Clock = std::chrono::steady_clock;

namespace {

// Collects failed expectations for one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": got " << got << ", want " << want;
    expect(std::fabs(got - want) <= tol, os.str());
  }
  int failed = 0;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// AC1
void golden_extraction(Check& c, std::string& detail) {
  const SourceFile f{"analysis.py", testkit::slurp(testkit::fixtures_dir() / "analysis.py"), "r"};
  const auto t0 = Clock::now();
  const auto logs = extract_logs(f, {});
  const double secs = seconds_since(t0);
  const std::vector<std::string> want = {
      "global/Analysis/__init__", "global/Analysis/__init__/if1",
      "global/Analysis/__init__/else1", "global/Analysis/__init__/if2"};
  std::vector<std::string> got;
  for (const auto& l : logs) got.push_back(l.path.str());
  c.expect(got == want, "golden paths differ");
  c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s");
  detail = "4 paths, " + std::to_string(secs * 1000.0) + " ms";
}

// AC2
void strip_soundness(Check& c, std::string& detail) {
  int ok = 0;
  for (int i = 0; i < 200; ++i) {
    const SourceFile f{"syn" + std::to_string(i) + ".py",
                       testkit::synthetic_python(static_cast<std::uint64_t>(9000 + i), 200), "r"};
    const auto s = strip_file(f);
    const bool parses = python::parses(s.content);
    const bool no_logs = parses && extract_logs({f.file_id, s.content, "r"}, {}).empty();
    const bool idem = parses && strip_file({f.file_id, s.content, "r"}).content == s.content;
    c.expect(parses, f.file_id + " stripped output does not parse");
    c.expect(no_logs, f.file_id + " still has logs");
    c.expect(idem, f.file_id + " strip not idempotent");
    ok += parses && no_logs && idem;
  }
  detail = std::to_string(ok) + "/200 files";
}

// AC3
void pairing_golden(Check& c, std::string& detail) {
  using oracle::make_log;
  const auto G = Origin::kGroundTruth;
  const auto L = Origin::kLlm;
  auto table = [](std::map<std::pair<int, int>, double> t) -> SimilarityFn {
    return [t](const LogStatement& g, const LogStatement& l) { return t.at({g.line, l.line}); };
  };
  {
    const auto o = pair_logs(index_by_path({make_log(G, "a", "global", 1, "g")}),
                             index_by_path({make_log(L, "a", "global", 11, "a"),
                                            make_log(L, "a", "global", 12, "b"),
                                            make_log(L, "a", "global", 13, "c")}),
                             table({{{1, 11}, 0.82}, {{1, 12}, 0.65}, {{1, 13}, 0.47}}));
    c.expect(o.pairs.size() == 1 && o.pairs[0].llm && o.pairs[0].llm->line == 11 &&
                 o.pairs[0].similarity == 0.82,
             "1:n panel");
    c.expect(o.unpaired_llm.size() == 2 && o.unpaired_llm[0].excluded &&
                 o.unpaired_llm[1].excluded,
             "1:n exclusions");
  }
  {
    const auto o = pair_logs(index_by_path({make_log(G, "a", "global", 1, "g1"),
                                            make_log(G, "a", "global", 2, "g2"),
                                            make_log(G, "a", "global", 3, "g3")}),
                             index_by_path({make_log(L, "a", "global", 9, "l")}),
                             table({{{1, 9}, 0.3}, {{2, 9}, 0.6}, {{3, 9}, 0.9}}));
    bool all_share = o.pairs.size() == 3;
    for (const auto& p : o.pairs) all_share = all_share && p.llm && p.llm->line == 9;
    c.expect(all_share && o.unpaired_llm.empty(), "n:1 panel");
  }
  {
    const auto o = pair_logs(
        index_by_path({make_log(G, "a", "global", 1, "g1"), make_log(G, "a", "global", 2, "g2")}),
        index_by_path({make_log(L, "a", "global", 11, "l1"), make_log(L, "a", "global", 12, "l2"),
                       make_log(L, "a", "global", 13, "l3")}),
        table({{{1, 11}, 0.88}, {{1, 12}, 0.3}, {{1, 13}, 0.2},
               {{2, 11}, 0.49}, {{2, 12}, 0.73}, {{2, 13}, 0.1}}));
    c.expect(o.pairs.size() == 2 && o.pairs[0].llm->line == 11 && o.pairs[1].llm->line == 12,
             "n:n pairs");
    c.expect(o.unpaired_llm.size() == 1 && o.unpaired_llm[0].log.line == 13 &&
                 o.unpaired_llm[0].excluded,
             "n:n LLM3 excluded");
  }

  std::mt19937_64 rng(31337);
  const std::vector<std::string> words = {"load", "model", "data", "save", "epoch", "done"};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<LogStatement> gt, llm;
    const int ng = static_cast<int>(rng() % 5);
    const int nl = static_cast<int>(rng() % 5);
    auto msg = [&] { return words[rng() % words.size()] + " " + words[rng() % words.size()]; };
    for (int i = 0; i < ng; ++i) gt.push_back(make_log(G, "f.py", "global/p", 1 + i, msg()));
    for (int i = 0; i < nl; ++i) llm.push_back(make_log(L, "f.py", "global/p", 50 + i, msg()));
    const auto o = pair_logs(index_by_path(gt), index_by_path(llm));
    c.expect(o.pairs.size() == gt.size(), "GT conservation, trial " + std::to_string(trial));
    for (const auto& p : o.pairs) {
      if (!p.llm) continue;
      for (const auto& x : llm) {
        c.expect(*p.similarity >= statement_similarity(p.gt, x),
                 "argmax optimality, trial " + std::to_string(trial));
      }
    }
  }
  detail = "3 panels, 1000 random buckets";
}

// AC4
void metric_oracles(Check& c, std::string& detail) {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 100; ++i) {
    const auto a = oracle::random_tokens(rng, 12);
    const auto b = oracle::random_tokens(rng, 12);
    const std::string tag = " pair " + std::to_string(i);
    for (int n : {1, 2, 4}) {
      c.near(metrics::bleu(a, b, n), oracle::bleu(a, b, n), 1e-9, "BLEU-" + std::to_string(n) + tag);
    }
    c.near(metrics::rouge(a, b, metrics::RougeVariant::kOne), oracle::rouge_n(a, b, 1), 1e-9,
           "ROUGE-1" + tag);
    c.near(metrics::rouge(a, b, metrics::RougeVariant::kTwo), oracle::rouge_n(a, b, 2), 1e-9,
           "ROUGE-2" + tag);
    c.near(metrics::rouge(a, b, metrics::RougeVariant::kL), oracle::rouge_l(a, b), 1e-9,
           "ROUGE-L" + tag);
    c.near(metrics::ntlev(a, b), oracle::ntlev(a, b), 1e-9, "NTLev" + tag);
  }
  for (int a = 0; a <= 4; ++a) {
    for (int s = 0; s <= 4; ++s) {
      const double got =
          metrics::ordinal_closeness(static_cast<LogLevel>(a), static_cast<LogLevel>(s));
      c.expect(got == oracle::aod_pair(a, s),
               "AOD (" + std::to_string(a) + "," + std::to_string(s) + ")");
    }
  }
  // 2/3 has no exact binary form; 1 - 1/3 and 2.0/3 differ by one ulp.
  c.near(metrics::ordinal_closeness(LogLevel::kInfo, LogLevel::kDebug), 2.0 / 3.0, 1e-15,
         "AOD(info,debug)");
  detail = "100 random pairs, 25 level pairs";
}

// AC5
void placement_partition(Check& c, std::string& detail) {
  auto bucket = [](int id, std::size_t g, std::size_t l) {
    return PathBucket{PathKey{"a.py", CodePath::parse("global/p" + std::to_string(id))}, g, l};
  };
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<PathBucket> t;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      std::size_t g = rng() % 4, l = rng() % 4;
      if (g == 0 && l == 0) l = 1;
      t.push_back(bucket(i, g, l));
    }
    const auto r = metrics::placement_metrics(t);
    const auto& pc = r.path_counts;
    c.near(r.overlogging_rate + r.underlogging_rate + r.agree_rate, 1.0, 1e-12,
           "partition, trial " + std::to_string(trial));
    if (pc.agree + pc.under > 0) {
      c.near(r.coverage, static_cast<double>(pc.agree) / static_cast<double>(pc.agree + pc.under),
             1e-12, "coverage, trial " + std::to_string(trial));
    }
  }
  const auto w = metrics::placement_metrics(
      {bucket(1, 1, 1), bucket(2, 2, 0), bucket(3, 0, 3), bucket(4, 1, 2)});
  c.near(w.coverage, 2.0 / 3.0, 1e-12, "worked coverage");
  c.near(w.quantified_coverage_raw, 1.0, 1e-12, "worked QC_raw");
  c.near(w.overlogging_rate, 0.25, 1e-12, "worked over");
  c.near(w.underlogging_rate, 0.25, 1e-12, "worked under");
  detail = "1000 random tables + worked example";
}

// AC6
void sampling(Check& c, std::string& detail) {
  c.expect(study::sample_size(114522, 0.95, 0.05) == 384, "sample_size(114522) != 384");
  const std::map<study::Category, std::size_t> strata = {
      {study::Category::kUnderlogging, 5382},
      {study::Category::kOverlogging, 98208},
      {study::Category::kDifferentLevel, 6018},
      {study::Category::kDifferentVariables, 4914}};
  const auto alloc = study::allocate(strata, 384);
  std::size_t sum = 0;
  for (const auto& [k, v] : alloc) sum += v;
  c.expect(sum == 384, "allocation sums to " + std::to_string(sum));

  std::vector<study::CategorizedRecord> recs;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 3000; ++i) {
    study::CategorizedRecord r;
    r.category = study::kCategories[rng() % 4];
    r.file_id = "f" + std::to_string(i % 50) + ".py";
    r.path = CodePath::parse("global/p" + std::to_string(i));
    recs.push_back(r);
  }
  for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
    const auto plan = study::make_plan(recs, seed);
    std::size_t planned = 0;
    for (const auto& [k, v] : plan.allocation) planned += v;
    c.expect(planned == plan.total_n, "plan allocation sum");
    const auto a = study::stratified_sample(recs, plan);
    const auto b = study::stratified_sample(recs, study::make_plan(recs, seed));
    bool same = a.size() == b.size() && a.size() == plan.total_n;
    for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].path == b[i].path;
    c.expect(same, "seed " + std::to_string(seed) + " not deterministic");
  }
  detail = "n=384, allocation (" + std::to_string(alloc.at(study::Category::kUnderlogging)) + "," +
           std::to_string(alloc.at(study::Category::kOverlogging)) + "," +
           std::to_string(alloc.at(study::Category::kDifferentLevel)) + "," +
           std::to_string(alloc.at(study::Category::kDifferentVariables)) + ")";
}

// AC7
void end_to_end(Check& c, std::string& detail) {
  const std::string cfg = (testkit::fixtures_dir() / "corpus" / "config.json").string();
  testkit::TempDir a("ac7a"), b("ac7b"), d("ac7c");
  std::ostringstream out, err;
  auto run = [&](const testkit::TempDir& dir, const std::string& jobs) {
    return pipeline::run_cli({"run-all", "--config", cfg, "--out", dir.path().string(), "--jobs",
                              jobs},
                             out, err);
  };
  c.expect(run(a, "1") == 0, "run 1 failed: " + err.str());
  c.expect(run(b, "1") == 0, "run 2 failed: " + err.str());
  c.expect(run(d, "8") == 0, "jobs=8 run failed: " + err.str());
  const std::string ma = testkit::slurp(a.path() / "evaluate" / "metrics.json");
  c.expect(!ma.empty(), "metrics.json missing");
  c.expect(ma == testkit::slurp(b.path() / "evaluate" / "metrics.json"),
           "metrics.json differs across runs");
  c.expect(ma == testkit::slurp(d.path() / "evaluate" / "metrics.json"),
           "metrics.json differs between jobs 1 and 8");
  detail = "3 runs, metrics.json " + std::to_string(ma.size()) + " bytes";
}

// AC8
void throughput(Check& c, std::string& detail) {
  std::vector<SourceFile> gt_files, llm_files;
  std::size_t lines = 0;
  for (int i = 0; i < 1000; ++i) {
    SourceFile f{"f" + std::to_string(i) + ".py",
                 testkit::synthetic_python(static_cast<std::uint64_t>(20000 + i), 200), "r"};
    lines += static_cast<std::size_t>(std::count(f.content.begin(), f.content.end(), '\n'));
    llm_files.push_back({f.file_id, generation::mock_instrument(strip_file(f).content), "r"});
    gt_files.push_back(std::move(f));
  }
  const auto t0 = Clock::now();
  std::vector<LogStatement> gt, llm;
  for (const auto& f : gt_files) {
    auto logs = extract_logs(f, {}, Origin::kGroundTruth);
    gt.insert(gt.end(), logs.begin(), logs.end());
  }
  for (const auto& f : llm_files) {
    auto logs = extract_logs(f, {}, Origin::kLlm);
    llm.insert(llm.end(), logs.begin(), logs.end());
  }
  const auto outcome = pair_logs(index_by_path(gt), index_by_path(llm));
  const auto placement = metrics::placement_metrics(outcome.bucket_table);
  const auto ingredients = metrics::ingredient_report(outcome.pairs);
  const double secs = seconds_since(t0);
  c.expect(outcome.pairs.size() == gt.size(), "pair count");
  c.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
  std::ostringstream os;
  os.precision(3);
  os << "1000 files, " << lines / 1000 << " LOC avg, " << gt.size() << " GT / " << llm.size()
     << " LLM logs, " << secs << " s (coverage " << placement.coverage << ", "
     << ingredients.level.n_pairs << " scored pairs)";
  detail = os.str();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&, std::string&)>>> criteria = {
      {"AC1 golden path extraction", golden_extraction},
      {"AC2 strip soundness", strip_soundness},
      {"AC3 pairing golden + invariants", pairing_golden},
      {"AC4 metric oracles", metric_oracles},
      {"AC5 placement partition", placement_partition},
      {"AC6 sampling", sampling},
      {"AC7 end-to-end determinism", end_to_end},
      {"AC8 throughput", throughput},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    std::string detail;
    try {
      fn(c, detail);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << name << ": " << (c.failed == 0 ? "PASS" : "FAIL");
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    for (const auto& f : c.failures) std::cout << "    " << f << "\n";
    failed += c.failed != 0;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}
