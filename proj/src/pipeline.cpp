#include "logeval/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "logeval/digest.hpp"
#include "logeval/errors.hpp"
#include "logeval/metrics.hpp"
#include "logeval/pairing.hpp"
#include "logeval/serialize.hpp"

namespace logeval::pipeline {

using nlohmann::json;

namespace {

constexpr const char* kFormatVersion = "logeval-artifacts-1";

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
void maybe(const json& j, const char* key, T& dst) {
  if (j.contains(key) && !j[key].is_null()) dst = j[key].get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base) {
  RunConfig c;
  try {
    if (j.contains("corpus")) {
      const json& k = j["corpus"];
      if (k.contains("repos")) c.repos_file = resolve(base, k["repos"].get<std::string>());
      if (k.contains("metadata_dir")) {
        c.metadata_dir = resolve(base, k["metadata_dir"].get<std::string>());
      }
      if (k.contains("checkouts_dir")) {
        c.checkouts_dir = resolve(base, k["checkouts_dir"].get<std::string>());
      }
      maybe(k, "metadata_source", c.metadata_source);
      maybe(k, "clone_missing", c.clone_missing);
      maybe(k, "as_of", c.as_of);
      if (k.contains("criteria")) {
        const json& cr = k["criteria"];
        maybe(cr, "language", c.criteria.language);
        maybe(cr, "min_stars", c.criteria.min_stars);
        maybe(cr, "min_contributors", c.criteria.min_contributors);
        maybe(cr, "max_days_since_push", c.criteria.max_days_since_push);
      }
    }
    if (j.contains("extraction")) maybe(j["extraction"], "logger_pattern", c.extraction.logger_pattern);
    if (j.contains("generation")) {
      const json& g = j["generation"];
      maybe(g, "model_id", c.generation.model_id);
      maybe(g, "provider", c.generation.provider_name);
      maybe(g, "temperature", c.generation.temperature);
      maybe(g, "max_output_tokens", c.generation.max_output_tokens);
      maybe(g, "max_retries", c.generation.max_retries);
      maybe(g, "context_window_tokens", c.generation.context_window_tokens);
      if (g.contains("request_timeout_ms")) {
        c.generation.request_timeout = std::chrono::milliseconds(g["request_timeout_ms"].get<long long>());
      }
      if (g.contains("replay_dir")) c.replay_dir = resolve(base, g["replay_dir"].get<std::string>());
      if (g.contains("cache_dir")) c.cache_dir = resolve(base, g["cache_dir"].get<std::string>());
    }
    if (j.contains("out")) c.out_dir = resolve(base, j["out"].get<std::string>());
    maybe(j, "seed", c.seed);
    maybe(j, "jobs", c.jobs);
    if (j.contains("sampling")) {
      maybe(j["sampling"], "confidence", c.confidence);
      maybe(j["sampling"], "margin", c.margin);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& file) {
  json j;
  try {
    j = json::parse(io::read_text(file));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + file.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(file).parent_path());
}

void RunConfig::validate() const {
  if (jobs < 1) throw ConfigError("--jobs must be at least 1");
  if (out_dir.empty()) throw ConfigError("output directory must be set");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("confidence must lie in (0, 1)");
  if (!(margin > 0.0 && margin < 1.0)) throw ConfigError("margin must lie in (0, 1)");
  if (metadata_source != "fixtures" && metadata_source != "github") {
    throw ConfigError("metadata_source must be 'fixtures' or 'github'");
  }
  (void)corpus::parse_date(as_of);
  generation.validate();
}

namespace {

// --------------------------------------------------------- stage plumbing

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lk(mu);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

class Stage {
 public:
  Stage(const RunConfig& cfg, std::string name) : cfg_(cfg), dir_(cfg.stage_dir(name)) {
    result_.stage = std::move(name);
    hash_.update(kFormatVersion).update("\n").update(result_.stage).update("\n");
  }

  const fs::path& dir() const { return dir_; }
  fs::path out(const std::string& name) const { return dir_ / name; }

  // Path of an artifact produced by an earlier stage.
  fs::path need(const std::string& stage, const std::string& name) {
    const fs::path p = cfg_.stage_dir(stage) / name;
    if (!fs::exists(p)) {
      throw ConfigError("stage '" + result_.stage + "' needs " + p.string() + "; run '" + stage +
                        "' first");
    }
    add_file(p);
    return p;
  }

  void add_file(const fs::path& p) {
    const std::string content = io::read_text(p);
    hash_.update(p.filename().string()).update("\n").update(std::to_string(content.size()));
    hash_.update("\n").update(content);
  }

  void add(const json& j) { hash_.update(j.dump()).update("\n"); }

  // True when stage.json records the same input digest and every listed
  // output still exists; the recorded result is then returned as skipped.
  bool up_to_date(const std::vector<std::string>& outputs) {
    digest_ = hash_.hex();
    if (cfg_.force) return false;
    const fs::path meta = out("stage.json");
    if (!fs::exists(meta)) return false;
    for (const auto& o : outputs) {
      if (!fs::exists(out(o))) return false;
    }
    try {
      const json j = json::parse(io::read_text(meta));
      if (j.value("input_digest", "") != digest_) return false;
      result_.skipped = true;
      result_.failures = j.value("failures", std::vector<std::string>{});
      result_.counts = j.value("counts", json::object());
      return true;
    } catch (const json::exception&) {
      return false;
    }
  }

  void write(const std::string& name, const std::string& content) {
    io::write_text(out(name), content);
  }

  StageResult& result() { return result_; }

  StageResult finish() {
    std::sort(result_.failures.begin(), result_.failures.end());
    json meta{{"stage", result_.stage},
              {"format", kFormatVersion},
              {"input_digest", digest_},
              {"seed", cfg_.seed},
              {"status", result_.partial() ? "partial" : "ok"},
              {"failures", result_.failures},
              {"counts", result_.counts}};
    write("stage.json", meta.dump(2) + "\n");
    return result_;
  }

 private:
  const RunConfig& cfg_;
  fs::path dir_;
  Sha256 hash_;
  std::string digest_;
  StageResult result_;
};

json seed_header(const RunConfig& cfg, const std::string& stage) {
  return json{{"stage", stage}, {"seed", cfg.seed}, {"format", kFormatVersion}};
}

// ------------------------------------------------------- artifact loaders

struct SourceRow {
  SourceFile file;
  bool invalid_utf8 = false;
};

std::vector<SourceRow> load_sources(const fs::path& p) {
  std::vector<SourceRow> out;
  for (const auto& j : io::read_jsonl(p)) {
    SourceRow r;
    r.file.file_id = j.at("file_id").get<std::string>();
    r.file.repo_id = j.at("repo_id").get<std::string>();
    r.file.content = j.at("content").get<std::string>();
    r.invalid_utf8 = j.value("invalid_utf8", false);
    out.push_back(std::move(r));
  }
  return out;
}

struct GenerationRow {
  std::string file_id;
  std::string repo_id;
  bool valid = false;
  std::string generated_source;
};

std::vector<GenerationRow> load_generations(const fs::path& p) {
  std::vector<GenerationRow> out;
  for (const auto& j : io::read_jsonl(p)) {
    GenerationRow g;
    g.file_id = j.at("file_id").get<std::string>();
    g.repo_id = j.at("repo_id").get<std::string>();
    g.valid = j.at("valid").get<bool>();
    g.generated_source = j.value("generated_source", "");
    out.push_back(std::move(g));
  }
  return out;
}

struct LogSets {
  std::vector<LogStatement> gt;
  std::vector<LogStatement> llm;
};

LogSets load_logs(const fs::path& p) {
  LogSets s;
  for (const auto& j : io::read_jsonl(p)) {
    LogStatement l = io::log_from_json(j);
    (l.origin == Origin::kGroundTruth ? s.gt : s.llm).push_back(std::move(l));
  }
  return s;
}

PairingOutcome pair_from_logs(const LogSets& logs) {
  return pair_logs(index_by_path(logs.gt), index_by_path(logs.llm));
}

std::string checkout_dir_name(const std::string& repo_id) {
  std::string s = repo_id;
  std::replace(s.begin(), s.end(), '/', '_');
  const auto slash = repo_id.find('/');
  if (slash != std::string::npos) s = repo_id.substr(0, slash) + "__" + repo_id.substr(slash + 1);
  return s;
}

std::optional<fs::path> find_checkout(const RunConfig& cfg, const std::string& repo_id) {
  for (const fs::path& p : {cfg.checkouts_dir / checkout_dir_name(repo_id), cfg.checkouts_dir / repo_id}) {
    if (fs::is_directory(p)) return p;
  }
  return std::nullopt;
}

bool shallow_clone(const std::string& repo_id, const fs::path& dest) {
  static const std::regex kSafe("^[A-Za-z0-9_.-]+/[A-Za-z0-9_.-]+$");
  if (!std::regex_match(repo_id, kSafe)) return false;
  fs::create_directories(dest.parent_path());
  const std::string cmd = "git clone --quiet --depth 1 'https://github.com/" + repo_id + ".git' '" +
                          dest.string() + "' >/dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

void hash_tree(Stage& st, const fs::path& dir) {
  if (!fs::is_directory(dir)) return;
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator(); ++it) {
    if (it->is_directory() && it->path().filename() == ".git") {
      it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && it->path().extension() == ".py") files.push_back(it->path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    st.add(json(fs::relative(f, dir).generic_string()));
    st.add_file(f);
  }
}

}  // namespace

// ------------------------------------------------------------------ mine

StageResult run_mine(const RunConfig& cfg) {
  Stage st(cfg, "mine");
  if (cfg.repos_file.empty()) throw ConfigError("no repository list configured (corpus.repos)");
  if (!fs::exists(cfg.repos_file)) throw ConfigError("repository list not found: " + cfg.repos_file.string());
  const bool offline = cfg.offline || cfg.metadata_source == "fixtures";
  if (offline && cfg.metadata_dir.empty()) {
    throw ConfigError("offline metadata needs corpus.metadata_dir");
  }
  const auto ids = corpus::read_repo_list(cfg.repos_file);
  st.add_file(cfg.repos_file);
  st.add(json{{"offline", offline},
              {"as_of", cfg.as_of},
              {"language", cfg.criteria.language},
              {"min_stars", cfg.criteria.min_stars},
              {"min_contributors", cfg.criteria.min_contributors},
              {"max_days", cfg.criteria.max_days_since_push},
              {"logger_pattern", cfg.extraction.logger_pattern}});
  if (offline) {
    for (const auto& id : ids) {
      const fs::path p = cfg.metadata_dir / (checkout_dir_name(id) + ".json");
      st.add(json(id));
      if (fs::exists(p)) st.add_file(p);
    }
  }
  for (const auto& id : ids) {
    if (auto d = find_checkout(cfg, id)) hash_tree(st, *d);
  }
  if (st.up_to_date({"manifest.json", "sources.jsonl"})) return st.result();

  corpus::FetchResult fetched = offline
                                    ? corpus::fetch_metadata_offline(ids, cfg.metadata_dir)
                                    : corpus::fetch_metadata_live(ids, corpus::GithubOptions::from_env());
  const corpus::Date as_of = corpus::parse_date(cfg.as_of);
  const auto selected = corpus::select_repos(fetched.records, cfg.criteria, as_of);

  std::vector<SourceFile> all;
  std::map<std::string, bool> invalid;
  std::size_t python_files = 0;
  for (const auto& repo : selected) {
    auto dir = find_checkout(cfg, repo.repo_id);
    if (!dir && cfg.clone_missing && !cfg.offline && !cfg.checkouts_dir.empty()) {
      const fs::path dest = cfg.checkouts_dir / checkout_dir_name(repo.repo_id);
      if (shallow_clone(repo.repo_id, dest)) dir = dest;
    }
    if (!dir) {
      st.result().failures.push_back("checkout missing: " + repo.repo_id);
      continue;
    }
    corpus::CollectResult collected = corpus::collect_files(*dir, repo.repo_id);
    for (const auto& e : collected.io_errors) st.result().failures.push_back(repo.repo_id + ": " + e);
    for (auto& cf : collected.files) {
      ++python_files;
      cf.file.file_id = repo.repo_id + "/" + cf.file.file_id;
      invalid[cf.file.file_id] = cf.invalid_utf8;
      all.push_back(std::move(cf.file));
    }
  }
  const corpus::FilterResult filtered = corpus::filter_logged_files(all, cfg.extraction);

  corpus::CorpusManifest manifest;
  manifest.snapshot_date = as_of;
  std::set<std::string> repos_with_files;
  for (const auto& f : filtered.kept) {
    manifest.qualifying_files.push_back(f.file_id);
    repos_with_files.insert(f.repo_id);
  }
  manifest.selected_repos = selected;
  manifest.stats = corpus::repo_stats(selected, as_of);

  json mj = corpus::to_json(manifest);
  json unresolved = json::array();
  for (const auto& u : fetched.unresolved) unresolved.push_back({{"repo_id", u.repo_id}, {"reason", u.reason}});
  mj["unresolved"] = unresolved;
  mj["parse_failures"] = filtered.parse_failures;
  mj["header"] = seed_header(cfg, "mine");
  st.result().counts = {{"repos_listed", ids.size()},
                        {"repos_resolved", fetched.records.size()},
                        {"repos_selected", selected.size()},
                        {"repos_with_qualifying_files", repos_with_files.size()},
                        {"python_files", python_files},
                        {"qualifying_files", filtered.kept.size()},
                        {"parse_failures", filtered.parse_failures.size()}};
  mj["counts"] = st.result().counts;
  st.write("manifest.json", mj.dump(2) + "\n");

  std::vector<json> rows;
  for (const auto& f : filtered.kept) {
    rows.push_back({{"file_id", f.file_id},
                    {"repo_id", f.repo_id},
                    {"invalid_utf8", invalid[f.file_id]},
                    {"content", f.content}});
  }
  st.write("sources.jsonl", io::to_jsonl(rows));
  return st.finish();
}

// --------------------------------------------------------------- prepare

StageResult run_prepare(const RunConfig& cfg) {
  Stage st(cfg, "prepare");
  const fs::path src = st.need("mine", "sources.jsonl");
  st.add(json{{"logger_pattern", cfg.extraction.logger_pattern}});
  if (st.up_to_date({"stripped.jsonl"})) return st.result();

  const auto sources = load_sources(src);
  std::vector<std::optional<StrippedFile>> out(sources.size());
  std::vector<std::string> errors(sources.size());
  parallel_for(sources.size(), cfg.jobs, [&](std::size_t i) {
    try {
      out[i] = strip_file(sources[i].file, cfg.extraction);
    } catch (const ParseError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<json> rows;
  long removed_logs = 0;
  long removed_comments = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!out[i]) {
      st.result().failures.push_back(sources[i].file.file_id + ": " + errors[i]);
      continue;
    }
    removed_logs += out[i]->removed_logs;
    removed_comments += out[i]->removed_comment_lines;
    rows.push_back({{"file_id", out[i]->file_id},
                    {"repo_id", sources[i].file.repo_id},
                    {"removed_logs", out[i]->removed_logs},
                    {"removed_comment_lines", out[i]->removed_comment_lines},
                    {"content", out[i]->content}});
  }
  st.write("stripped.jsonl", io::to_jsonl(rows));
  st.result().counts = {{"files", rows.size()},
                        {"removed_logs", removed_logs},
                        {"removed_comment_lines", removed_comments}};
  return st.finish();
}

// -------------------------------------------------------------- generate

StageResult run_generate(const RunConfig& cfg) {
  if (cfg.offline && cfg.generation.provider_name == "openai") {
    throw ConfigError("--offline forbids the live 'openai' provider; use mock or replay");
  }
  auto provider = generation::make_provider(cfg.generation.provider_name, cfg.replay_dir);
  Stage st(cfg, "generate");
  const fs::path src = st.need("prepare", "stripped.jsonl");
  const auto& g = cfg.generation;
  st.add(json{{"model", g.model_id},
              {"provider", g.provider_name},
              {"temperature", g.temperature},
              {"max_output_tokens", g.max_output_tokens},
              {"context_window_tokens", g.context_window_tokens}});
  if (g.provider_name == "replay") st.add(json(cfg.replay_dir.string()));
  if (st.up_to_date({"generations.jsonl"})) return st.result();

  const fs::path cache_dir = cfg.cache_dir.empty() ? st.out("cache") : cfg.cache_dir;
  generation::ResponseCache cache(cache_dir);
  generation::Generator gen(g, *provider, &cache, {}, cfg.seed);

  std::vector<json> stripped = io::read_jsonl(src);
  struct Outcome {
    std::optional<generation::GenerationRecord> rec;
    std::string error;
  };
  std::vector<Outcome> results(stripped.size());
  parallel_for(stripped.size(), cfg.jobs, [&](std::size_t i) {
    StrippedFile sf;
    sf.file_id = stripped[i].at("file_id").get<std::string>();
    sf.content = stripped[i].at("content").get<std::string>();
    try {
      results[i].rec = gen.generate(sf);
    } catch (const generation::InvalidGeneration& e) {
      results[i].rec = e.record();
      results[i].error = e.what();
    } catch (const generation::ContextOverflow& e) {
      results[i].error = e.what();
    } catch (const generation::ProviderError& e) {
      results[i].error = e.what();
    }
  });

  std::vector<json> rows;
  std::vector<json> provider_log;
  std::size_t valid = 0;
  std::size_t cached = 0;
  for (std::size_t i = 0; i < stripped.size(); ++i) {
    const std::string fid = stripped[i]["file_id"].get<std::string>();
    json row{{"file_id", fid}, {"repo_id", stripped[i]["repo_id"]}};
    const auto& r = results[i];
    if (r.rec) {
      row["prompt_hash"] = r.rec->prompt_hash;
      row["valid"] = r.rec->valid;
      row["generated_source"] = r.rec->generated_source;
      provider_log.push_back(
          {{"file_id", fid}, {"from_cache", r.rec->from_cache}, {"metadata", r.rec->provider_metadata}});
      if (r.rec->valid) ++valid;
      if (r.rec->from_cache) ++cached;
    } else {
      row["valid"] = false;
    }
    if (!r.error.empty()) {
      row["error"] = r.error;
      st.result().failures.push_back(fid + ": " + r.error);
    }
    rows.push_back(std::move(row));
  }
  st.write("generations.jsonl", io::to_jsonl(rows));
  st.write("provider_log.jsonl", io::to_jsonl(provider_log));
  st.result().counts = {{"files", rows.size()},
                        {"valid", valid},
                        {"invalid_or_failed", rows.size() - valid}};
  // Cache hits vary between first and repeated runs; keep them out of
  // stage.json so it stays reproducible.
  (void)cached;
  return st.finish();
}

// --------------------------------------------------------------- extract

StageResult run_extract(const RunConfig& cfg) {
  Stage st(cfg, "extract");
  const fs::path src = st.need("mine", "sources.jsonl");
  const fs::path gens = st.need("generate", "generations.jsonl");
  st.add(json{{"logger_pattern", cfg.extraction.logger_pattern}});
  if (st.up_to_date({"logs.jsonl"})) return st.result();

  const auto sources = load_sources(src);
  std::map<std::string, const SourceRow*> by_id;
  for (const auto& s : sources) by_id[s.file.file_id] = &s;
  const auto generations = load_generations(gens);

  struct Work {
    const SourceRow* gt;
    const GenerationRow* llm;
  };
  std::vector<Work> work;
  std::size_t excluded = 0;
  for (const auto& g : generations) {
    auto it = by_id.find(g.file_id);
    if (!g.valid || it == by_id.end()) {
      ++excluded;
      continue;
    }
    work.push_back({it->second, &g});
  }

  struct Out {
    ExtractionResult gt;
    ExtractionResult llm;
    std::string error;
  };
  std::vector<Out> outs(work.size());
  parallel_for(work.size(), cfg.jobs, [&](std::size_t i) {
    try {
      outs[i].gt = extract_logs_detailed(work[i].gt->file, cfg.extraction, Origin::kGroundTruth);
      SourceFile gen{work[i].llm->file_id, work[i].llm->generated_source, work[i].llm->repo_id};
      outs[i].llm = extract_logs_detailed(gen, cfg.extraction, Origin::kLlm);
    } catch (const ParseError& e) {
      outs[i].error = e.what();
    }
  });

  std::vector<json> rows;
  std::size_t gt_logs = 0;
  std::size_t llm_logs = 0;
  long unresolved_gt = 0;
  long unresolved_llm = 0;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (!outs[i].error.empty()) {
      st.result().failures.push_back(work[i].gt->file.file_id + ": " + outs[i].error);
      continue;
    }
    for (const auto& l : outs[i].gt.logs) rows.push_back(io::to_json(l));
    for (const auto& l : outs[i].llm.logs) rows.push_back(io::to_json(l));
    gt_logs += outs[i].gt.logs.size();
    llm_logs += outs[i].llm.logs.size();
    unresolved_gt += outs[i].gt.unrecognized_level;
    unresolved_llm += outs[i].llm.unrecognized_level;
  }
  st.write("logs.jsonl", io::to_jsonl(rows));
  st.result().counts = {{"files", work.size()},
                        {"excluded_files", excluded},
                        {"gt_logs", gt_logs},
                        {"llm_logs", llm_logs},
                        {"gt_unrecognized_level", unresolved_gt},
                        {"llm_unrecognized_level", unresolved_llm}};
  return st.finish();
}

// ------------------------------------------------------------------ pair

StageResult run_pair(const RunConfig& cfg) {
  Stage st(cfg, "pair");
  const fs::path logs_path = st.need("extract", "logs.jsonl");
  if (st.up_to_date({"pairs.jsonl", "unpaired.jsonl", "buckets.jsonl"})) return st.result();

  const PairingOutcome outcome = pair_from_logs(load_logs(logs_path));
  st.write("pairs.jsonl", io::to_jsonl(io::pair_lines(outcome)));
  std::vector<json> unpaired;
  std::size_t excluded = 0;
  for (const auto& u : outcome.unpaired_llm) {
    unpaired.push_back({{"file_id", u.log.file_id},
                        {"path", u.log.path.str()},
                        {"llm_line", u.log.line},
                        {"excluded", u.excluded}});
    if (u.excluded) ++excluded;
  }
  st.write("unpaired.jsonl", io::to_jsonl(unpaired));
  std::vector<json> buckets;
  for (const auto& b : outcome.bucket_table) {
    buckets.push_back({{"file_id", b.key.file_id},
                       {"path", b.key.path.str()},
                       {"gt", b.gt_count},
                       {"llm", b.llm_count}});
  }
  st.write("buckets.jsonl", io::to_jsonl(buckets));
  json scen = json::object();
  for (const auto& p : outcome.pairs) {
    const std::string k(to_string(p.scenario));
    scen[k] = scen.value(k, 0) + 1;
  }
  st.result().counts = {{"pairs", outcome.pairs.size()},
                        {"unpaired_llm", outcome.unpaired_llm.size()},
                        {"excluded_llm", excluded},
                        {"buckets", outcome.bucket_table.size()},
                        {"scenarios", scen}};
  return st.finish();
}

// -------------------------------------------------------------- evaluate

StageResult run_evaluate(const RunConfig& cfg) {
  Stage st(cfg, "evaluate");
  const fs::path logs_path = st.need("extract", "logs.jsonl");
  st.add(json{{"seed", cfg.seed}, {"model", cfg.generation.model_id}});
  if (st.up_to_date({"metrics.json", "pair_metrics.jsonl"})) return st.result();

  const PairingOutcome outcome = pair_from_logs(load_logs(logs_path));
  json m;
  m["header"] = seed_header(cfg, "evaluate");
  m["header"]["model_id"] = cfg.generation.model_id;

  std::size_t llm_present = 0;
  std::size_t excluded = 0;
  json scen = json::object();
  for (const auto& p : outcome.pairs) {
    if (p.llm) ++llm_present;
    const std::string k(to_string(p.scenario));
    scen[k] = scen.value(k, 0) + 1;
  }
  for (const auto& u : outcome.unpaired_llm) excluded += u.excluded ? 1 : 0;
  m["pairing"] = {{"pairs", outcome.pairs.size()},
                  {"llm_present_pairs", llm_present},
                  {"gt_only_pairs", outcome.pairs.size() - llm_present},
                  {"unpaired_llm", outcome.unpaired_llm.size()},
                  {"excluded_llm", excluded},
                  {"paths", outcome.bucket_table.size()},
                  {"scenarios", scen}};
  try {
    m["placement"] = io::to_json(metrics::placement_metrics(outcome.bucket_table));
  } catch (const EmptyCorpus&) {
    m["placement"] = nullptr;
    st.result().failures.push_back("placement: no logged paths");
  }
  std::vector<json> per_pair;
  try {
    const metrics::IngredientReport rep = metrics::ingredient_report(outcome.pairs);
    m["ingredients"] = io::to_json(rep);
    for (const auto& pm : rep.per_pair) per_pair.push_back(io::to_json(pm));
  } catch (const NoPairs&) {
    m["ingredients"] = nullptr;
    st.result().failures.push_back("ingredients: no pairs with an LLM log");
  }
  st.write("metrics.json", m.dump(2) + "\n");
  st.write("pair_metrics.jsonl", io::to_jsonl(per_pair));
  st.result().counts = {{"pairs", outcome.pairs.size()}, {"llm_present_pairs", llm_present}};
  return st.finish();
}

// ------------------------------------------------------------ categorize

StageResult run_categorize(const RunConfig& cfg) {
  Stage st(cfg, "categorize");
  const fs::path logs_path = st.need("extract", "logs.jsonl");
  if (st.up_to_date({"records.jsonl"})) return st.result();

  const PairingOutcome outcome = pair_from_logs(load_logs(logs_path));
  const auto records = study::categorize(outcome);
  std::vector<json> rows;
  for (const auto& r : records) rows.push_back(io::to_json(r));
  st.write("records.jsonl", io::to_jsonl(rows));
  json counts = json::object();
  for (const auto& [c, n] : study::category_counts(records)) counts[std::string(study::to_string(c))] = n;
  st.result().counts = {{"records", records.size()}, {"categories", counts}};
  return st.finish();
}

// ---------------------------------------------------------------- sample

StageResult run_sample(const RunConfig& cfg) {
  Stage st(cfg, "sample");
  const fs::path rec_path = st.need("categorize", "records.jsonl");
  const fs::path src = st.need("mine", "sources.jsonl");
  const fs::path gens = st.need("generate", "generations.jsonl");
  st.add(json{{"seed", cfg.seed}, {"confidence", cfg.confidence}, {"margin", cfg.margin}});
  if (st.up_to_date({"plan.json", "sample.jsonl", "review_sheet.csv", "review_sheet.jsonl"})) {
    return st.result();
  }

  std::vector<study::CategorizedRecord> records;
  for (const auto& j : io::read_jsonl(rec_path)) records.push_back(io::record_from_json(j));
  const study::SamplePlan plan = study::make_plan(records, cfg.seed, cfg.confidence, cfg.margin);
  const auto sample = study::stratified_sample(records, plan);

  std::map<std::string, std::string> gt_src;
  for (auto& s : load_sources(src)) gt_src[s.file.file_id] = std::move(s.file.content);
  std::map<std::string, std::string> llm_src;
  for (auto& g : load_generations(gens)) {
    if (g.valid) llm_src[g.file_id] = std::move(g.generated_source);
  }
  const study::SourceLookup lookup = [&](Origin o, const std::string& id) -> std::optional<std::string> {
    const auto& m = o == Origin::kGroundTruth ? gt_src : llm_src;
    auto it = m.find(id);
    if (it == m.end()) return std::nullopt;
    return it->second;
  };
  const auto rows = study::review_rows(sample, lookup);

  json alloc = json::object();
  json strata = json::object();
  for (const auto& [c, n] : plan.allocation) alloc[std::string(study::to_string(c))] = n;
  for (const auto& [c, n] : study::category_counts(records)) strata[std::string(study::to_string(c))] = n;
  json pj{{"header", seed_header(cfg, "sample")},
          {"confidence", plan.confidence},
          {"margin", plan.margin},
          {"population", records.size()},
          {"total_n", plan.total_n},
          {"strata", strata},
          {"allocation", alloc}};
  st.write("plan.json", pj.dump(2) + "\n");
  std::vector<json> sj;
  for (const auto& r : sample) sj.push_back(io::to_json(r));
  st.write("sample.jsonl", io::to_jsonl(sj));
  std::ostringstream csv;
  study::write_review_csv(csv, rows);
  st.write("review_sheet.csv", csv.str());
  std::ostringstream jl;
  study::write_review_jsonl(jl, rows);
  st.write("review_sheet.jsonl", jl.str());
  st.result().counts = {{"population", records.size()}, {"sampled", sample.size()}};
  return st.finish();
}

// ---------------------------------------------------------------- report

namespace {

std::string pct(const json& v) {
  if (!v.is_number()) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v.get<double>() * 100.0 << "%";
  return os.str();
}

std::string num(const json& v, int prec = 3) {
  if (!v.is_number()) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v.get<double>();
  return os.str();
}

}  // namespace

std::string render_report(const json& m, const std::vector<study::CategorizedRecord>& records) {
  std::ostringstream os;
  os << "# Log generation evaluation report\n\n";
  if (m.contains("header")) {
    os << "model: " << m["header"].value("model_id", "?") << "  seed: " << m["header"].value("seed", 0)
       << "\n\n";
  }
  os << "## Placement\n\n| Metric | Value |\n|---|---|\n";
  const json& p = m.contains("placement") ? m["placement"] : json();
  if (p.is_object()) {
    os << "| Coverage | " << pct(p["coverage"]) << " |\n";
    os << "| Quantified coverage (raw) | " << pct(p["quantified_coverage_raw"]) << " |\n";
    os << "| Quantified coverage (capped) | " << pct(p["quantified_coverage_capped"]) << " |\n";
    os << "| Quantified coverage, covered paths (raw) | "
       << pct(p["quantified_coverage_raw_covered_paths"]) << " |\n";
    os << "| Overlogging | " << pct(p["overlogging_rate"]) << " |\n";
    os << "| Underlogging | " << pct(p["underlogging_rate"]) << " |\n";
    os << "| LLM/GT log ratio | " << num(p["llm_to_gt_log_ratio"], 2) << " |\n";
    const json& pc = p["path_counts"];
    os << "\npaths: " << pc.value("total", 0) << " (over " << pc.value("over", 0) << ", under "
       << pc.value("under", 0) << ", agree " << pc.value("agree", 0) << ")\n";
  } else {
    os << "| (no logged paths) | n/a |\n";
  }

  os << "\n## Ingredients\n\n| Metric | Value |\n|---|---|\n";
  const json& ing = m.contains("ingredients") ? m["ingredients"] : json();
  if (ing.is_object()) {
    os << "| L-ACC | " << pct(ing["level"]["l_acc"]) << " |\n";
    os << "| AOD | " << pct(ing["level"]["aod"]) << " |\n";
    os << "| Variable coverage | " << pct(ing["variable_coverage"]["mean"]) << " (n="
       << ing["variable_coverage"].value("n_pairs", 0) << ") |\n";
    const json& t = ing["text"];
    for (const auto* k : {"bleu_1", "bleu_2", "bleu_4", "meteor", "rouge_1", "rouge_2", "rouge_l", "ntlev"}) {
      std::string label = k;
      std::transform(label.begin(), label.end(), label.begin(), ::toupper);
      std::replace(label.begin(), label.end(), '_', '-');
      os << "| " << label << " | " << num(t[k]) << " |\n";
    }
    os << "\npairs with an LLM log: " << ing["level"].value("n_pairs", 0) << "\n";
  } else {
    os << "| (no pairs with an LLM log) | n/a |\n";
  }

  os << "\n## Categories\n\n| Category | Logs | Share |\n|---|---|---|\n";
  const auto counts = study::category_counts(records);
  std::size_t total = 0;
  for (const auto& [c, n] : counts) total += n;
  for (auto c : study::kCategories) {
    const std::size_t n = counts.at(c);
    os << "| " << study::to_string(c) << " | " << n << " | "
       << (total ? pct(json(static_cast<double>(n) / static_cast<double>(total))) : std::string("n/a"))
       << " |\n";
  }
  os << "| Total | " << total << " | |\n";
  return os.str();
}

StageResult run_report(const RunConfig& cfg) {
  Stage st(cfg, "report");
  const fs::path mpath = st.need("evaluate", "metrics.json");
  const fs::path rpath = st.need("categorize", "records.jsonl");
  if (st.up_to_date({"report.md"})) return st.result();
  json m;
  try {
    m = json::parse(io::read_text(mpath));
  } catch (const json::exception& e) {
    throw ConfigError("malformed " + mpath.string() + ": " + e.what());
  }
  std::vector<study::CategorizedRecord> records;
  for (const auto& j : io::read_jsonl(rpath)) records.push_back(io::record_from_json(j));
  st.write("report.md", render_report(m, records));
  return st.finish();
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> kNames = {"mine",     "prepare",    "generate",
                                                  "extract",  "pair",       "evaluate",
                                                  "categorize", "sample",   "report"};
  return kNames;
}

StageResult run_stage(const std::string& name, const RunConfig& cfg) {
  if (name == "mine") return run_mine(cfg);
  if (name == "prepare") return run_prepare(cfg);
  if (name == "generate") return run_generate(cfg);
  if (name == "extract") return run_extract(cfg);
  if (name == "pair") return run_pair(cfg);
  if (name == "evaluate") return run_evaluate(cfg);
  if (name == "categorize") return run_categorize(cfg);
  if (name == "sample") return run_sample(cfg);
  if (name == "report") return run_report(cfg);
  throw ConfigError("unknown stage '" + name + "'");
}

// ------------------------------------------------------------------- cli

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluate LLM-generated log statements against the logs developers wrote."};
  app.name("logeval");
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::string provider;
  std::string model;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool offline = false;
  bool force = false;

  std::vector<std::string> commands = stage_names();
  commands.push_back("run-all");
  app.add_option("command", command, "Stage to run, or run-all")->required()->check(CLI::IsMember(commands));
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (stage artifacts go to <out>/<stage>/)");
  app.add_option("--provider", provider, "LLM provider: mock, replay or openai");
  app.add_option("--model", model, "Model identifier sent to the provider");
  auto* seed_opt = app.add_option("--seed", seed, "Global seed for sampling and retry jitter");
  auto* jobs_opt = app.add_option("--jobs", jobs, "Worker threads for per-file stages");
  app.add_flag("--offline", offline, "Never touch the network");
  app.add_flag("--force", force, "Re-run stages even when their inputs are unchanged");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!provider.empty()) cfg.generation.provider_name = provider;
    if (!model.empty()) cfg.generation.model_id = model;
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (jobs_opt->count() > 0) cfg.jobs = jobs;
    cfg.offline = cfg.offline || offline;
    cfg.force = force;
    cfg.validate();

    const std::vector<std::string> plan =
        command == "run-all" ? stage_names() : std::vector<std::string>{command};
    bool partial = false;
    for (const auto& name : plan) {
      const StageResult r = run_stage(name, cfg);
      out << name << ": " << (r.skipped ? "up to date" : (r.partial() ? "partial" : "ok"));
      if (!r.counts.empty()) out << " " << r.counts.dump();
      out << "\n";
      for (const auto& f : r.failures) err << "  " << name << ": " << f << "\n";
      partial = partial || r.partial();
    }
    if (command == "report" || command == "run-all") {
      out << "\n" << io::read_text(cfg.stage_dir("report") / "report.md");
    }
    return partial ? 1 : 0;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const corpus::AuthError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace logeval::pipeline
