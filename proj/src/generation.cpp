#include "logeval/generation.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "logeval/digest.hpp"
#include "logeval/http.hpp"
#include "logeval/log_call.hpp"
#include "logeval/python/ast.hpp"
#include "logeval/text.hpp"

namespace logeval::generation {

namespace fs = std::filesystem;
using nlohmann::json;

void GenerationConfig::validate() const {
  if (model_id.empty()) throw ConfigError("model_id must not be empty");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (max_output_tokens <= 0) throw ConfigError("max_output_tokens must be positive");
  if (chars_per_token == 0) throw ConfigError("chars_per_token must be positive");
}

namespace {

constexpr std::string_view kPromptHead =
    "You are an expert machine learning developer. You will receive a Python file. "
    "Follow these instructions:\n"
    "1. Review the provided Python file\n"
    "2. Add any missing log statements using the logging library.\n"
    "3. Verify that each logging statement is in an appropriate position within the code.\n"
    "4. Check the logging level of each logging statement to ensure it aligns with its "
    "importance.\n"
    "5. Evaluate the quality of the log texts, ensuring they cover important details and "
    "follow best practices.\n"
    "6. Return only the complete code snippet with all necessary log statements added. "
    "Do not modify the rest of the code.\n"
    "This is the file:\n";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::string build_prompt(const StrippedFile& stripped) {
  std::string out(kPromptHead);
  out += stripped.content;
  return out;
}

std::string extract_code(std::string_view response) {
  const auto open = response.find("```");
  if (open == std::string_view::npos) return std::string(text::trim(response));
  auto body = response.find('\n', open);
  if (body == std::string_view::npos) return "";
  ++body;
  auto close = response.find("```", body);
  std::string_view code = response.substr(
      body, close == std::string_view::npos ? std::string_view::npos : close - body);
  if (!code.empty() && code.back() == '\n') code.remove_suffix(1);
  if (!code.empty() && code.back() == '\r') code.remove_suffix(1);
  return std::string(code);
}

std::string prompt_hash(std::string_view model_id, std::string_view prompt) {
  return Sha256().update(model_id).update(std::string_view("\0", 1)).update(prompt).hex();
}

// ------------------------------------------------------------------ cache

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& hash) const {
  const fs::path p = dir_ / (hash + ".json");
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    json j = json::parse(in);
    return j.at("response_text").get<std::string>();
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& hash, const json& request,
                        const std::string& response_text) {
  json j = {{"request", request}, {"response_text", response_text}};
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const fs::path final_path = dir_ / (hash + ".json");
  const fs::path tmp = dir_ / (hash + ".json.tmp." + tid.str());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, final_path);
}

// -------------------------------------------------------------- providers

std::string mock_instrument(std::string_view source) {
  python::Module mod;
  try {
    mod = python::parse_module(std::string(source));
  } catch (const ParseError&) {
    return std::string(source);
  }
  const std::string_view src = mod.text();
  const auto& starts = mod.tokens.line_starts;
  std::vector<std::pair<std::uint32_t, std::string>> edits;

  walk_blocks(mod.body, [&](const python::Block& block) {
    for (const auto& st : block.stmts) {
      if (st->kind != python::StmtKind::kFunctionDef || st->clauses.empty()) continue;
      const auto& body = st->clauses.front().block;
      if (body.stmts.empty()) continue;
      const auto& first = *body.stmts.front();
      const std::string call = "logging.info(\"enter " + std::string(st->name) + "\")";
      if (body.inline_suite) {
        edits.emplace_back(first.begin, call + "; ");
        continue;
      }
      const std::uint32_t ls = starts[static_cast<std::size_t>(first.line - 1)];
      const std::string indent(src.substr(ls, first.begin - ls));
      edits.emplace_back(ls, indent + call + "\n");
    }
  });

  if (!imports_logging(SourceFile{"", std::string(source), ""})) {
    std::uint32_t at = 0;
    for (const auto& st : mod.body.stmts) {
      const bool future = st->kind == python::StmtKind::kImportFrom &&
                          std::find(st->imported_modules.begin(), st->imported_modules.end(),
                                    "__future__") != st->imported_modules.end();
      if (!future) break;
      at = st->end_line < static_cast<int>(starts.size())
               ? starts[static_cast<std::size_t>(st->end_line)]
               : static_cast<std::uint32_t>(src.size());
    }
    std::string line = "import logging\n";
    if (at == src.size() && !src.empty() && src.back() != '\n') line = "\n" + line;
    edits.emplace_back(at, line);
  }

  std::stable_sort(edits.begin(), edits.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::string out(src);
  for (const auto& [pos, textv] : edits) out.insert(pos, textv);
  return out;
}

ChatResponse MockProvider::complete(const ChatRequest& req) {
  const auto at = req.prompt.find(kPromptHead);
  std::string_view source(req.prompt);
  if (at != std::string::npos) source.remove_prefix(at + kPromptHead.size());
  std::string code = mock_instrument(source);
  ChatResponse r;
  r.text = "```python\n" + code + (code.empty() || code.back() == '\n' ? "" : "\n") + "```\n";
  r.metadata = {{"provider", "mock"}};
  return r;
}

ChatResponse ReplayProvider::complete(const ChatRequest& req) {
  const std::string hash = prompt_hash(req.model, req.prompt);
  const fs::path js = dir_ / (hash + ".json");
  const fs::path txt = dir_ / (hash + ".txt");
  ChatResponse r;
  r.metadata = {{"provider", "replay"}};
  if (fs::exists(js)) {
    try {
      r.text = json::parse(read_file(js)).at("response_text").get<std::string>();
    } catch (const json::exception& e) {
      throw ProviderError(500, "malformed replay entry " + js.string() + ": " + e.what());
    }
    return r;
  }
  if (fs::exists(txt)) {
    r.text = read_file(txt);
    return r;
  }
  throw ProviderError(404, "no recorded response for " + hash);
}

OpenAiProvider::OpenAiProvider(std::string api_base, std::string api_key)
    : api_base_(std::move(api_base)), api_key_(std::move(api_key)) {
  while (!api_base_.empty() && api_base_.back() == '/') api_base_.pop_back();
}

std::unique_ptr<OpenAiProvider> OpenAiProvider::from_env() {
  const char* base = std::getenv("LOGEVAL_API_BASE");
  const char* key = std::getenv("LOGEVAL_API_KEY");
  if (key == nullptr || *key == '\0') key = std::getenv("OPENAI_API_KEY");
  if (key == nullptr || *key == '\0') {
    throw ConfigError("live provider needs LOGEVAL_API_KEY or OPENAI_API_KEY");
  }
  return std::make_unique<OpenAiProvider>(
      base != nullptr && *base != '\0' ? base : "https://api.openai.com/v1", key);
}

ChatResponse OpenAiProvider::complete(const ChatRequest& req) {
  json body = {
      {"model", req.model},
      {"temperature", req.temperature},
      {"max_tokens", req.max_tokens},
      {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
  };
  http::Request hr;
  hr.method = "POST";
  hr.url = api_base_ + "/chat/completions";
  hr.headers = {{"Authorization", "Bearer " + api_key_}};
  hr.body = body.dump();
  hr.timeout = req.timeout;
  const auto t0 = std::chrono::steady_clock::now();
  const http::Response res = http::send(hr);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  if (res.status == 0) throw ProviderError(0, res.error);
  if (res.status != 200) {
    std::optional<std::chrono::milliseconds> retry_after;
    if (auto h = res.header("Retry-After")) {
      char* end = nullptr;
      const double secs = std::strtod(h->c_str(), &end);
      if (end != h->c_str() && secs >= 0) {
        retry_after = std::chrono::milliseconds(static_cast<long long>(secs * 1000));
      }
    }
    throw ProviderError(res.status, res.body.substr(0, 500), retry_after);
  }
  ChatResponse r;
  try {
    json j = json::parse(res.body);
    r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    r.metadata["provider"] = "openai";
    r.metadata["latency_ms"] = ms;
    if (j.contains("usage")) r.metadata["usage"] = j["usage"];
  } catch (const json::exception& e) {
    throw ProviderError(502, std::string("malformed completion: ") + e.what());
  }
  return r;
}

std::unique_ptr<Provider> make_provider(const std::string& name, const fs::path& replay_dir) {
  if (name == "mock") return std::make_unique<MockProvider>();
  if (name == "replay") {
    if (replay_dir.empty()) throw ConfigError("replay provider needs a replay directory");
    return std::make_unique<ReplayProvider>(replay_dir);
  }
  if (name == "openai") return OpenAiProvider::from_env();
  throw ConfigError("unknown provider '" + name + "'");
}

// -------------------------------------------------------------- generator

Generator::Generator(GenerationConfig cfg, Provider& provider, ResponseCache* cache,
                     SleepFn sleep, std::uint64_t jitter_seed)
    : cfg_(std::move(cfg)),
      provider_(provider),
      cache_(cache),
      sleep_(std::move(sleep)),
      jitter_state_(jitter_seed) {
  cfg_.validate();
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatResponse Generator::call_with_retry(const ChatRequest& req, json& events) {
  for (int attempt = 0;; ++attempt) {
    try {
      {
        std::lock_guard lk(mu_);
        ++calls_;
      }
      return provider_.complete(req);
    } catch (const ProviderError& e) {
      if (!e.retryable() || attempt >= cfg_.max_retries) throw;
      long long base = cfg_.backoff_base.count() << std::min(attempt, 20);
      base = std::min<long long>(base, cfg_.backoff_cap.count());
      std::uint64_t r;
      {
        std::lock_guard lk(mu_);
        // splitmix64 step
        std::uint64_t z = (jitter_state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        r = z ^ (z >> 31);
      }
      long long delay = base / 2 + (base > 1 ? static_cast<long long>(r % (base / 2 + 1)) : 0);
      if (e.retry_after()) delay = std::max<long long>(delay, e.retry_after()->count());
      events.push_back({{"attempt", attempt + 1}, {"status", e.status()}, {"delay_ms", delay}});
      sleep_(std::chrono::milliseconds(delay));
    }
  }
}

GenerationRecord Generator::generate(const StrippedFile& stripped) {
  const std::string prompt = build_prompt(stripped);
  const std::size_t estimate = prompt.size() / cfg_.chars_per_token;
  if (estimate > cfg_.context_window_tokens) {
    throw ContextOverflow(estimate, cfg_.context_window_tokens);
  }
  GenerationRecord rec;
  rec.file_id = stripped.file_id;
  rec.prompt_hash = prompt_hash(cfg_.model_id, prompt);

  std::optional<std::string> cached;
  if (cache_ != nullptr) cached = cache_->get(rec.prompt_hash);
  if (cached) {
    rec.response_text = *cached;
    rec.from_cache = true;
    rec.provider_metadata = {{"cache", "hit"}};
  } else {
    ChatRequest req;
    req.model = cfg_.model_id;
    req.temperature = cfg_.temperature;
    req.max_tokens = cfg_.max_output_tokens;
    req.prompt = prompt;
    req.timeout = cfg_.request_timeout;
    json events = json::array();
    ChatResponse resp = call_with_retry(req, events);
    rec.response_text = std::move(resp.text);
    rec.provider_metadata = std::move(resp.metadata);
    rec.provider_metadata["retries"] = events.size();
    rec.provider_metadata["retry_events"] = events;
    if (cache_ != nullptr) {
      json request = {{"model", req.model},
                      {"temperature", req.temperature},
                      {"max_tokens", req.max_tokens},
                      {"provider", provider_.name()},
                      {"prompt", req.prompt}};
      cache_->put(rec.prompt_hash, request, rec.response_text);
    }
  }
  rec.generated_source = extract_code(rec.response_text);
  try {
    (void)python::parse_module(rec.generated_source, rec.file_id);
  } catch (const ParseError& e) {
    rec.valid = false;
    throw InvalidGeneration(rec, e.what());
  }
  return rec;
}

}  // namespace logeval::generation
