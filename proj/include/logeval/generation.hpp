#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "logeval/errors.hpp"
#include "logeval/source_model.hpp"

namespace logeval::generation {

struct GenerationConfig {
  std::string model_id = "gpt-4o-mini";
  double temperature = 0.0;
  int max_output_tokens = 16384;
  std::string provider_name = "mock";
  std::chrono::milliseconds request_timeout{120000};
  int max_retries = 3;
  // Prompt size guard, estimated as characters / chars_per_token.
  std::size_t context_window_tokens = 128000;
  std::size_t chars_per_token = 4;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::milliseconds backoff_cap{60000};

  // Throws ConfigError.
  void validate() const;
};

class ProviderError : public Error {
 public:
  ProviderError(int status, const std::string& message,
                std::optional<std::chrono::milliseconds> retry_after = std::nullopt)
      : Error("provider error " + std::to_string(status) + ": " + message),
        status_(status),
        retry_after_(retry_after) {}

  // 0 for transport failures.
  int status() const { return status_; }
  std::optional<std::chrono::milliseconds> retry_after() const { return retry_after_; }
  bool retryable() const { return status_ == 0 || status_ == 429 || status_ >= 500; }

 private:
  int status_;
  std::optional<std::chrono::milliseconds> retry_after_;
};

class ContextOverflow : public Error {
 public:
  ContextOverflow(std::size_t estimated, std::size_t window)
      : Error("prompt needs ~" + std::to_string(estimated) + " tokens, window is " +
              std::to_string(window)) {}
};

struct ChatRequest {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 0;
  std::string prompt;
  std::chrono::milliseconds timeout{120000};
};

struct ChatResponse {
  std::string text;
  nlohmann::json metadata = nlohmann::json::object();
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string name() const = 0;
  // Throws ProviderError.
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

// Echoes the file from the prompt with `logging.info("enter NAME")` placed at
// the head of every function body, wrapped in a ```python fence.
class MockProvider : public Provider {
 public:
  std::string name() const override { return "mock"; }
  ChatResponse complete(const ChatRequest& req) override;
};

// Serves responses recorded on disk as <dir>/<prompt_hash>.json
// ({"response_text": ...}) or <dir>/<prompt_hash>.txt.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::string name() const override { return "replay"; }
  ChatResponse complete(const ChatRequest& req) override;

 private:
  std::filesystem::path dir_;
};

// Chat-completions endpoint speaking the OpenAI wire format.
class OpenAiProvider : public Provider {
 public:
  OpenAiProvider(std::string api_base, std::string api_key);
  // Reads LOGEVAL_API_BASE (default https://api.openai.com/v1) and
  // LOGEVAL_API_KEY or OPENAI_API_KEY. Throws ConfigError without a key.
  static std::unique_ptr<OpenAiProvider> from_env();

  std::string name() const override { return "openai"; }
  ChatResponse complete(const ChatRequest& req) override;

 private:
  std::string api_base_;
  std::string api_key_;
};

// Throws ConfigError for unknown names or missing credentials.
std::unique_ptr<Provider> make_provider(const std::string& name,
                                        const std::filesystem::path& replay_dir = {});

std::string build_prompt(const StrippedFile& stripped);
std::string extract_code(std::string_view response_text);

// Hex SHA-256 of model_id, a NUL byte, then the prompt.
std::string prompt_hash(std::string_view model_id, std::string_view prompt);

// One JSON file per prompt hash: {"request": {...}, "response_text": "..."}.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<std::string> get(const std::string& hash) const;
  // Written to a temporary file then renamed, so readers never see partial
  // entries.
  void put(const std::string& hash, const nlohmann::json& request,
           const std::string& response_text);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct GenerationRecord {
  std::string file_id;
  std::string prompt_hash;
  std::string response_text;
  std::string generated_source;
  nlohmann::json provider_metadata = nlohmann::json::object();
  bool from_cache = false;
  bool valid = true;
};

class InvalidGeneration : public Error {
 public:
  InvalidGeneration(GenerationRecord record, const std::string& why)
      : Error("generated code for " + record.file_id + " does not parse: " + why),
        record_(std::move(record)) {}
  const GenerationRecord& record() const { return record_; }

 private:
  GenerationRecord record_;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

class Generator {
 public:
  // `cache` may be null. `sleep` defaults to std::this_thread::sleep_for.
  Generator(GenerationConfig cfg, Provider& provider, ResponseCache* cache,
            SleepFn sleep = {}, std::uint64_t jitter_seed = 0);

  // Throws ContextOverflow, ProviderError (after retries), InvalidGeneration.
  GenerationRecord generate(const StrippedFile& stripped);

  std::size_t provider_calls() const { return calls_; }

 private:
  ChatResponse call_with_retry(const ChatRequest& req, nlohmann::json& events);

  GenerationConfig cfg_;
  Provider& provider_;
  ResponseCache* cache_;
  SleepFn sleep_;
  std::uint64_t jitter_state_;
  std::size_t calls_ = 0;
  std::mutex mu_;
};

// Mock transformation applied to raw source text.
std::string mock_instrument(std::string_view source);

}  // namespace logeval::generation
