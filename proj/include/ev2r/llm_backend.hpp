#pragma once

// HTTP transport for model-backed scoring: chat-completion judges, label
// log-probabilities and external similarity endpoints. Responses go through
// a content-addressed cache; network calls are retried with exponential
// backoff and bounded by a per-backend concurrency limit.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "ev2r/core.hpp"
#include "ev2r/prompts.hpp"

namespace ev2r::llm {

struct BackendConfig {
  std::string endpoint;                  // full URL of the POST target
  std::string model;                     // recorded in cache keys and reports
  std::string token_env = "EV2R_API_KEY";  // empty: no Authorization header
  std::string token;  // secret interpolated from the config; wins over token_env, never written out
  std::size_t max_concurrency = 8;
  double timeout_s = 60.0;
  int max_retries = 5;
  double temperature = 0.0;
  std::optional<std::filesystem::path> cache_dir;  // falls back to EV2R_CACHE_DIR
  double backoff_base_s = 0.5;
  std::uint64_t jitter_seed = 0;
  int top_logprobs = 20;

  // Throws Config on concurrency 0, non-positive timeout, negative retries.
  void validate() const;
};

BackendConfig backend_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BackendConfig& c);  // no secrets

// ---------------------------------------------------------------------------
// Transport

struct HttpResponse {
  int status = 0;
  std::string body;
};

using Headers = std::multimap<std::string, std::string>;

// Throws Timeout when the deadline passes and Transport when no connection
// could be made; HTTP error statuses are returned, not thrown.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const Headers& headers, double timeout_s) = 0;
  virtual HttpResponse get(const std::string& url, const Headers& headers, double timeout_s) = 0;
};

std::shared_ptr<Transport> make_http_transport();

// ---------------------------------------------------------------------------
// Cache

struct CacheEntry {
  std::string key;  // hex SHA-256
  std::string model;
  std::string schema;
  std::string kind;
  std::string prompt;
  std::string response;
  std::string timestamp;
};

std::string sha256_hex(std::string_view data);

// Memory-backed, optionally persisted under a directory as one JSON file per
// entry. A hit requires the stored model and prompt to match byte for byte.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  static std::string key(std::string_view model, std::string_view schema, std::string_view kind,
                         std::string_view prompt);

  std::optional<std::string> get(std::string_view model, std::string_view schema,
                                 std::string_view kind, std::string_view prompt);
  void put(std::string_view model, std::string_view schema, std::string_view kind,
           std::string_view prompt, std::string_view response);

  const std::optional<std::filesystem::path>& dir() const { return dir_; }
  std::size_t hits() const { return hits_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::optional<std::filesystem::path> dir_;
  std::mutex mutex_;
  std::unordered_map<std::string, CacheEntry> memory_;
  std::atomic<std::size_t> hits_{0};
};

// Resolves the cache directory: explicit value, else EV2R_CACHE_DIR, else none.
std::optional<std::filesystem::path> resolve_cache_dir(
    const std::optional<std::filesystem::path>& configured);

// ---------------------------------------------------------------------------
// Backend

// Delay before retry `attempt` (0-based): base * 2^attempt + jitter, jitter
// drawn from [0, base).
double backoff_delay(double base_s, int attempt, double jitter_unit);

class Backend {
 public:
  explicit Backend(BackendConfig config, std::shared_ptr<Transport> transport = nullptr,
                   std::shared_ptr<ResponseCache> cache = nullptr);

  const BackendConfig& config() const { return config_; }

  // Chat completion text. Deterministic on cache hit. When `accept` throws
  // for the text, the response is not cached, so a later call asks again.
  std::string complete(const PromptRequest& request,
                       const std::function<void(const std::string& text)>& accept = {});

  // Log-probability of the label's verbalization at the answer position
  // (the first token after the last "Label:" in the output). Throws
  // LogprobsUnavailable when the endpoint returns no token log-probs.
  double label_logprob(const PromptRequest& request, VerdictLabel label);

  // POST {candidate, reference} -> {score}; result clamped to [0,1].
  double external_similarity(std::string_view candidate, std::string_view reference);

  // Raw JSON POST through the retry/concurrency/caching channel. `kind`
  // separates cache namespaces; `url` defaults to the configured endpoint.
  std::string post_json(std::string_view kind, std::string_view schema, const std::string& body,
                        const std::string& url = {});

  // Uncached GET, one attempt.
  HttpResponse get(const std::string& url);

  std::size_t network_calls() const { return network_calls_; }
  std::size_t retries() const { return retries_; }

  // Test hooks.
  void set_sleeper(std::function<void(double seconds)> sleeper) { sleeper_ = std::move(sleeper); }
  void set_inflight_probe(std::function<void(std::size_t inflight)> probe) {
    probe_ = std::move(probe);
  }

  // Throws AuthMissing if the configured token variable is unset.
  void require_auth() const;
  // Bearer token, empty when the backend needs none.
  std::string token() const;

 private:
  std::string request_with_retries(const std::string& url, const std::string& body);
  std::string cached_post(std::string_view kind, std::string_view schema, std::string_view prompt,
                          const std::string& body, const std::string& url);

  BackendConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<ResponseCache> cache_;
  std::counting_semaphore<1024> slots_;
  std::atomic<std::size_t> inflight_{0};
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> retries_{0};
  std::atomic<std::uint64_t> jitter_counter_{0};
  std::function<void(double)> sleeper_;
  std::function<void(std::size_t)> probe_;
};

// ---------------------------------------------------------------------------
// Response helpers (exposed for tests)

// choices[0].message.content of an OpenAI-style response.
std::string completion_text(const std::string& raw);

// Log-sum-exp over the alternatives at the answer position that are
// prefixes of this label's verbalization and of no other label's. Returns
// kLabelLogprobFloor when the label does not appear.
constexpr double kLabelLogprobFloor = -20.0;
double label_logprob_from_response(const nlohmann::json& response, VerdictLabel label);

// First number in [0,1] after "Confidence:" (or anywhere, failing that).
double parse_confidence(std::string_view text);

}  // namespace ev2r::llm
