#include "ev2r/llm_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "ev2r/error.hpp"
#include "ev2r/log.hpp"
#include "ev2r/rng.hpp"
#include "ev2r/text.hpp"

namespace ev2r::llm {
namespace {

std::string lower_trimmed_token(std::string_view tok) {
  std::string t = to_lower(trim(tok));
  while (!t.empty() && std::ispunct(static_cast<unsigned char>(t.back()))) t.pop_back();
  return t;
}

// Holds one concurrency slot and keeps the in-flight count for the probe.
class SlotGuard {
 public:
  SlotGuard(std::counting_semaphore<1024>& slots, std::atomic<std::size_t>& inflight,
            const std::function<void(std::size_t)>& probe)
      : slots_(slots), inflight_(inflight) {
    slots_.acquire();
    const std::size_t now = ++inflight_;
    if (probe) probe(now);
  }
  ~SlotGuard() {
    --inflight_;
    slots_.release();
  }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& slots_;
  std::atomic<std::size_t>& inflight_;
};

void default_sleep(double seconds) {
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

std::string error_excerpt(const std::string& body) {
  return utf8_truncate(body, 200);
}

}  // namespace

void BackendConfig::validate() const {
  if (endpoint.empty()) throw Error(ErrorKind::Config, "backend endpoint is empty");
  if (max_concurrency < 1 || max_concurrency > 1024) {
    throw Error(ErrorKind::Config, "max_concurrency must be in [1, 1024]");
  }
  if (!(timeout_s > 0.0)) throw Error(ErrorKind::Config, "timeout must be positive");
  if (max_retries < 0) throw Error(ErrorKind::Config, "max_retries must be >= 0");
  if (backoff_base_s < 0.0) throw Error(ErrorKind::Config, "backoff base must be >= 0");
}

BackendConfig backend_config_from_json(const nlohmann::json& j) {
  BackendConfig c;
  try {
    c.endpoint = j.at("endpoint").get<std::string>();
    c.model = j.value("model", std::string());
    c.token_env = j.value("token_env", c.token_env);
    c.token = j.value("token", std::string());
    c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.temperature = j.value("temperature", c.temperature);
    c.backoff_base_s = j.value("backoff_base_s", c.backoff_base_s);
    c.jitter_seed = j.value("jitter_seed", c.jitter_seed);
    c.top_logprobs = j.value("top_logprobs", c.top_logprobs);
    if (j.contains("cache_dir") && j["cache_dir"].is_string()) {
      c.cache_dir = j["cache_dir"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("backend config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const BackendConfig& c) {
  return {{"endpoint", c.endpoint},
          {"model", c.model},
          {"token_env", c.token_env},
          {"max_concurrency", c.max_concurrency},
          {"timeout_s", c.timeout_s},
          {"max_retries", c.max_retries},
          {"temperature", c.temperature}};
}

double backoff_delay(double base_s, int attempt, double jitter_unit) {
  return base_s * std::ldexp(1.0, attempt) + jitter_unit * base_s;
}

Backend::Backend(BackendConfig config, std::shared_ptr<Transport> transport,
                 std::shared_ptr<ResponseCache> cache)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : make_http_transport()),
      cache_(cache ? std::move(cache)
                   : std::make_shared<ResponseCache>(resolve_cache_dir(config_.cache_dir))),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_concurrency, 1, 1024))),
      sleeper_(default_sleep) {
  config_.validate();
}

void Backend::require_auth() const {
  if (!config_.token.empty() || config_.token_env.empty()) return;
  const char* token = std::getenv(config_.token_env.c_str());
  if (token == nullptr || *token == '\0') {
    throw Error(ErrorKind::AuthMissing,
                "environment variable " + config_.token_env + " is not set for " + config_.endpoint);
  }
}

std::string Backend::token() const {
  if (!config_.token.empty()) return config_.token;
  if (config_.token_env.empty()) return {};
  const char* env = std::getenv(config_.token_env.c_str());
  return env ? env : "";
}

std::string Backend::request_with_retries(const std::string& url, const std::string& body) {
  require_auth();
  Headers headers{{"Content-Type", "application/json"}};
  if (const std::string t = token(); !t.empty()) headers.emplace("Authorization", "Bearer " + t);

  for (int attempt = 0;; ++attempt) {
    std::optional<Error> failure;
    HttpResponse r;
    try {
      SlotGuard slot(slots_, inflight_, probe_);
      ++network_calls_;
      r = transport_->post(url, body, headers, config_.timeout_s);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Timeout && e.kind() != ErrorKind::Transport) throw;
      failure = e;
    }
    if (!failure) {
      const std::string status = "HTTP " + std::to_string(r.status) + " from " + url;
      if (r.status >= 200 && r.status < 300) return std::move(r.body);
      if (r.status == 429) {
        failure.emplace(ErrorKind::RateLimited, status, r.body);
      } else if (r.status >= 500) {
        failure.emplace(ErrorKind::Transport, status, r.body);
      } else if (r.status == 401 || r.status == 403) {
        throw Error(ErrorKind::AuthMissing, status + " (token rejected)", r.body);
      } else {
        throw Error(ErrorKind::MalformedResponse, status + ": " + error_excerpt(r.body), r.body);
      }
    }
    if (attempt >= config_.max_retries) throw *failure;
    ++retries_;
    SeededRng rng(splitmix64(config_.jitter_seed ^ ++jitter_counter_));
    const double delay = backoff_delay(config_.backoff_base_s, attempt, rng.uniform());
    log::debug("retrying " + url + " in " + std::to_string(delay) +
               "s after: " + failure->what());
    sleeper_(delay);
  }
}

std::string Backend::cached_post(std::string_view kind, std::string_view schema,
                                 std::string_view prompt, const std::string& body,
                                 const std::string& url) {
  if (auto hit = cache_->get(config_.model, schema, kind, prompt)) return *hit;
  std::string raw = request_with_retries(url, body);
  cache_->put(config_.model, schema, kind, prompt, raw);
  return raw;
}

std::string Backend::post_json(std::string_view kind, std::string_view schema,
                               const std::string& body, const std::string& url) {
  const std::string& target = url.empty() ? config_.endpoint : url;
  // The target is part of what was asked, so it is part of the cache key.
  return cached_post(kind, schema, target + "\n" + body, body, target);
}

HttpResponse Backend::get(const std::string& url) {
  Headers headers;
  if (const std::string t = token(); !t.empty()) headers.emplace("Authorization", "Bearer " + t);
  return transport_->get(url, headers, config_.timeout_s);
}

std::string Backend::complete(const PromptRequest& request,
                              const std::function<void(const std::string& text)>& accept) {
  if (trim(request.text).empty()) throw Error(ErrorKind::InvalidArgument, "empty prompt");
  const nlohmann::json body{
      {"model", config_.model},
      {"messages", {{{"role", "user"}, {"content", request.text}}}},
      {"temperature", config_.temperature},
  };
  // Validate before the response can reach the cache.
  if (auto hit = cache_->get(config_.model, request.schema_id, "chat", request.text)) {
    std::string text = completion_text(*hit);
    if (accept) accept(text);
    return text;
  }
  std::string raw = request_with_retries(config_.endpoint, body.dump());
  std::string text = completion_text(raw);
  if (accept) accept(text);
  cache_->put(config_.model, request.schema_id, "chat", request.text, raw);
  return text;
}

double Backend::label_logprob(const PromptRequest& request, VerdictLabel label) {
  const nlohmann::json body{
      {"model", config_.model},
      {"messages", {{{"role", "user"}, {"content", request.text}}}},
      {"temperature", config_.temperature},
      {"logprobs", true},
      {"top_logprobs", config_.top_logprobs},
  };
  const std::string raw = cached_post("chat+logprobs", request.schema_id, request.text, body.dump(), config_.endpoint);
  nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::MalformedResponse, "response is not JSON", raw);
  return label_logprob_from_response(j, label);
}

double Backend::external_similarity(std::string_view candidate, std::string_view reference) {
  const nlohmann::json body{{"candidate", candidate}, {"reference", reference}};
  const std::string raw = post_json("similarity", "similarity.v1", body.dump());
  const nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("score") || !j["score"].is_number()) {
    throw Error(ErrorKind::MalformedResponse, "similarity response lacks a numeric score", raw);
  }
  const double s = j["score"].get<double>();
  if (!std::isfinite(s)) throw Error(ErrorKind::MalformedResponse, "non-finite similarity", raw);
  return std::clamp(s, 0.0, 1.0);
}

std::string completion_text(const std::string& raw) {
  const nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
  try {
    if (!j.is_discarded()) {
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (content.is_string()) return content.get<std::string>();
    }
  } catch (const nlohmann::json::exception&) {
  }
  throw Error(ErrorKind::MalformedResponse, "no choices[0].message.content in response", raw);
}

double label_logprob_from_response(const nlohmann::json& response, VerdictLabel label) {
  const nlohmann::json* content = nullptr;
  try {
    const auto& lp = response.at("choices").at(0).at("logprobs");
    if (lp.is_object() && lp.contains("content") && lp["content"].is_array()) content = &lp["content"];
  } catch (const nlohmann::json::exception&) {
  }
  if (content == nullptr || content->empty()) {
    throw Error(ErrorKind::LogprobsUnavailable, "endpoint returned no token log-probabilities",
                response.dump());
  }

  std::string text;
  std::vector<std::size_t> starts;
  for (const auto& entry : *content) {
    starts.push_back(text.size());
    text += entry.value("token", std::string());
  }
  const std::string lowered = to_lower(text);
  const std::size_t marker = lowered.rfind("label:");
  if (marker == std::string::npos) {
    throw Error(ErrorKind::MalformedResponse, "no 'Label:' line in the output", text);
  }
  const std::size_t after = marker + 6;
  std::size_t pos = content->size();
  for (std::size_t i = 0; i < content->size(); ++i) {
    if (starts[i] >= after && !trim((*content)[i].value("token", std::string())).empty()) {
      pos = i;
      break;
    }
  }
  if (pos == content->size()) {
    throw Error(ErrorKind::MalformedResponse, "nothing follows 'Label:' in the output", text);
  }

  // Alternatives at the answer position, the sampled token included.
  std::map<std::string, double> alternatives;
  const auto& at = (*content)[pos];
  alternatives[at.value("token", std::string())] = at.value("logprob", kLabelLogprobFloor);
  if (at.contains("top_logprobs") && at["top_logprobs"].is_array()) {
    for (const auto& alt : at["top_logprobs"]) {
      if (alt.contains("token") && alt.contains("logprob") && alt["logprob"].is_number()) {
        alternatives[alt["token"].get<std::string>()] = alt["logprob"].get<double>();
      }
    }
  }

  const LabelSpace& space = label_space(label.space);
  std::vector<std::string> verbal;
  for (auto v : space.verbalized) verbal.push_back(to_lower(v));

  std::vector<double> matched;
  for (const auto& [token, lp] : alternatives) {
    const std::string t = lower_trimmed_token(token);
    if (t.empty() || !std::isfinite(lp)) continue;
    std::size_t hits = 0;
    bool ours = false;
    for (std::size_t i = 0; i < verbal.size(); ++i) {
      if (verbal[i].rfind(t, 0) == 0) {
        ++hits;
        if (i == label.index) ours = true;
      }
    }
    if (ours && hits == 1) matched.push_back(lp);
  }
  if (matched.empty()) return kLabelLogprobFloor;
  const double m = *std::max_element(matched.begin(), matched.end());
  double sum = 0.0;
  for (double lp : matched) sum += std::exp(lp - m);
  return std::min(0.0, std::max(kLabelLogprobFloor, m + std::log(sum)));
}

double parse_confidence(std::string_view text) {
  const std::string lowered = to_lower(text);
  auto number_at = [&](std::size_t from) -> std::optional<double> {
    for (std::size_t i = from; i < lowered.size(); ++i) {
      const char c = lowered[i];
      if (!(std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < lowered.size() &&
                                                            std::isdigit(static_cast<unsigned char>(lowered[i + 1]))))) {
        continue;
      }
      char* end = nullptr;
      double v = std::strtod(lowered.c_str() + i, &end);
      const std::size_t stop = static_cast<std::size_t>(end - lowered.c_str());
      if (stop < lowered.size() && lowered[stop] == '%') v /= 100.0;
      if (v >= 0.0 && v <= 1.0) return v;
      i = stop;
    }
    return std::nullopt;
  };
  const std::size_t marker = lowered.rfind("confidence:");
  if (marker != std::string::npos) {
    if (auto v = number_at(marker + 11)) return *v;
  }
  if (auto v = number_at(0)) return *v;
  throw Error(ErrorKind::MalformedResponse, "no confidence value in [0,1] in the output",
              std::string(text));
}

}  // namespace ev2r::llm
