#pragma once

// Deterministic stand-ins for the model backends. The judge answers each
// prompt template by rule: facts are the answer sentences of the evidence,
// and a fact is supported when the other text contains it. The same
// handler serves an in-process Transport and the HTTP stub server.

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ev2r/core.hpp"
#include "ev2r/llm_backend.hpp"

namespace ev2r::testing {

enum class Containment {
  exact,       // fact is a substring of the other text
  normalized,  // token sequence match after expanding contractions and numbers
};

// Answer sentences of a qa_serialize'd evidence text, in order.
std::vector<std::string> evidence_facts(std::string_view serialized);

// Lowercased tokens with contractions expanded and number words as numerals.
std::vector<std::string> normalized_tokens(std::string_view text);

bool contains_fact(std::string_view fact, std::string_view against, Containment mode);

// Text between <tag>\n and \n</tag> in a rendered prompt.
std::string between_tags(std::string_view prompt, std::string_view tag);

struct MockOptions {
  Containment containment = Containment::exact;
  bool logprobs = true;               // llm_proxy answers carry token log-probs
  std::string nli_model_id = "mock-nli-1";
  std::size_t nli_max_chars = 4000;   // sidecar-side truncation threshold
  // Verdict logits for (claim, evidence) in nli-3 order; default: overlap rule.
  std::function<std::vector<double>(const std::string&, const std::string&)> logits;
  // Replaces the judge's reply for a prompt when it returns a value.
  std::function<std::optional<std::string>(const std::string& prompt)> judge_override;
};

struct MockResponse {
  int status = 200;
  std::string body;
};

class MockBackends {
 public:
  explicit MockBackends(MockOptions options = {});

  // Routes:
  //   POST /v1/chat/completions   judge
  //   POST /v1/similarity         {candidate, reference} -> {score}
  //   POST /v1/verdict            NLI verdict
  //   POST /v1/verdict/batch
  //   GET  /health
  MockResponse handle(std::string_view method, std::string_view path, const std::string& body);

  // Judge content for a rendered prompt.
  std::string judge_reply(const std::string& prompt) const;

  // The next `count` requests on `path` answer with `status` and an error body.
  void fail_next(std::string_view path, int status, std::size_t count);

  std::size_t calls(std::string_view path) const;
  std::size_t total_calls() const { return total_; }
  void reset_counts();

  MockOptions& options() { return options_; }

 private:
  MockResponse chat(const std::string& body);
  MockResponse verdict_one(const nlohmann::json& request) const;
  nlohmann::json verdict_json(const std::string& claim, const std::string& evidence) const;

  MockOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::size_t, std::less<>> calls_;
  std::map<std::string, std::pair<int, std::size_t>, std::less<>> failures_;
  std::atomic<std::size_t> total_{0};
};

// Path part of an http(s) URL ("/v1/verdict").
std::string url_path(const std::string& url);

class MockTransport : public llm::Transport {
 public:
  explicit MockTransport(std::shared_ptr<MockBackends> backends) : backends_(std::move(backends)) {}

  llm::HttpResponse post(const std::string& url, const std::string& body, const llm::Headers& headers,
                         double timeout_s) override;
  llm::HttpResponse get(const std::string& url, const llm::Headers& headers, double timeout_s) override;

  const llm::Headers& last_headers() const { return last_headers_; }

 private:
  std::shared_ptr<MockBackends> backends_;
  std::mutex mutex_;
  llm::Headers last_headers_;
};

}  // namespace ev2r::testing
