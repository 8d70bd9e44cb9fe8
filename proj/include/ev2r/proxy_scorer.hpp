#pragma once

// Proxy-reference scoring: verdict logits for (claim, retrieved evidence)
// from a served NLI classifier, turned into the softmax confidence of the
// reference label. Also hosts the LLM log-probability proxy baseline.

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ev2r/core.hpp"
#include "ev2r/llm_backend.hpp"

namespace ev2r::proxy {

struct LogitVector {
  std::vector<double> values;
  LabelSpaceId space = LabelSpaceId::nli3;

  // LabelSpaceMismatch on wrong length, InvalidArgument on non-finite values.
  void validate() const;
};

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

// e^{z_y} / sum e^{z_y'}. LabelSpaceMismatch when the label is from another
// space.
double softmax_confidence(const LogitVector& logits, VerdictLabel label);

struct ProxyBackendConfig {
  std::string endpoint;  // base URL; /v1/verdict and /v1/verdict/batch are appended
  LabelSpaceId label_space = LabelSpaceId::nli3;
  std::size_t batch_size = 16;
  double timeout_s = 30.0;
  std::string health_path = "/health";
  std::size_t max_evidence_chars = 4000;  // evidence tail cut beyond this; claim never cut
  int max_retries = 3;
  std::size_t max_concurrency = 4;
  std::string token_env;  // usually none for a local sidecar
  std::optional<std::filesystem::path> cache_dir;

  void validate() const;
};

ProxyBackendConfig proxy_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProxyBackendConfig& c);

struct VerdictResult {
  LogitVector logits;
  std::string label;     // backend argmax
  std::string model_id;
  bool truncated = false;
};

// Parses one response object. Declared label order (`labels`) and
// `label_space`, when present, must match the expected space. Probability-
// only responses are log-transformed.
VerdictResult parse_verdict_response(const nlohmann::json& j, LabelSpaceId expected);

class ProxyScorer {
 public:
  explicit ProxyScorer(ProxyBackendConfig config, std::shared_ptr<llm::Transport> transport = nullptr,
                       std::shared_ptr<llm::ResponseCache> cache = nullptr,
                       LabelMapping mapping = LabelMapping());

  const ProxyBackendConfig& config() const { return config_; }
  const LabelMapping& mapping() const { return mapping_; }

  // GET health path; {status, model_id, label_space} on 200.
  nlohmann::json health();

  VerdictResult verdict(const Claim& claim, const EvidenceSet& evidence);
  // Order-preserving; sent in chunks of batch_size.
  std::vector<VerdictResult> verdict_batch(std::span<const EvalInstance> instances);

  // softmax_confidence at the reference label mapped into the backend's
  // space.
  double score_proxy(const EvalInstance& instance);
  double score_from(const VerdictResult& v, const EvalInstance& instance) const;

  std::size_t network_calls() const { return backend_.network_calls(); }
  std::size_t truncated() const { return truncated_; }
  std::string model_id() const;

 private:
  nlohmann::json request_body(const Claim& claim, const EvidenceSet& evidence, bool& cut) const;
  void note(VerdictResult& r, bool cut);

  ProxyBackendConfig config_;
  llm::Backend backend_;
  LabelMapping mapping_;
  std::atomic<std::size_t> truncated_{0};
  mutable std::mutex model_mutex_;
  std::string model_id_;
};

// LLM proxy baseline: exp(log p(reference label)) under a few-shot
// chain-of-thought prompt. When the endpoint has no log-probs the model is
// asked for a confidence instead and `mode` reports "elicited".
struct LlmProxyResult {
  double score = 0.0;
  std::string mode;  // "logprob" | "elicited"
};

class LlmProxyScorer {
 public:
  static constexpr std::string_view kTemplate = "llm_proxy.v1";
  static constexpr std::string_view kElicitTemplate = "elicit_confidence.v1";

  explicit LlmProxyScorer(llm::Backend& judge) : judge_(judge) {}

  PromptRequest prompt(const EvalInstance& instance) const;
  LlmProxyResult score(const EvalInstance& instance);

 private:
  llm::Backend& judge_;
};

}  // namespace ev2r::proxy
