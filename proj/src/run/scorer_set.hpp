#pragma once

#include <memory>

#include <nlohmann/json.hpp>

#include "ev2r/llm_backend.hpp"
#include "ev2r/proxy_scorer.hpp"
#include "ev2r/reference_scorer.hpp"
#include "ev2r/run.hpp"

namespace ev2r::run {

struct ScoreResult {
  double score = 0.0;
  nlohmann::json details;  // null when the scorer has nothing beyond the number
};

// Backends and scorers for one run, shared by all workers. One response
// cache serves every backend.
class ScorerSet {
 public:
  ScorerSet(const RunConfig& config, const Injected& injected);

  // AuthMissing for any selected backend without a usable token.
  void require_auth() const;

  ScoreResult score(ScorerId id, const EvalInstance& instance);

  std::size_t network_calls() const;
  std::string judge_model() const;
  std::string similarity_model() const;

  // Template ids a scorer renders; empty for lexical scorers.
  static std::vector<std::string> templates(ScorerId id);

 private:
  double proxy_score(const EvalInstance& instance, nlohmann::json& details);

  const RunConfig& config_;
  std::shared_ptr<llm::ResponseCache> cache_;
  std::unique_ptr<llm::Backend> judge_;
  std::unique_ptr<llm::Backend> similarity_;
  std::unique_ptr<proxy::ProxyScorer> proxy_;
  std::unique_ptr<reference::ReferenceScorer> reference_;
  std::unique_ptr<proxy::LlmProxyScorer> llm_proxy_;
};

}  // namespace ev2r::run
