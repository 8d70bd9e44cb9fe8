#include "scorer_set.hpp"

#include <cstdlib>

#include "ev2r/baselines.hpp"
#include "ev2r/error.hpp"
#include "ev2r/ingest.hpp"
#include "ev2r/text.hpp"

namespace ev2r::run {
namespace {

bool no_text(const EvidenceSet& e) { return trim(ingest::qa_serialize(e)).empty(); }

bool uses(const RunConfig& c, bool (*pred)(ScorerId)) {
  for (ScorerId s : c.scorers) {
    if (pred(s)) return true;
  }
  return false;
}

}  // namespace

ScorerSet::ScorerSet(const RunConfig& config, const Injected& injected) : config_(config) {
  std::optional<std::filesystem::path> dir = config.cache_dir;
  if (!dir && config.judge) dir = config.judge->cache_dir;
  cache_ = std::make_shared<llm::ResponseCache>(llm::resolve_cache_dir(dir));

  if (config.judge && uses(config, needs_judge)) {
    judge_ = std::make_unique<llm::Backend>(*config.judge, injected.judge_transport, cache_);
    reference_ = std::make_unique<reference::ReferenceScorer>(*judge_);
    llm_proxy_ = std::make_unique<proxy::LlmProxyScorer>(*judge_);
  }
  if (config.proxy && uses(config, needs_proxy)) {
    proxy_ = std::make_unique<proxy::ProxyScorer>(*config.proxy, injected.proxy_transport, cache_,
                                                  LabelMapping::from_json(config.label_map));
  }
  if (config.similarity && uses(config, needs_similarity)) {
    similarity_ = std::make_unique<llm::Backend>(*config.similarity, injected.similarity_transport, cache_);
  }
}

void ScorerSet::require_auth() const {
  if (judge_) judge_->require_auth();
  if (similarity_) similarity_->require_auth();
  if (proxy_ && !config_.proxy->token_env.empty() && std::getenv(config_.proxy->token_env.c_str()) == nullptr) {
    throw Error(ErrorKind::AuthMissing, "proxy token variable " + config_.proxy->token_env + " is not set");
  }
}

std::size_t ScorerSet::network_calls() const {
  std::size_t n = 0;
  if (judge_) n += judge_->network_calls();
  if (similarity_) n += similarity_->network_calls();
  if (proxy_) n += proxy_->network_calls();
  return n;
}

std::string ScorerSet::judge_model() const { return config_.judge ? config_.judge->model : ""; }
std::string ScorerSet::similarity_model() const {
  return config_.similarity ? config_.similarity->model : "";
}

std::vector<std::string> ScorerSet::templates(ScorerId id) {
  using reference::ReferenceScorer;
  switch (id) {
    case ScorerId::ev2r:
    case ScorerId::ref_based_only:
      return {std::string(ReferenceScorer::kTemplate)};
    case ScorerId::ref_less:
      return {std::string(ReferenceScorer::kClaimTemplate), std::string(ReferenceScorer::kAddressedTemplate)};
    case ScorerId::llm_proxy:
      return {std::string(proxy::LlmProxyScorer::kTemplate),
              std::string(proxy::LlmProxyScorer::kElicitTemplate)};
    default:
      return {};
  }
}

// Empty retrieved evidence leaves nothing to classify; it scores 0 like the
// reference component does.
double ScorerSet::proxy_score(const EvalInstance& instance, nlohmann::json& details) {
  if (no_text(instance.retrieved_evidence)) {
    details["proxy_skipped"] = "no retrieved evidence";
    return 0.0;
  }
  const proxy::VerdictResult v = proxy_->verdict(instance.claim, instance.retrieved_evidence);
  details["proxy_model"] = v.model_id;
  details["evidence_truncated"] = v.truncated;
  return proxy_->score_from(v, instance);
}

ScoreResult ScorerSet::score(ScorerId id, const EvalInstance& instance) {
  ScoreResult r;
  const EvidenceSet& cand = instance.retrieved_evidence;
  const EvidenceSet& ref = instance.reference_evidence;
  switch (id) {
    case ScorerId::ev2r: {
      const reference::ReferenceScore rs = reference_->score_reference_based(instance);
      nlohmann::json details;
      const double p = proxy_score(instance, details);
      const Ev2RScore s = combine_scores(rs.s_prec, rs.s_recall, p, config_.alpha, rs.counts);
      nlohmann::json j = score_to_json(s);
      j.update(details);
      r.score = s.s_final;
      r.details = std::move(j);
      break;
    }
    case ScorerId::ref_based_only: {
      const reference::ReferenceScore rs = reference_->score_reference_based(instance);
      const Ev2RScore s = combine_scores(rs.s_prec, rs.s_recall, 0.0, 1.0, rs.counts);
      r.score = s.s_f1;
      r.details = {{"s_prec", s.s_prec}, {"s_recall", s.s_recall}, {"s_f1", s.s_f1},
                   {"fact_counts", score_to_json(s)["fact_counts"]}};
      break;
    }
    case ScorerId::proxy_only: {
      nlohmann::json details = nlohmann::json::object();
      r.score = proxy_score(instance, details);
      r.details = std::move(details);
      break;
    }
    case ScorerId::ref_less:
      r.score = reference_->score_reference_less(instance.claim, cand);
      break;
    case ScorerId::llm_proxy: {
      const proxy::LlmProxyResult p = llm_proxy_->score(instance);
      r.score = p.score;
      r.details = {{"proxy_mode", p.mode}};
      break;
    }
    case ScorerId::rouge_l:
      r.score = baselines::rouge_l(cand, ref);
      break;
    case ScorerId::bleu:
      r.score = baselines::bleu(cand, ref);
      break;
    case ScorerId::meteor:
      r.score = baselines::meteor(cand, ref);
      break;
    case ScorerId::h_meteor:
      r.score = (cand.empty() || ref.empty()) ? 0.0 : baselines::hungarian_meteor(cand, ref);
      break;
    case ScorerId::external_sim:
      r.score = similarity_->external_similarity(baselines::evidence_text(cand),
                                                 baselines::evidence_text(ref));
      break;
  }
  return r;
}

}  // namespace ev2r::run
