#include "ev2r/proxy_scorer.hpp"

#include <algorithm>
#include <cmath>

#include "ev2r/error.hpp"
#include "ev2r/ingest.hpp"
#include "ev2r/log.hpp"
#include "ev2r/text.hpp"

namespace ev2r::proxy {
namespace {

llm::BackendConfig transport_config(const ProxyBackendConfig& c) {
  llm::BackendConfig b;
  b.endpoint = c.endpoint;
  b.model = "nli-sidecar";
  b.token_env = c.token_env;
  b.max_concurrency = c.max_concurrency;
  b.timeout_s = c.timeout_s;
  b.max_retries = c.max_retries;
  b.cache_dir = c.cache_dir;
  return b;
}

std::string trim_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

ProxyBackendConfig normalized(ProxyBackendConfig c) {
  c.endpoint = trim_slash(c.endpoint);
  return c;
}

nlohmann::json parse_body(const std::string& raw) {
  nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::MalformedResponse, "verdict response is not JSON", raw);
  return j;
}

}  // namespace

void LogitVector::validate() const {
  const auto& space_def = label_space(space);
  if (values.size() != space_def.canonical.size()) {
    throw Error(ErrorKind::LabelSpaceMismatch,
                std::to_string(values.size()) + " logits for label space " +
                    std::string(space_def.name) + " of size " +
                    std::to_string(space_def.canonical.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite logit");
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double softmax_confidence(const LogitVector& logits, VerdictLabel label) {
  if (label.space != logits.space) {
    throw Error(ErrorKind::LabelSpaceMismatch,
                "label from " + std::string(label_space(label.space).name) + ", logits over " +
                    std::string(label_space(logits.space).name));
  }
  logits.validate();
  return softmax(logits.values).at(label.index);
}

void ProxyBackendConfig::validate() const {
  if (endpoint.empty()) throw Error(ErrorKind::Config, "proxy endpoint is empty");
  if (batch_size < 1) throw Error(ErrorKind::Config, "proxy batch_size must be >= 1");
  if (!(timeout_s > 0.0)) throw Error(ErrorKind::Config, "proxy timeout must be positive");
  if (max_evidence_chars < 1) throw Error(ErrorKind::Config, "max_evidence_chars must be >= 1");
}

ProxyBackendConfig proxy_config_from_json(const nlohmann::json& j) {
  ProxyBackendConfig c;
  try {
    c.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("label_space")) c.label_space = parse_label_space(j["label_space"].get<std::string>());
    c.batch_size = j.value("batch_size", c.batch_size);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.health_path = j.value("health_path", c.health_path);
    c.max_evidence_chars = j.value("max_evidence_chars", c.max_evidence_chars);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
    c.token_env = j.value("token_env", c.token_env);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("proxy config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ProxyBackendConfig& c) {
  return {{"endpoint", c.endpoint},
          {"label_space", label_space(c.label_space).name},
          {"batch_size", c.batch_size},
          {"timeout_s", c.timeout_s},
          {"health_path", c.health_path},
          {"max_evidence_chars", c.max_evidence_chars}};
}

VerdictResult parse_verdict_response(const nlohmann::json& j, LabelSpaceId expected) {
  if (!j.is_object()) throw Error(ErrorKind::MalformedResponse, "verdict response is not an object", j.dump());
  const LabelSpace& space = label_space(expected);
  if (j.contains("label_space") && j["label_space"].is_string()) {
    const std::string declared = j["label_space"].get<std::string>();
    if (declared != space.name) {
      throw Error(ErrorKind::LabelSpaceMismatch,
                  "backend serves " + declared + ", expected " + std::string(space.name));
    }
  }
  if (j.contains("labels") && j["labels"].is_array()) {
    const auto& labels = j["labels"];
    bool same = labels.size() == space.canonical.size();
    for (std::size_t i = 0; same && i < labels.size(); ++i) {
      try {
        same = labels[i].is_string() && map_label(labels[i].get<std::string>(), expected).index == i;
      } catch (const Error&) {
        same = false;
      }
    }
    if (!same) {
      throw Error(ErrorKind::LabelSpaceMismatch, "backend label order " + labels.dump() +
                                                     " differs from " + std::string(space.name));
    }
  }

  VerdictResult r;
  r.logits.space = expected;
  auto numbers = [&](const char* field) {
    std::vector<double> v;
    for (const auto& x : j[field]) {
      if (!x.is_number()) throw Error(ErrorKind::MalformedResponse, std::string(field) + " must be numbers", j.dump());
      v.push_back(x.get<double>());
    }
    return v;
  };
  if (j.contains("logits") && j["logits"].is_array()) {
    r.logits.values = numbers("logits");
  } else if (j.contains("probabilities") && j["probabilities"].is_array()) {
    for (double p : numbers("probabilities")) r.logits.values.push_back(std::log(std::max(p, 1e-300)));
  } else {
    throw Error(ErrorKind::MalformedResponse, "verdict response has neither logits nor probabilities", j.dump());
  }
  r.logits.validate();
  r.label = j.value("label", std::string());
  r.model_id = j.value("model_id", std::string());
  r.truncated = j.value("truncated", false);
  return r;
}

ProxyScorer::ProxyScorer(ProxyBackendConfig config, std::shared_ptr<llm::Transport> transport,
                         std::shared_ptr<llm::ResponseCache> cache, LabelMapping mapping)
    : config_(normalized(std::move(config))),
      backend_(transport_config(config_), std::move(transport), std::move(cache)),
      mapping_(std::move(mapping)) {
  config_.validate();
}

nlohmann::json ProxyScorer::health() {
  const llm::HttpResponse r = backend_.get(config_.endpoint + config_.health_path);
  if (r.status != 200) {
    throw Error(ErrorKind::Transport, "health check returned HTTP " + std::to_string(r.status), r.body);
  }
  nlohmann::json j = parse_body(r.body);
  if (j.contains("label_space") && j["label_space"].is_string() &&
      j["label_space"].get<std::string>() != label_space(config_.label_space).name) {
    throw Error(ErrorKind::LabelSpaceMismatch,
                "sidecar serves " + j["label_space"].get<std::string>());
  }
  return j;
}

nlohmann::json ProxyScorer::request_body(const Claim& claim, const EvidenceSet& evidence,
                                         bool& cut) const {
  std::string text = ingest::qa_serialize(evidence);
  cut = text.size() > config_.max_evidence_chars;
  if (cut) text = utf8_truncate(text, config_.max_evidence_chars);
  return {{"claim", claim.text},
          {"evidence", text},
          {"label_space", label_space(config_.label_space).name}};
}

void ProxyScorer::note(VerdictResult& r, bool cut) {
  r.truncated = r.truncated || cut;
  if (r.truncated) ++truncated_;
  if (!r.model_id.empty()) {
    std::lock_guard lock(model_mutex_);
    model_id_ = r.model_id;
  }
}

VerdictResult ProxyScorer::verdict(const Claim& claim, const EvidenceSet& evidence) {
  bool cut = false;
  const nlohmann::json body = request_body(claim, evidence, cut);
  const std::string raw = backend_.post_json("verdict", "verdict.v1", body.dump(),
                                             config_.endpoint + "/v1/verdict");
  VerdictResult r = parse_verdict_response(parse_body(raw), config_.label_space);
  note(r, cut);
  return r;
}

std::vector<VerdictResult> ProxyScorer::verdict_batch(std::span<const EvalInstance> instances) {
  std::vector<VerdictResult> out;
  out.reserve(instances.size());
  for (std::size_t begin = 0; begin < instances.size(); begin += config_.batch_size) {
    const std::size_t end = std::min(instances.size(), begin + config_.batch_size);
    nlohmann::json body = nlohmann::json::array();
    std::vector<bool> cut(end - begin, false);
    for (std::size_t i = begin; i < end; ++i) {
      bool c = false;
      body.push_back(request_body(instances[i].claim, instances[i].retrieved_evidence, c));
      cut[i - begin] = c;
    }
    const std::string raw = backend_.post_json("verdict-batch", "verdict.v1", body.dump(),
                                               config_.endpoint + "/v1/verdict/batch");
    const nlohmann::json j = parse_body(raw);
    if (!j.is_array() || j.size() != end - begin) {
      throw Error(ErrorKind::MalformedResponse,
                  "batch response must be a list of " + std::to_string(end - begin), raw);
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      VerdictResult r = parse_verdict_response(j[i], config_.label_space);
      note(r, cut[i]);
      out.push_back(std::move(r));
    }
  }
  return out;
}

double ProxyScorer::score_from(const VerdictResult& v, const EvalInstance& instance) const {
  const VerdictLabel target = mapping_.convert(instance.reference_label, config_.label_space);
  return softmax_confidence(v.logits, target);
}

double ProxyScorer::score_proxy(const EvalInstance& instance) {
  if (trim(ingest::qa_serialize(instance.retrieved_evidence)).empty()) {
    throw Error(ErrorKind::InvalidArgument, "instance " + instance.id() + " has no retrieved evidence");
  }
  return score_from(verdict(instance.claim, instance.retrieved_evidence), instance);
}

std::string ProxyScorer::model_id() const {
  std::lock_guard lock(model_mutex_);
  return model_id_;
}

PromptRequest LlmProxyScorer::prompt(const EvalInstance& instance) const {
  const LabelSpace& space = label_space(instance.reference_label.space);
  std::vector<std::string> names(space.verbalized.begin(), space.verbalized.end());
  return prompts::render(kTemplate, {{"labels", join(names, ", ")},
                                     {"example_supported", names.at(0)},
                                     {"example_refuted", names.at(1)},
                                     {"example_nei", names.at(2)},
                                     {"claim", instance.claim.text},
                                     {"evidence", ingest::qa_serialize(instance.retrieved_evidence)}});
}

LlmProxyResult LlmProxyScorer::score(const EvalInstance& instance) {
  try {
    const double lp = judge_.label_logprob(prompt(instance), instance.reference_label);
    return {std::clamp(std::exp(lp), 0.0, 1.0), "logprob"};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::LogprobsUnavailable) throw;
  }
  const LabelSpace& space = label_space(instance.reference_label.space);
  std::vector<std::string> names(space.verbalized.begin(), space.verbalized.end());
  const auto req = prompts::render(
      kElicitTemplate, {{"label", std::string(label_verbalized(instance.reference_label))},
                        {"labels", join(names, ", ")},
                        {"claim", instance.claim.text},
                        {"evidence", ingest::qa_serialize(instance.retrieved_evidence)}});
  return {llm::parse_confidence(judge_.complete(req)), "elicited"};
}

}  // namespace ev2r::proxy
