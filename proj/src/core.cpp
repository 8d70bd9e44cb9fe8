#include "ev2r/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ev2r/error.hpp"
#include "ev2r/text.hpp"

namespace ev2r {
namespace {

const LabelSpace kAveritec4{
    LabelSpaceId::averitec4,
    "averitec-4",
    {"supported", "refuted", "not-enough-evidence", "conflicting-evidence/cherrypicking"},
    {"Supported", "Refuted", "Not Enough Evidence", "Conflicting Evidence/Cherrypicking"},
};

const LabelSpace kNli3{
    LabelSpaceId::nli3,
    "nli-3",
    {"supports", "refutes", "not-enough-info"},
    {"Supports", "Refutes", "Not Enough Info"},
};

struct Alias {
  std::string_view raw;
  std::uint8_t index;
};

constexpr Alias kAveritecAliases[] = {
    {"supported", 0},
    {"refuted", 1},
    {"not-enough-evidence", 2},
    {"nee", 2},
    {"conflicting-evidence/cherrypicking", 3},
    {"conflicting-evidence-/-cherrypicking", 3},
    {"conflicting-evidence", 3},
    {"conflicting", 3},
    {"cherrypicking", 3},
};

constexpr Alias kNliAliases[] = {
    {"supports", 0},        {"support", 0},  {"entailment", 0},
    {"refutes", 1},         {"refute", 1},   {"contradiction", 1},
    {"not-enough-info", 2}, {"nei", 2},      {"neutral", 2},
};

std::string normalize_label(std::string_view raw) {
  std::string out;
  for (char c : trim(raw)) {
    char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lc == ' ' || lc == '_') lc = '-';
    if (lc == '-' && !out.empty() && out.back() == '-') continue;
    out.push_back(lc);
  }
  return out;
}

void require_fraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + " must lie in [0,1], got " + std::to_string(v));
  }
}

}  // namespace

const LabelSpace& label_space(LabelSpaceId id) {
  return id == LabelSpaceId::averitec4 ? kAveritec4 : kNli3;
}

LabelSpaceId parse_label_space(std::string_view name) {
  const std::string n = normalize_label(name);
  if (n == "averitec-4" || n == "averitec4" || n == "averitec") return LabelSpaceId::averitec4;
  if (n == "nli-3" || n == "nli3" || n == "nli") return LabelSpaceId::nli3;
  throw Error(ErrorKind::Config, "unregistered label space '" + std::string(name) + "'");
}

std::string_view label_name(VerdictLabel label) {
  return label_space(label.space).canonical.at(label.index);
}

std::string_view label_verbalized(VerdictLabel label) {
  return label_space(label.space).verbalized.at(label.index);
}

VerdictLabel map_label(std::string_view raw, LabelSpaceId space) {
  const std::string n = normalize_label(raw);
  auto lookup = [&](const auto& aliases) -> std::optional<VerdictLabel> {
    for (const Alias& a : aliases) {
      if (a.raw == n) return VerdictLabel{space, a.index};
    }
    return std::nullopt;
  };
  auto found = space == LabelSpaceId::averitec4 ? lookup(kAveritecAliases) : lookup(kNliAliases);
  if (!found) {
    throw Error(ErrorKind::UnknownLabel, "'" + std::string(raw) + "' is not a label of " +
                                             std::string(label_space(space).name));
  }
  return *found;
}

LabelMapping::LabelMapping() {
  using L = LabelSpaceId;
  const std::uint8_t to_nli[] = {0, 1, 2, 2};
  for (std::uint8_t i = 0; i < 4; ++i) {
    table_[key({L::averitec4, i}, L::nli3)] = {L::nli3, to_nli[i]};
  }
  const std::uint8_t to_averitec[] = {0, 1, 2};
  for (std::uint8_t i = 0; i < 3; ++i) {
    table_[key({L::nli3, i}, L::averitec4)] = {L::averitec4, to_averitec[i]};
  }
}

VerdictLabel LabelMapping::convert(VerdictLabel label, LabelSpaceId target) const {
  if (label.space == target) return label;
  auto it = table_.find(key(label, target));
  if (it == table_.end()) {
    throw Error(ErrorKind::LabelSpaceMismatch, "no mapping for " + std::string(label_name(label)));
  }
  return it->second;
}

void LabelMapping::set_override(VerdictLabel from, VerdictLabel to) {
  table_[key(from, to.space)] = to;
  overridden_ = true;
}

std::string LabelMapping::version() const {
  return overridden_ ? std::string(kDefaultVersion) + "+overrides" : std::string(kDefaultVersion);
}

LabelMapping LabelMapping::from_json(const nlohmann::json& overrides) {
  LabelMapping mapping;
  if (overrides.is_null()) return mapping;
  for (const auto& [direction, entries] : overrides.items()) {
    const auto arrow = direction.find("->");
    if (arrow == std::string::npos) {
      throw Error(ErrorKind::Config, "label_map key must look like 'a->b': " + direction);
    }
    const LabelSpaceId from = parse_label_space(direction.substr(0, arrow));
    const LabelSpaceId to = parse_label_space(direction.substr(arrow + 2));
    for (const auto& [raw_from, raw_to] : entries.items()) {
      mapping.set_override(map_label(raw_from, from), map_label(raw_to.get<std::string>(), to));
    }
  }
  return mapping;
}

void validate(const Claim& claim) {
  if (trim(claim.text).empty()) {
    throw Error(ErrorKind::InvalidArgument, "claim '" + claim.id + "' has empty text");
  }
}

void validate(const EvidenceSet& evidence) {
  for (const QAPair& qa : evidence.items) {
    if (trim(qa.answer).empty()) {
      throw Error(ErrorKind::InvalidArgument, "evidence item with empty answer");
    }
  }
}

void validate(const EvalInstance& instance) {
  validate(instance.claim);
  validate(instance.reference_evidence);
  validate(instance.retrieved_evidence);
  if (instance.reference_evidence.provenance != Provenance::reference ||
      instance.retrieved_evidence.provenance != Provenance::retrieved) {
    throw Error(ErrorKind::InvalidArgument, "evidence provenance does not match its role");
  }
}

double f1_from_prec_recall(double prec, double recall) {
  require_fraction(prec, "precision");
  require_fraction(recall, "recall");
  const double sum = prec + recall;
  if (sum == 0.0) return 0.0;
  return 2.0 * prec * recall / sum;
}

double weighted_score(double f1, double proxy, double alpha) {
  require_fraction(f1, "f1");
  require_fraction(proxy, "proxy");
  require_fraction(alpha, "alpha");
  const double s = alpha * f1 + (1.0 - alpha) * proxy;
  // Convex combination; rounding may push it a hair outside [min, max].
  return std::clamp(s, std::min(f1, proxy), std::max(f1, proxy));
}

Ev2RScore combine_scores(double prec, double recall, double proxy, double alpha,
                         const FactCounts& counts) {
  Ev2RScore s;
  s.s_prec = prec;
  s.s_recall = recall;
  s.s_f1 = f1_from_prec_recall(prec, recall);
  s.s_proxy = proxy;
  s.alpha = alpha;
  s.s_final = weighted_score(s.s_f1, proxy, alpha);
  s.fact_counts = counts;
  return s;
}

void to_json(nlohmann::json& j, const QAPair& qa) {
  j = nlohmann::json{{"question", qa.question}, {"answer", qa.answer}};
  if (qa.source_url) j["source_url"] = *qa.source_url;
}

void from_json(const nlohmann::json& j, QAPair& qa) {
  if (j.is_string()) {
    qa = QAPair{"", j.get<std::string>(), std::nullopt};
    return;
  }
  qa.question = j.value("question", std::string{});
  qa.answer = j.at("answer").get<std::string>();
  if (j.contains("source_url") && j["source_url"].is_string()) {
    qa.source_url = j["source_url"].get<std::string>();
  } else if (j.contains("url") && j["url"].is_string()) {
    qa.source_url = j["url"].get<std::string>();
  } else {
    qa.source_url.reset();
  }
}

nlohmann::json evidence_to_json(const EvidenceSet& evidence) {
  nlohmann::json arr = nlohmann::json::array();
  for (const QAPair& qa : evidence.items) arr.push_back(qa);
  return arr;
}

EvidenceSet evidence_from_json(const nlohmann::json& j, Provenance provenance) {
  EvidenceSet e;
  e.provenance = provenance;
  if (j.is_null()) return e;
  for (const auto& item : j) e.items.push_back(item.get<QAPair>());
  return e;
}

nlohmann::json instance_to_json(const EvalInstance& in) {
  nlohmann::json j{
      {"id", in.claim.id},
      {"claim", in.claim.text},
      {"label", label_name(in.reference_label)},
      {"label_space", label_space(in.reference_label.space).name},
      {"reference_evidence", evidence_to_json(in.reference_evidence)},
      {"retrieved_evidence", evidence_to_json(in.retrieved_evidence)},
  };
  if (in.claim.speaker) j["speaker"] = *in.claim.speaker;
  if (in.claim.date) j["date"] = *in.claim.date;
  if (in.predicted_label) j["predicted_label"] = label_name(*in.predicted_label);
  return j;
}

EvalInstance instance_from_json(const nlohmann::json& j, LabelSpaceId space) {
  EvalInstance in;
  in.claim.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
  in.claim.text = j.at("claim").get<std::string>();
  if (j.contains("speaker") && j["speaker"].is_string()) in.claim.speaker = j["speaker"];
  if (j.contains("date") && j["date"].is_string()) in.claim.date = j["date"];
  if (j.contains("label_space")) space = parse_label_space(j["label_space"].get<std::string>());
  in.reference_label = map_label(j.at("label").get<std::string>(), space);
  in.reference_evidence =
      evidence_from_json(j.value("reference_evidence", nlohmann::json()), Provenance::reference);
  in.retrieved_evidence =
      evidence_from_json(j.value("retrieved_evidence", nlohmann::json()), Provenance::retrieved);
  if (j.contains("predicted_label") && j["predicted_label"].is_string()) {
    in.predicted_label = map_label(j["predicted_label"].get<std::string>(), space);
  }
  return in;
}

nlohmann::json score_to_json(const Ev2RScore& s) {
  return nlohmann::json{
      {"s_prec", s.s_prec},
      {"s_recall", s.s_recall},
      {"s_f1", s.s_f1},
      {"s_proxy", s.s_proxy},
      {"alpha", s.alpha},
      {"s_final", s.s_final},
      {"fact_counts",
       {{"n_retrieved_facts", s.fact_counts.retrieved_facts},
        {"n_retrieved_supported", s.fact_counts.retrieved_supported},
        {"n_reference_facts", s.fact_counts.reference_facts},
        {"n_reference_supported", s.fact_counts.reference_supported}}},
  };
}

}  // namespace ev2r
