#include "ev2r/reference_scorer.hpp"

#include <algorithm>

#include "ev2r/error.hpp"
#include "ev2r/ingest.hpp"
#include "ev2r/log.hpp"
#include "ev2r/text.hpp"

namespace ev2r::reference {
namespace {

[[noreturn]] void malformed(const std::string& why, std::string_view raw) {
  throw Error(ErrorKind::MalformedResponse, why, std::string(raw));
}

// End of the balanced object starting at s[open], or npos.
std::size_t object_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

nlohmann::json extract_object(std::string_view raw) {
  for (std::size_t open = raw.find('{'); open != std::string_view::npos;
       open = raw.find('{', open + 1)) {
    const std::size_t end = object_end(raw, open);
    if (end == std::string_view::npos) break;
    nlohmann::json j = nlohmann::json::parse(raw.substr(open, end - open + 1), nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
  }
  malformed("no JSON object in judge output", raw);
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* field, std::string_view raw) {
  if (!j.contains(field) || !j[field].is_array()) malformed(std::string("missing list '") + field + "'", raw);
  std::vector<std::string> out;
  for (const auto& v : j[field]) {
    if (!v.is_string() || trim(v.get<std::string>()).empty()) {
      malformed(std::string("'") + field + "' must hold non-empty strings", raw);
    }
    out.emplace_back(trim(v.get<std::string>()));
  }
  return out;
}

std::vector<bool> bool_list(const nlohmann::json& j, const char* field, std::string_view raw) {
  if (!j.contains(field) || !j[field].is_array()) malformed(std::string("missing list '") + field + "'", raw);
  std::vector<bool> out;
  for (const auto& v : j[field]) {
    if (!v.is_boolean()) malformed(std::string("'") + field + "' must hold booleans", raw);
    out.push_back(v.get<bool>());
  }
  return out;
}

std::size_t count_field(const nlohmann::json& counts, const std::string& field, std::string_view raw) {
  if (!counts.contains(field) || !counts[field].is_number_integer() || counts[field].get<long long>() < 0) {
    malformed("counts." + field + " missing or not a count", raw);
  }
  return counts[field].get<std::size_t>();
}

void parse_side(const nlohmann::json& j, const std::string& side, std::vector<std::string>& facts,
                std::vector<bool>& supported, std::string_view raw) {
  const std::string f = "facts_" + side;
  const std::string s = "supported_" + side;
  facts = string_list(j, f.c_str(), raw);
  supported = bool_list(j, s.c_str(), raw);
  if (supported.size() != facts.size()) malformed(s + " has a different length than " + f, raw);
  if (!j.contains("counts") || !j["counts"].is_object()) malformed("missing counts object", raw);
  const auto& counts = j["counts"];
  if (count_field(counts, f, raw) != facts.size()) malformed("counts." + f + " disagrees with the list", raw);
  const auto trues = static_cast<std::size_t>(std::count(supported.begin(), supported.end(), true));
  if (count_field(counts, s, raw) != trues) malformed("counts." + s + " disagrees with the list", raw);
}

std::string facts_json(std::span<const AtomicFact> facts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : facts) arr.push_back(f.text);
  return arr.dump();
}

std::vector<AtomicFact> make_facts(const std::vector<std::string>& texts, FactOrigin origin) {
  std::vector<AtomicFact> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({texts[i], origin, i});
  return out;
}

std::vector<FactAlignment> align(const std::vector<AtomicFact>& facts, const std::vector<bool>& flags) {
  std::vector<FactAlignment> out;
  for (std::size_t i = 0; i < facts.size(); ++i) out.push_back({facts[i], flags[i], std::nullopt});
  return out;
}

double supported_fraction(std::span<const FactAlignment> a) {
  if (a.empty()) return 0.0;
  const auto n = std::count_if(a.begin(), a.end(), [](const FactAlignment& x) { return x.supported; });
  return static_cast<double>(n) / static_cast<double>(a.size());
}

}  // namespace

JudgeVerdictBatch parse_judge_output(std::string_view raw, std::string_view schema_id) {
  const nlohmann::json j = extract_object(raw);
  JudgeVerdictBatch b;
  b.raw.emplace_back(raw);
  if (schema_id == "refbased.v1") {
    const bool has_ret = j.contains("facts_retrieved");
    const bool has_ref = j.contains("facts_reference");
    if (!has_ret && !has_ref) malformed("neither facts_retrieved nor facts_reference present", raw);
    if (has_ret) parse_side(j, "retrieved", b.facts_retrieved, b.supported_retrieved, raw);
    if (has_ref) parse_side(j, "reference", b.facts_reference, b.supported_reference, raw);
  } else if (schema_id == "facts.v1") {
    b.facts = string_list(j, "facts", raw);
  } else if (schema_id == "support.v1") {
    b.flags = bool_list(j, "supported", raw);
  } else if (schema_id == "addressed.v1") {
    b.flags = bool_list(j, "addressed", raw);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown judge schema '" + std::string(schema_id) + "'");
  }
  return b;
}

double precision(std::span<const FactAlignment> retrieved_vs_reference) {
  return supported_fraction(retrieved_vs_reference);
}

double recall(std::span<const FactAlignment> reference_vs_retrieved) {
  return supported_fraction(reference_vs_retrieved);
}

JudgeVerdictBatch ReferenceScorer::ask(const PromptRequest& request, std::vector<std::string>* raw,
                                       const std::function<void(const JudgeVerdictBatch&)>& check) {
  PromptRequest current = request;
  for (int attempt = 0;; ++attempt) {
    std::optional<JudgeVerdictBatch> parsed;
    try {
      // Parsing inside complete() keeps unusable replies out of the cache.
      judge_.complete(current, [&](const std::string& text) {
        if (raw) raw->push_back(text);
        JudgeVerdictBatch b = parse_judge_output(text, request.schema_id);
        if (check) check(b);
        parsed = std::move(b);
      });
      return std::move(*parsed);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MalformedResponse || attempt == 1) throw;
      log::info(std::string("reprompting judge after: ") + e.what());
      current = prompts::repair(request, e.what());
    }
  }
}

std::vector<AtomicFact> ReferenceScorer::decompose(const EvidenceSet& evidence, FactOrigin origin) {
  const std::string text = ingest::qa_serialize(evidence);
  if (trim(text).empty()) return {};
  const auto req = prompts::render(kDecomposeTemplate, {{"evidence", text}});
  const auto b = ask(req, nullptr, [](const JudgeVerdictBatch& b) {
    if (b.facts.empty()) throw Error(ErrorKind::MalformedResponse, "no facts for non-empty evidence");
  });
  return make_facts(b.facts, origin);
}

std::vector<AtomicFact> ReferenceScorer::decompose(const Claim& claim) {
  if (trim(claim.text).empty()) throw Error(ErrorKind::InvalidArgument, "claim text is empty");
  const auto req = prompts::render(kClaimTemplate, {{"claim", claim.text}});
  const auto b = ask(req, nullptr, [](const JudgeVerdictBatch& b) {
    if (b.facts.empty()) throw Error(ErrorKind::MalformedResponse, "no facts for the claim");
  });
  return make_facts(b.facts, FactOrigin::from_claim);
}

std::vector<FactAlignment> ReferenceScorer::verify_facts(std::span<const AtomicFact> facts,
                                                         const EvidenceSet& against) {
  if (facts.empty()) throw Error(ErrorKind::InvalidArgument, "no facts to verify");
  const std::string text = ingest::qa_serialize(against);
  std::vector<AtomicFact> copy(facts.begin(), facts.end());
  if (trim(text).empty()) return align(copy, std::vector<bool>(copy.size(), false));
  const auto req = prompts::render(kVerifyTemplate, {{"facts", facts_json(facts)}, {"evidence", text}});
  const std::size_t n = facts.size();
  const auto b = ask(req, nullptr, [n](const JudgeVerdictBatch& b) {
    if (b.flags.size() != n) {
      throw Error(ErrorKind::MalformedResponse,
                  "expected " + std::to_string(n) + " decisions, got " + std::to_string(b.flags.size()));
    }
  });
  return align(copy, b.flags);
}

ReferenceScore ReferenceScorer::score_reference_based(const EvalInstance& instance) {
  if (instance.reference_evidence.empty()) {
    throw Error(ErrorKind::MissingReference, "instance " + instance.id() + " has no reference evidence");
  }
  ReferenceScore out;
  if (instance.retrieved_evidence.empty()) return out;

  const std::string retrieved = ingest::qa_serialize(instance.retrieved_evidence);
  const std::string reference = ingest::qa_serialize(instance.reference_evidence);
  try {
    for (const std::string side : {"retrieved", "reference"}) {
      const bool ret = side == "retrieved";
      const auto req = prompts::render(kTemplate, {{"side", side},
                                                   {"evidence", ret ? retrieved : reference},
                                                   {"against", ret ? reference : retrieved}});
      const auto b = ask(req, &out.raw, [ret](const JudgeVerdictBatch& b) {
        const auto& facts = ret ? b.facts_retrieved : b.facts_reference;
        if (facts.empty()) throw Error(ErrorKind::MalformedResponse, "no facts for non-empty evidence");
      });
      if (ret) {
        out.retrieved = align(make_facts(b.facts_retrieved, FactOrigin::from_retrieved), b.supported_retrieved);
      } else {
        out.reference = align(make_facts(b.facts_reference, FactOrigin::from_reference), b.supported_reference);
      }
    }
  } catch (const Error& e) {
    throw Error(e.kind(), "instance " + instance.id() + ": " + e.message(), e.raw());
  }

  auto supported = [](const std::vector<FactAlignment>& a) {
    return static_cast<std::size_t>(
        std::count_if(a.begin(), a.end(), [](const FactAlignment& x) { return x.supported; }));
  };
  out.counts = {out.retrieved.size(), supported(out.retrieved), out.reference.size(),
                supported(out.reference)};
  out.s_prec = precision(out.retrieved);
  out.s_recall = recall(out.reference);
  out.s_f1 = f1_from_prec_recall(out.s_prec, out.s_recall);
  return out;
}

double ReferenceScorer::score_reference_less(const Claim& claim, const EvidenceSet& retrieved) {
  const std::string text = ingest::qa_serialize(retrieved);
  if (trim(text).empty()) return 0.0;
  const auto facts = decompose(claim);
  const auto req = prompts::render(kAddressedTemplate, {{"facts", facts_json(facts)}, {"evidence", text}});
  const std::size_t n = facts.size();
  const auto b = ask(req, nullptr, [n](const JudgeVerdictBatch& b) {
    if (b.flags.size() != n) {
      throw Error(ErrorKind::MalformedResponse,
                  "expected " + std::to_string(n) + " decisions, got " + std::to_string(b.flags.size()));
    }
  });
  const auto yes = std::count(b.flags.begin(), b.flags.end(), true);
  return static_cast<double>(yes) / static_cast<double>(n);
}

}  // namespace ev2r::reference
