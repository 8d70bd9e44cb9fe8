#include "ev2r/ingest.hpp"

#include <fstream>
#include <map>

#include "ev2r/error.hpp"
#include "ev2r/log.hpp"
#include "ev2r/text.hpp"

namespace ev2r::ingest {
namespace {

std::string id_string(const nlohmann::json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::optional<std::string> opt_string(const nlohmann::json& j, const char* field) {
  if (j.contains(field) && j[field].is_string() && !j[field].get<std::string>().empty()) {
    return j[field].get<std::string>();
  }
  return std::nullopt;
}

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorKind::SchemaViolation, msg); }

// Adds "<path>:<line>: " to any error thrown by fn, keeping its kind.
template <typename Fn>
auto at_line(const std::filesystem::path& path, std::size_t line, Fn&& fn) -> decltype(fn()) {
  const std::string where = path.string() + ":" + std::to_string(line) + ": ";
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), where + e.message(), e.raw());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, where + e.what());
  }
}

QAPair averitec_answer(const std::string& question, const nlohmann::json& a) {
  if (a.is_string()) return {question, a.get<std::string>(), std::nullopt};
  if (!a.is_object()) schema("answers must be strings or objects");
  std::string text = a.value("answer", std::string());
  if (auto expl = opt_string(a, "boolean_explanation")) {
    text = text.empty() ? *expl : text + ". " + *expl;
  }
  std::optional<std::string> url = opt_string(a, "source_url");
  if (!url) url = opt_string(a, "url");
  return {question, text, url};
}

struct AveritecLine {
  EvalInstance instance;
  bool empty_questions = false;
};

AveritecLine parse_averitec(const nlohmann::json& j, std::size_t record, LabelSpaceId space) {
  if (!j.is_object()) schema("record is not an object");
  AveritecLine out;
  EvalInstance& in = out.instance;
  if (j.contains("claim_id")) in.claim.id = id_string(j["claim_id"]);
  else if (j.contains("id")) in.claim.id = id_string(j["id"]);
  else in.claim.id = std::to_string(record);
  in.claim.text = j.at("claim").get<std::string>();
  in.claim.speaker = opt_string(j, "speaker");
  in.claim.date = opt_string(j, "claim_date");
  if (!in.claim.date) in.claim.date = opt_string(j, "date");
  in.reference_label = map_label(j.at("label").get<std::string>(), space);

  const auto& questions = j.at("questions");
  if (!questions.is_array()) schema("questions must be a list");
  for (const auto& q : questions) {
    const std::string question = q.at("question").get<std::string>();
    const auto& answers = q.value("answers", nlohmann::json::array());
    for (const auto& a : answers) {
      QAPair qa = averitec_answer(question, a);
      if (trim(qa.answer).empty()) continue;
      in.reference_evidence.items.push_back(std::move(qa));
    }
  }
  out.empty_questions = questions.empty();
  if (j.contains("evidence") && j["evidence"].is_array()) {
    in.retrieved_evidence = evidence_from_json(j["evidence"], Provenance::retrieved);
  }
  if (auto pred = opt_string(j, "pred_label")) in.predicted_label = map_label(*pred, space);
  validate(in.claim);
  return out;
}

EvidenceSet evidence_value(const nlohmann::json& v, Provenance provenance) {
  EvidenceSet e;
  e.provenance = provenance;
  if (v.is_string()) {
    e.items.push_back({"", v.get<std::string>(), std::nullopt});
  } else if (v.is_array()) {
    for (const auto& item : v) {
      if (!item.is_string() && !item.is_object()) schema("evidence entries must be text or QA objects");
      e.items.push_back(item.get<QAPair>());
    }
  } else {
    schema("evidence must be a string or a list");
  }
  validate(e);
  return e;
}

struct EvidenceLine {
  std::string claim_id;
  std::string claim;
  std::vector<AnnotatedSet> sets;
};

EvidenceLine parse_evidence_line(const nlohmann::json& j, LabelSpaceId space) {
  if (!j.is_object()) schema("record is not an object");
  EvidenceLine out;
  out.claim = j.at("claim").get<std::string>();
  if (j.contains("claim_id")) out.claim_id = id_string(j["claim_id"]);
  else if (j.contains("id")) out.claim_id = id_string(j["id"]);
  if (j.contains("evidence_sets")) {
    for (const auto& s : j["evidence_sets"]) {
      out.sets.push_back({evidence_value(s.at("evidence"), Provenance::reference),
                          map_label(s.at("label").get<std::string>(), space)});
    }
  } else {
    out.sets.push_back({evidence_value(j.at("evidence"), Provenance::reference),
                        map_label(j.at("label").get<std::string>(), space)});
  }
  return out;
}

metaeval::RatingRecord parse_rating(const nlohmann::json& j, metaeval::DimensionRegistry& registry) {
  if (!j.is_object()) schema("rating is not an object");
  metaeval::RatingRecord r;
  r.instance_id = id_string(j.at("instance_id"));
  r.annotator_id = id_string(j.at("annotator_id"));
  r.dimension = j.at("dimension").get<std::string>();
  r.tiebreak = j.value("tiebreak", false);
  const auto& v = j.at("value");
  if (!v.is_number() && !v.is_string()) schema("value must be a number or a string");

  const metaeval::Dimension& dim = registry.ensure(
      r.dimension, v.is_number() ? metaeval::ValueKind::numeric : metaeval::ValueKind::categorical);
  if (dim.kind == metaeval::ValueKind::numeric) {
    if (!v.is_number()) schema("dimension " + r.dimension + " expects a number");
    const double x = v.get<double>();
    if ((dim.min && x < *dim.min) || (dim.max && x > *dim.max)) {
      auto bound = [](const std::optional<double>& b) { return b ? nlohmann::json(*b).dump() : "-"; };
      schema("value " + v.dump() + " outside [" + bound(dim.min) + ", " + bound(dim.max) + "] for " +
             r.dimension);
    }
    r.value = x;
  } else {
    r.value = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return r;
}

}  // namespace

std::string_view to_string(Format f) {
  switch (f) {
    case Format::averitec_qa: return "averitec-qa";
    case Format::fever_pairs: return "fever-pairs";
    case Format::vitaminc_pairs: return "vitaminc-pairs";
    case Format::generic_jsonl: return "generic-jsonl";
  }
  return "?";
}

Format parse_format(std::string_view name) {
  for (Format f : {Format::averitec_qa, Format::fever_pairs, Format::vitaminc_pairs, Format::generic_jsonl}) {
    if (to_string(f) == name) return f;
  }
  throw Error(ErrorKind::Config, "unknown dataset format '" + std::string(name) + "'");
}

std::string qa_serialize(const EvidenceSet& evidence) {
  std::string out;
  for (const QAPair& qa : evidence.items) {
    if (!out.empty()) out += "\n\n";
    if (trim(qa.question).empty()) {
      out += qa.answer;
    } else {
      out += "Q: " + qa.question + "\nA: " + qa.answer;
    }
  }
  return out;
}

void stream_jsonl(const std::filesystem::path& path,
                  const std::function<void(const nlohmann::json&, std::size_t line)>& sink) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string buf;
  std::size_t line = 0;
  while (std::getline(in, buf)) {
    ++line;
    if (line == 1 && buf.rfind("\xEF\xBB\xBF", 0) == 0) buf.erase(0, 3);
    if (trim(buf).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(buf, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorKind::SchemaViolation, path.string() + ":" + std::to_string(line) + ": not valid JSON");
    }
    sink(j, line);
  }
}

std::vector<EvalInstance> load_averitec(const std::filesystem::path& path, LabelSpaceId space) {
  std::vector<EvalInstance> out;
  std::size_t record = 0;
  stream_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    AveritecLine l = at_line(path, line, [&] { return parse_averitec(j, record, space); });
    ++record;
    if (l.empty_questions) {
      log::warn(path.string() + ":" + std::to_string(line) + ": claim " + l.instance.id() +
                " has no questions; reference evidence is empty");
    }
    out.push_back(std::move(l.instance));
  });
  return out;
}

std::vector<EvalInstance> load_generic(const std::filesystem::path& path, LabelSpaceId space) {
  std::vector<EvalInstance> out;
  stream_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    out.push_back(at_line(path, line, [&] {
      EvalInstance in = instance_from_json(j, space);
      validate(in);
      return in;
    }));
  });
  return out;
}

std::vector<MultiEvidenceClaim> load_evidence_sets(const std::filesystem::path& path, LabelSpaceId space) {
  std::vector<MultiEvidenceClaim> out;
  std::map<std::string, std::size_t> index;
  stream_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    EvidenceLine l = at_line(path, line, [&] { return parse_evidence_line(j, space); });
    const std::string key = l.claim_id.empty() ? "text:" + l.claim : "id:" + l.claim_id;
    auto it = index.find(key);
    if (it == index.end()) {
      MultiEvidenceClaim c;
      c.claim.id = l.claim_id.empty() ? "c" + std::to_string(out.size()) : l.claim_id;
      c.claim.text = l.claim;
      it = index.emplace(key, out.size()).first;
      out.push_back(std::move(c));
    }
    for (auto& s : l.sets) out[it->second].sets.push_back(std::move(s));
  });
  return out;
}

PairConstructionOutput build_pairs(std::span<const MultiEvidenceClaim> claims, const PairOptions& options) {
  PairConstructionOutput out;
  auto emit = [&](const MultiEvidenceClaim& c, std::size_t ref, std::size_t pred) {
    EvalInstance in;
    in.claim = c.claim;
    in.claim.id = c.claim.id + "#" + std::to_string(ref) + "-" + std::to_string(pred);
    in.reference_evidence = c.sets[ref].evidence;
    in.reference_evidence.provenance = Provenance::reference;
    in.retrieved_evidence = c.sets[pred].evidence;
    in.retrieved_evidence.provenance = Provenance::retrieved;
    in.reference_label = c.sets[ref].label;
    in.predicted_label = c.sets[pred].label;
    out.agreement.push_back(c.sets[ref].label == c.sets[pred].label ? 1 : 0);
    out.instances.push_back(std::move(in));
  };
  for (const auto& c : claims) {
    const std::size_t k = c.sets.size();
    if (k < 2) {
      ++out.skipped_single_set;
      continue;
    }
    if (options.all_ordered_pairs) {
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
          if (a != b) emit(c, a, b);
        }
      }
    } else {
      for (std::size_t b = 1; b < k; ++b) emit(c, 0, b);
    }
  }
  return out;
}

std::vector<EvalInstance> load_dataset(const DatasetDescriptor& d, const PairOptions& options) {
  switch (d.format) {
    case Format::averitec_qa:
      return load_averitec(d.path, d.label_space);
    case Format::generic_jsonl:
      return load_generic(d.path, d.label_space);
    case Format::fever_pairs:
    case Format::vitaminc_pairs: {
      const auto claims = load_evidence_sets(d.path, d.label_space);
      auto pairs = build_pairs(claims, options);
      if (pairs.skipped_single_set > 0) {
        log::info(std::to_string(pairs.skipped_single_set) + " claims with a single evidence set skipped");
      }
      return std::move(pairs.instances);
    }
  }
  throw Error(ErrorKind::Config, "unknown dataset format");
}

std::vector<metaeval::RatingRecord> load_ratings(const std::filesystem::path& path,
                                                 metaeval::DimensionRegistry& registry) {
  std::vector<metaeval::RatingRecord> out;
  stream_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    out.push_back(at_line(path, line, [&] { return parse_rating(j, registry); }));
  });
  return out;
}

std::vector<metaeval::ScoreRow> load_score_rows(const std::filesystem::path& path) {
  std::vector<metaeval::ScoreRow> out;
  stream_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    at_line(path, line, [&] {
      if (!j.contains("score") || j["score"].is_null()) return;  // failed row
      out.push_back({id_string(j.at("instance_id")), j.at("scorer").get<std::string>(),
                     j.at("score").get<double>()});
    });
  });
  return out;
}

ValidationReport validate(const DatasetDescriptor& d) {
  ValidationReport report;
  std::ifstream in(d.path, std::ios::binary);
  if (!in) {
    report.errors.push_back(d.path.string() + ": cannot open");
    return report;
  }
  std::string buf;
  std::size_t line = 0;
  std::size_t record = 0;
  std::map<std::string, std::size_t> sets_per_claim;
  while (std::getline(in, buf)) {
    ++line;
    if (line == 1 && buf.rfind("\xEF\xBB\xBF", 0) == 0) buf.erase(0, 3);
    if (trim(buf).empty()) continue;
    const std::string where = d.path.string() + ":" + std::to_string(line) + ": ";
    try {
      const nlohmann::json j = nlohmann::json::parse(buf);
      switch (d.format) {
        case Format::averitec_qa: {
          const AveritecLine l = parse_averitec(j, record, d.label_space);
          if (l.empty_questions) report.warnings.push_back(where + "no questions");
          break;
        }
        case Format::generic_jsonl:
          validate(instance_from_json(j, d.label_space));
          break;
        case Format::fever_pairs:
        case Format::vitaminc_pairs: {
          const EvidenceLine l = parse_evidence_line(j, d.label_space);
          sets_per_claim[l.claim_id.empty() ? l.claim : l.claim_id] += l.sets.size();
          break;
        }
      }
      ++report.records;
    } catch (const Error& e) {
      report.errors.push_back(where + e.what());
    } catch (const nlohmann::json::exception& e) {
      report.errors.push_back(where + e.what());
    }
    ++record;
  }
  std::size_t single = 0;
  for (const auto& [claim, n] : sets_per_claim) single += n < 2 ? 1 : 0;
  if (single > 0) {
    report.warnings.push_back(std::to_string(single) + " claims have a single evidence set and yield no pair");
  }
  return report;
}

}  // namespace ev2r::ingest
