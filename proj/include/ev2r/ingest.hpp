#pragma once

// Dataset loaders (JSONL, streamed line by line), evidence-pair
// construction for multi-annotation datasets, rating files and the text
// serialization of evidence shared by the judges and the NLI backend.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ev2r/core.hpp"
#include "ev2r/metaeval.hpp"

namespace ev2r::ingest {

enum class Format { averitec_qa, fever_pairs, vitaminc_pairs, generic_jsonl };

std::string_view to_string(Format f);
Format parse_format(std::string_view name);

struct DatasetDescriptor {
  Format format = Format::generic_jsonl;
  std::filesystem::path path;
  LabelSpaceId label_space = LabelSpaceId::averitec4;
};

// "Q: {question}\nA: {answer}" per pair, pairs separated by a blank line; a
// pair with an empty question renders as its answer alone.
std::string qa_serialize(const EvidenceSet& evidence);

// Calls `sink` once per line-level record. Errors carry "<path>:<line>".
void stream_jsonl(const std::filesystem::path& path,
                  const std::function<void(const nlohmann::json&, std::size_t line)>& sink);

// {claim, label, questions: [{question, answers: [str | {answer, source_url}]}]}
// plus optional claim_id/id, speaker, claim_date, retrieved `evidence` and
// `pred_label`. An empty questions array loads with a warning.
std::vector<EvalInstance> load_averitec(const std::filesystem::path& path,
                                        LabelSpaceId space = LabelSpaceId::averitec4);

// One instance per line in the field layout of instance_to_json.
std::vector<EvalInstance> load_generic(const std::filesystem::path& path, LabelSpaceId space);

// Claims with several independently annotated evidence sets.
struct AnnotatedSet {
  EvidenceSet evidence;
  VerdictLabel label;
};

struct MultiEvidenceClaim {
  Claim claim;
  std::vector<AnnotatedSet> sets;
};

// Accepts grouped lines {id, claim, evidence_sets: [{label, evidence}]} or
// flat lines {claim_id?, claim, evidence, label}, grouped by claim id (or
// claim text) in first-seen order. `evidence` is a string, a list of
// strings or a list of QA pairs.
std::vector<MultiEvidenceClaim> load_evidence_sets(const std::filesystem::path& path,
                                                   LabelSpaceId space = LabelSpaceId::nli3);

struct PairOptions {
  bool all_ordered_pairs = false;
};

struct PairConstructionOutput {
  std::vector<EvalInstance> instances;
  std::vector<std::uint8_t> agreement;  // 1 iff the two sets carry the same label
  std::size_t skipped_single_set = 0;
};

// Default: the first set (file order) is the reference and each later set
// is paired with it. With all_ordered_pairs, every ordered pair (k(k-1)).
// Instance ids are "<claim id>#<ref index>-<pred index>"; the predicted
// set's label becomes predicted_label.
PairConstructionOutput build_pairs(std::span<const MultiEvidenceClaim> claims,
                                   const PairOptions& options = {});

// Dispatches on the descriptor. Pair formats go through build_pairs.
std::vector<EvalInstance> load_dataset(const DatasetDescriptor& d, const PairOptions& options = {});

// {instance_id, annotator_id, dimension, value[, tiebreak]}. Numeric values
// outside a registered dimension's scale are errors; unknown dimensions are
// registered with a warning.
std::vector<metaeval::RatingRecord> load_ratings(const std::filesystem::path& path,
                                                 metaeval::DimensionRegistry& registry);

// {instance_id, scorer, score, ...} rows as written by the score command.
std::vector<metaeval::ScoreRow> load_score_rows(const std::filesystem::path& path);

struct ValidationReport {
  std::size_t records = 0;
  std::vector<std::string> errors;    // "<path>:<line>: message"
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

// Checks every line without stopping at the first error.
ValidationReport validate(const DatasetDescriptor& d);

}  // namespace ev2r::ingest
