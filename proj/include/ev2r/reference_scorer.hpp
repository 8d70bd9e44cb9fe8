#pragma once

// Reference-based scoring with an LLM judge: both evidence sets are split
// into atomic facts, each fact is checked against the other set, and
// precision/recall are the supported fractions. Also hosts the
// reference-less claim-coverage baseline.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ev2r/core.hpp"
#include "ev2r/llm_backend.hpp"

namespace ev2r::reference {

enum class FactOrigin { from_retrieved, from_reference, from_claim };

struct AtomicFact {
  std::string text;
  FactOrigin origin = FactOrigin::from_retrieved;
  std::size_t index = 0;
};

struct FactAlignment {
  AtomicFact fact;
  bool supported = false;
  std::optional<std::string> rationale;
};

// Parsed judge output. Which fields are filled depends on the schema:
//   refbased.v1  facts_*/supported_* for the side(s) present, counts checked
//   facts.v1     facts
//   support.v1   flags  ("supported")
//   addressed.v1 flags  ("addressed")
struct JudgeVerdictBatch {
  std::vector<std::string> facts_retrieved;
  std::vector<std::string> facts_reference;
  std::vector<bool> supported_retrieved;
  std::vector<bool> supported_reference;
  std::vector<std::string> facts;
  std::vector<bool> flags;
  std::vector<std::string> raw;  // judge outputs in call order
};

// Extracts the first JSON object from the text (prose and code fences
// around it are tolerated) and validates it strictly against the schema.
// Throws MalformedResponse with the raw text attached.
JudgeVerdictBatch parse_judge_output(std::string_view raw, std::string_view schema_id);

// (#supported) / size; 0 for an empty list.
double precision(std::span<const FactAlignment> retrieved_vs_reference);
double recall(std::span<const FactAlignment> reference_vs_retrieved);

struct ReferenceScore {
  double s_prec = 0.0;
  double s_recall = 0.0;
  double s_f1 = 0.0;
  FactCounts counts;
  std::vector<FactAlignment> retrieved;  // retrieved facts checked against the reference
  std::vector<FactAlignment> reference;  // reference facts checked against the retrieved set
  std::vector<std::string> raw;
};

class ReferenceScorer {
 public:
  static constexpr std::string_view kTemplate = "refbased.v1";
  static constexpr std::string_view kDecomposeTemplate = "decompose.v1";
  static constexpr std::string_view kClaimTemplate = "decompose_claim.v1";
  static constexpr std::string_view kVerifyTemplate = "verify.v1";
  static constexpr std::string_view kAddressedTemplate = "addressed.v1";

  explicit ReferenceScorer(llm::Backend& judge) : judge_(judge) {}

  // One call; empty evidence gives no facts and no call.
  std::vector<AtomicFact> decompose(const EvidenceSet& evidence, FactOrigin origin);
  std::vector<AtomicFact> decompose(const Claim& claim);

  // One call; one alignment per fact, in order.
  std::vector<FactAlignment> verify_facts(std::span<const AtomicFact> facts,
                                          const EvidenceSet& against);

  // Two judge calls, one per direction, each decomposing one side and
  // checking its facts against the other. Empty retrieved evidence scores 0
  // without a call; empty reference evidence is MissingReference.
  ReferenceScore score_reference_based(const EvalInstance& instance);

  // Fraction of the claim's facts the evidence supports or refutes.
  double score_reference_less(const Claim& claim, const EvidenceSet& retrieved);

 private:
  JudgeVerdictBatch ask(const PromptRequest& request, std::vector<std::string>* raw,
                        const std::function<void(const JudgeVerdictBatch&)>& check);

  llm::Backend& judge_;
};

}  // namespace ev2r::reference
