#pragma once

// Domain model shared by every module plus the weighted score combination.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ev2r {

inline constexpr double kDefaultAlpha = 0.5;

// ---------------------------------------------------------------------------
// Verdict labels

enum class LabelSpaceId : std::uint8_t { averitec4, nli3 };

struct LabelSpace {
  LabelSpaceId id;
  std::string_view name;                       // "averitec-4", "nli-3"
  std::vector<std::string_view> canonical;     // machine names, index order
  std::vector<std::string_view> verbalized;    // how prompts spell them
};

const LabelSpace& label_space(LabelSpaceId id);
LabelSpaceId parse_label_space(std::string_view name);

struct VerdictLabel {
  LabelSpaceId space = LabelSpaceId::averitec4;
  std::uint8_t index = 0;

  friend bool operator==(const VerdictLabel&, const VerdictLabel&) = default;
};

std::string_view label_name(VerdictLabel label);
std::string_view label_verbalized(VerdictLabel label);

// Case-insensitive; spaces, hyphens and underscores are interchangeable.
// Throws UnknownLabel rather than defaulting to not-enough-info.
VerdictLabel map_label(std::string_view raw, LabelSpaceId space);

// Cross-space conversion table. The default table sends AVeriTeC's
// conflicting/cherrypicking class to NLI not-enough-info; entries can be
// overridden per run.
class LabelMapping {
 public:
  static constexpr std::string_view kDefaultVersion = "labelmap-v1";

  LabelMapping();

  VerdictLabel convert(VerdictLabel label, LabelSpaceId target) const;
  void set_override(VerdictLabel from, VerdictLabel to);
  std::string version() const;

  // {"averitec-4->nli-3": {"conflicting-evidence/cherrypicking": "supports"}}
  static LabelMapping from_json(const nlohmann::json& overrides);

 private:
  std::map<std::pair<int, int>, VerdictLabel> table_;  // ((space,index), target space) -> label
  bool overridden_ = false;

  static std::pair<int, int> key(VerdictLabel from, LabelSpaceId target) {
    return {static_cast<int>(from.space) * 16 + from.index, static_cast<int>(target)};
  }
};

// ---------------------------------------------------------------------------
// Instances

struct Claim {
  std::string id;
  std::string text;
  std::optional<std::string> speaker;
  std::optional<std::string> date;
};

struct QAPair {
  std::string question;  // empty for sentence-style evidence
  std::string answer;
  std::optional<std::string> source_url;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

enum class Provenance : std::uint8_t { reference, retrieved };

struct EvidenceSet {
  std::vector<QAPair> items;
  Provenance provenance = Provenance::retrieved;

  bool empty() const noexcept { return items.empty(); }
  std::size_t size() const noexcept { return items.size(); }
};

struct EvalInstance {
  Claim claim;
  EvidenceSet reference_evidence{{}, Provenance::reference};
  EvidenceSet retrieved_evidence{{}, Provenance::retrieved};
  VerdictLabel reference_label;
  std::optional<VerdictLabel> predicted_label;

  const std::string& id() const noexcept { return claim.id; }
};

// Throws InvalidArgument when a type invariant is broken.
void validate(const Claim& claim);
void validate(const EvidenceSet& evidence);
void validate(const EvalInstance& instance);

// ---------------------------------------------------------------------------
// Scores

struct FactCounts {
  std::size_t retrieved_facts = 0;
  std::size_t retrieved_supported = 0;
  std::size_t reference_facts = 0;
  std::size_t reference_supported = 0;

  friend bool operator==(const FactCounts&, const FactCounts&) = default;
};

struct Ev2RScore {
  double s_prec = 0.0;
  double s_recall = 0.0;
  double s_f1 = 0.0;
  double s_proxy = 0.0;
  double alpha = kDefaultAlpha;
  double s_final = 0.0;
  FactCounts fact_counts;
};

// Harmonic mean; 0 when both inputs are 0.
double f1_from_prec_recall(double prec, double recall);

// alpha * f1 + (1 - alpha) * proxy.
double weighted_score(double f1, double proxy, double alpha = kDefaultAlpha);

Ev2RScore combine_scores(double prec, double recall, double proxy, double alpha,
                         const FactCounts& counts);

// ---------------------------------------------------------------------------
// JSON field names used by the JSONL formats.

void to_json(nlohmann::json& j, const QAPair& qa);
void from_json(const nlohmann::json& j, QAPair& qa);
nlohmann::json evidence_to_json(const EvidenceSet& evidence);
EvidenceSet evidence_from_json(const nlohmann::json& j, Provenance provenance);
nlohmann::json instance_to_json(const EvalInstance& instance);
EvalInstance instance_from_json(const nlohmann::json& j, LabelSpaceId space);
nlohmann::json score_to_json(const Ev2RScore& score);

}  // namespace ev2r
