#pragma once

// Deterministic adversarial perturbations of evidence sets and the
// robustness harness that measures how scorers react to them.
//
// Every generator is a pure function of (evidence, spec). "Units" are the
// evidence items when there are two or more, otherwise the sentences of the
// single item's answer.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ev2r/core.hpp"

namespace ev2r::perturb {

enum class Kind {
  completeness,
  random_shuffle,
  fluency_typos,
  fluency_stopwords,
  inv_num2text,
  inv_text2num,
  inv_synonyms,
  inv_contractions,
  noise,
  redundancy_sent,
  redundancy_words,
  argument_structure,
};

enum class SemanticsClass { altering, preserving };
enum class ExpectedDirection { score_should_drop, score_should_hold };

const std::vector<Kind>& all_kinds();
std::string_view to_string(Kind kind);
std::string_view to_string(SemanticsClass cls);
std::string_view to_string(ExpectedDirection direction);
Kind parse_kind(std::string_view name);

// completeness and random_shuffle alter semantics; the rest preserve it.
SemanticsClass semantics_class(Kind kind);
ExpectedDirection expected_direction(Kind kind);

// drop 0.5, typo rate 0.1, synonym rate 0.3, word redundancy 0.2; 0 where
// a kind has no intensity knob.
double default_intensity(Kind kind);

// Sentences available for noise insertion, tagged with their source
// instance so an instance never receives its own text.
struct NoiseSentence {
  std::string source_id;
  std::string text;
};

struct NoiseCorpus {
  std::vector<NoiseSentence> sentences;

  static NoiseCorpus from_instances(std::span<const EvalInstance> instances);
};

struct PerturbationSpec {
  Kind kind = Kind::completeness;
  std::uint64_t seed = 0;
  double intensity = 0.0;
  const NoiseCorpus* corpus = nullptr;  // noise only
  std::string exclude_source;           // noise only: the instance being perturbed
};

// ---------------------------------------------------------------------------
// Generators

// Removes a seeded contiguous block of round(n * intensity) units (at least
// one, never all). Throws TooShort for fewer than two units.
EvidenceSet completeness_drop(const EvidenceSet& evidence, const PerturbationSpec& spec);

// Seeded word-order shuffle inside every question and answer.
EvidenceSet random_shuffle(const EvidenceSet& evidence, const PerturbationSpec& spec);

// fluency_typos: swaps two adjacent letters in round(intensity * eligible)
// words of four or more letters. fluency_stopwords: drops every stop word.
EvidenceSet fluency(const EvidenceSet& evidence, const PerturbationSpec& spec);

// inv_num2text | inv_text2num | inv_synonyms | inv_contractions.
EvidenceSet invariance(const EvidenceSet& evidence, const PerturbationSpec& spec);

// Adds one sentence from another instance as a new item at a seeded position.
// Throws NoNoiseCandidate when the corpus offers nothing usable.
EvidenceSet noise_insert(const EvidenceSet& evidence, const PerturbationSpec& spec,
                         const NoiseCorpus& corpus);

// redundancy_sent duplicates one sentence in place; redundancy_words
// duplicates round(intensity * words) words in place.
EvidenceSet redundancy(const EvidenceSet& evidence, const PerturbationSpec& spec);

// Seeded permutation of units; at least one unit moves when there are two
// or more.
EvidenceSet argument_structure(const EvidenceSet& evidence, const PerturbationSpec& spec);

// Dispatches on spec.kind.
EvidenceSet apply(const EvidenceSet& evidence, const PerturbationSpec& spec);

// ---------------------------------------------------------------------------
// Text helpers used by the generators (and by tests as oracles for intent)

// 0 .. 999'999'999'999, e.g. 53 -> "fifty-three", 1204 -> "one thousand two
// hundred four".
std::string number_to_words(std::uint64_t value);
// Replaces integer tokens ("9", "53,") by words.
std::string numbers_to_words(std::string_view text);
// Replaces number-word phrases by numerals. Inverse of numbers_to_words on
// text where no two numbers are adjacent.
std::string words_to_numbers(std::string_view text);
std::string contract(std::string_view text);
std::string expand_contractions(std::string_view text);

// Canonical content with adjacent repeats collapsed; equal before and after
// a redundancy perturbation.
std::vector<std::vector<std::string>> dedup_sentences(const EvidenceSet& evidence);
std::vector<std::vector<std::string>> dedup_words(const EvidenceSet& evidence);

std::size_t unit_count(const EvidenceSet& evidence);
std::size_t token_count(const EvidenceSet& evidence);
std::size_t sentence_count(const EvidenceSet& evidence);

// ---------------------------------------------------------------------------
// Suites

struct PerturbedInstance {
  std::string suite_id;          // "<instance id>/<kind>"
  EvalInstance original;         // retrieved evidence = the initial evidence
  EvidenceSet perturbed;
  PerturbationSpec spec;
  ExpectedDirection expected_direction = ExpectedDirection::score_should_hold;
};

struct SuiteOptions {
  std::vector<Kind> kinds = all_kinds();
  std::uint64_t seed = 0;
  std::map<Kind, double> intensity;  // overrides of default_intensity
};

// Per-instance seed: derived from the suite seed, instance id and kind.
std::uint64_t derive_seed(std::uint64_t suite_seed, std::string_view instance_id, Kind kind);

// Cross product instances x kinds. Instances without retrieved evidence use
// their reference evidence as the initial evidence. Kinds that do not apply
// to an instance (TooShort, NoNoiseCandidate) are skipped and reported
// through `skipped` when given.
std::vector<PerturbedInstance> generate_suite(std::span<const EvalInstance> instances,
                                              const SuiteOptions& options,
                                              std::vector<std::string>* skipped = nullptr);

namespace serial {
std::vector<PerturbedInstance> generate_suite(std::span<const EvalInstance> instances,
                                              const SuiteOptions& options,
                                              std::vector<std::string>* skipped = nullptr);
}

nlohmann::json manifest_row(const PerturbedInstance& p);
nlohmann::json suite_row(const PerturbedInstance& p);
PerturbedInstance suite_row_from_json(const nlohmann::json& j, LabelSpaceId space);

// ---------------------------------------------------------------------------
// Robustness

using Scorer = std::function<double(const EvalInstance&)>;

struct KindDelta {
  Kind kind;
  double mean_delta_pct = 0.0;  // mean of (perturbed - original) / original * 100
  std::size_t n = 0;
  std::size_t skipped = 0;      // original score 0 or scorer failure
};

struct RobustnessReport {
  std::string scorer;
  std::vector<KindDelta> kinds;
  std::map<SemanticsClass, double> class_average;  // mean of the kind means

  const KindDelta* find(Kind kind) const;
  nlohmann::json to_json() const;
};

RobustnessReport robustness_report(std::string scorer_name, const Scorer& scorer,
                                   std::span<const PerturbedInstance> suite);

// Rows = kinds grouped by semantics class with class averages, columns =
// scorers.
std::string robustness_table(std::span<const RobustnessReport> reports);

}  // namespace ev2r::perturb
