#pragma once

// Statistics for validating scorers against human ratings: correlation with
// significance, inter-annotator agreement, and correlation report assembly.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ev2r/core.hpp"

namespace ev2r::metaeval {

// Spearman p-values use exact permutation enumeration up to this n.
inline constexpr std::size_t kExactPermutationMaxN = 10;

enum class PValueMethod { t_approx, exact_permutation };
std::string_view to_string(PValueMethod method);

struct CorrelationTest {
  double coefficient = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  PValueMethod method = PValueMethod::t_approx;
};

// Sample Pearson r with two-sided p from Student-t on n-2 degrees of freedom.
// Throws LengthMismatch, InvalidArgument (n < 3) or ZeroVariance.
CorrelationTest pearson(std::span<const double> x, std::span<const double> y);

// Pearson over mid-ranks. Exact permutation p for n <= 10, t-approximation
// above.
CorrelationTest spearman(std::span<const double> x, std::span<const double> y);

// Ranks starting at 1; ties share the average of the positions they span.
std::vector<double> mid_ranks(std::span<const double> values);

// Two-sided p for a correlation coefficient r over n observations.
double t_test_p_value(double r, std::size_t n);

// ---------------------------------------------------------------------------
// Agreement

// counts[item][category] = number of raters assigning category to item.
double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts);

enum class MeasurementLevel { nominal, interval };

struct ReliabilityValue {
  std::string unit;       // item
  std::string annotator;
  double value = 0.0;     // category code for nominal data
};

// Coincidence-matrix formulation; units with fewer than two values are not
// pairable and are ignored. Throws InsufficientPairs when nothing is
// pairable.
double krippendorff_alpha(std::span<const ReliabilityValue> values, MeasurementLevel level);

// ---------------------------------------------------------------------------
// Ratings

enum class ValueKind { numeric, categorical };

struct Dimension {
  std::string name;
  ValueKind kind = ValueKind::numeric;
  std::optional<double> min;
  std::optional<double> max;
};

class DimensionRegistry {
 public:
  // coverage, relevance, coherence, repetition, consistency: numeric 1-5.
  // verdict_agreement: categorical (verdict labels).
  DimensionRegistry();

  const Dimension* find(std::string_view name) const;
  // Unknown names are registered without a scale bound, with a warning.
  const Dimension& ensure(std::string_view name, ValueKind kind);
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Dimension, std::less<>> dims_;
};

struct RatingRecord {
  std::string instance_id;
  std::string annotator_id;
  std::string dimension;
  std::variant<double, std::string> value;
  bool tiebreak = false;  // third-rater decision for categorical disagreements

  bool is_numeric() const { return std::holds_alternative<double>(value); }
};

struct ItemStd {
  std::string instance_id;
  double std = 0.0;
  std::size_t n = 0;
};

struct StdSummary {
  std::vector<ItemStd> items;
  double mean_std = 0.0;
  std::size_t excluded = 0;  // items with a single rating
};

// Population std per item across annotators; aggregate = mean over items.
StdSummary rating_std(std::span<const RatingRecord> records, std::string_view dimension);

// Arithmetic mean per instance of a numeric dimension.
std::map<std::string, double> aggregate_numeric(std::span<const RatingRecord> records,
                                                std::string_view dimension);

// Majority label per instance; a tie is settled by the tiebreak record when
// present, otherwise by the lexicographically smallest tied label.
std::map<std::string, std::string> aggregate_categorical(std::span<const RatingRecord> records,
                                                         std::string_view dimension);

// ---------------------------------------------------------------------------
// Correlation report

struct ScoreRow {
  std::string instance_id;
  std::string scorer;
  double score = 0.0;
};

struct CorrelationCell {
  std::string scorer;
  std::string dimension;
  std::size_t n = 0;
  std::optional<CorrelationTest> spearman;
  std::optional<CorrelationTest> pearson;
  std::string note;  // why the cell is empty, when it is
};

struct CorrelationReport {
  std::vector<std::string> scorers;
  std::vector<std::string> dimensions;
  std::vector<CorrelationCell> cells;  // scorer-major order

  const CorrelationCell* cell(std::string_view scorer, std::string_view dimension) const;
  nlohmann::json to_json() const;
  // Rows = scorers, columns = rho / r per dimension.
  std::string to_table() const;
};

struct CorrelateOptions {
  // Reference verdicts per instance; when given, categorical verdict
  // dimensions become 1/0 agreement with the majority rated label.
  const std::map<std::string, VerdictLabel>* reference_labels = nullptr;
};

// Throws EmptyJoin when no instance id appears in both inputs.
CorrelationReport correlate_report(std::span<const ScoreRow> scores,
                                   std::span<const RatingRecord> ratings,
                                   const DimensionRegistry& registry,
                                   const CorrelateOptions& options = {});

// Agreement summary per dimension (kappa and alpha for categorical
// dimensions, alpha and std for numeric ones).
nlohmann::json agreement_report(std::span<const RatingRecord> ratings,
                                const DimensionRegistry& registry);
std::string agreement_table(const nlohmann::json& report);

}  // namespace ev2r::metaeval
