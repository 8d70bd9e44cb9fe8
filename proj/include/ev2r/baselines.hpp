#pragma once

// Lexical reference-based baselines. All scores lie in [0,1].

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ev2r/core.hpp"
#include "ev2r/text.hpp"

namespace ev2r::baselines {

// Reported in run metadata so numbers are not confused with full METEOR
// (no WordNet synonym stage).
inline constexpr std::string_view kMeteorVariant = "meteor-es";

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// LCS-based F-measure with beta = 1. Empty input scores 0 (with a warning).
double rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

// Sentence BLEU: clipped n-gram precisions, add-one smoothing for n > 1,
// brevity penalty.
double bleu(const TokenSequence& candidate, const TokenSequence& reference, int max_n = 4);

// Exact stage, then Porter-stem stage (irregular forms normalised first).
double meteor(const TokenSequence& candidate, const TokenSequence& reference,
              const MeteorParams& params = {});

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};
MeteorAlignment meteor_align(const std::vector<std::string>& candidate,
                             const std::vector<std::string>& reference);

std::string porter_stem(std::string_view word);

// Maps irregular inflections ("ran", "went") onto their base form before
// stemming; identity for anything not in the shipped table.
std::string_view irregular_base(std::string_view word);

// ---------------------------------------------------------------------------
// Optimal assignment

class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  // For each original row, the assigned original column or -1 when the row
  // landed on a padding column.
  std::vector<int> row_to_col;
  // Minimum total cost over the padded square matrix.
  double total_cost = 0.0;
};

inline constexpr double kPaddingCost = 1.0;

// Kuhn-Munkres on the matrix padded to square with kPaddingCost. Entries
// must be finite and non-negative. Throws InvalidArgument on empty input.
Assignment hungarian_assign(const CostMatrix& costs);

// Text of one evidence item as seen by the lexical metrics.
std::string item_text(const QAPair& qa);
// Whole evidence set as plain text (items joined by spaces).
std::string evidence_text(const EvidenceSet& evidence);

// Pairwise METEOR over items, optimal one-to-one assignment, sum of matched
// scores divided by max(|candidate|, |reference|).
double hungarian_meteor(const EvidenceSet& candidate, const EvidenceSet& reference);

// Convenience wrappers over whole evidence sets.
double rouge_l(const EvidenceSet& candidate, const EvidenceSet& reference);
double bleu(const EvidenceSet& candidate, const EvidenceSet& reference);
double meteor(const EvidenceSet& candidate, const EvidenceSet& reference);

}  // namespace ev2r::baselines
