#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "ev2r/baselines.hpp"

namespace ev2r::baselines {
namespace {

constexpr int kUnmatched = -1;

// One matching stage: each unmatched candidate token, left to right, takes an
// unmatched reference token with the same key. Among several, the one that
// extends a neighbouring chunk wins, then the one nearest the position the
// left neighbour's alignment predicts.
void match_stage(const std::vector<std::string>& cand_keys,
                 const std::vector<std::string>& ref_keys, std::vector<int>& cand_to_ref,
                 std::vector<bool>& ref_used) {
  const auto n_ref = static_cast<int>(ref_keys.size());
  for (std::size_t i = 0; i < cand_keys.size(); ++i) {
    if (cand_to_ref[i] != kUnmatched) continue;
    int expected = -1;
    for (std::size_t k = i; k-- > 0;) {
      if (cand_to_ref[k] != kUnmatched) {
        expected = cand_to_ref[k] + static_cast<int>(i - k);
        break;
      }
    }
    int right_hint = -1;
    if (i + 1 < cand_keys.size() && cand_to_ref[i + 1] != kUnmatched) {
      right_hint = cand_to_ref[i + 1] - 1;
    }

    int best = kUnmatched;
    int best_rank = std::numeric_limits<int>::max();
    for (int j = 0; j < n_ref; ++j) {
      if (ref_used[static_cast<std::size_t>(j)] || ref_keys[static_cast<std::size_t>(j)] != cand_keys[i]) {
        continue;
      }
      int rank;
      if (j == expected || j == right_hint) {
        rank = -1;
      } else if (expected >= 0) {
        rank = std::abs(j - expected);
      } else {
        rank = j;
      }
      if (rank < best_rank) {
        best_rank = rank;
        best = j;
      }
    }
    if (best != kUnmatched) {
      cand_to_ref[i] = best;
      ref_used[static_cast<std::size_t>(best)] = true;
    }
  }
}

std::string stem_key(const std::string& token) {
  return porter_stem(irregular_base(token));
}

}  // namespace

MeteorAlignment meteor_align(const std::vector<std::string>& candidate,
                             const std::vector<std::string>& reference) {
  std::vector<int> cand_to_ref(candidate.size(), kUnmatched);
  std::vector<bool> ref_used(reference.size(), false);

  match_stage(candidate, reference, cand_to_ref, ref_used);

  std::vector<std::string> cand_stems;
  std::vector<std::string> ref_stems;
  cand_stems.reserve(candidate.size());
  ref_stems.reserve(reference.size());
  for (const auto& t : candidate) cand_stems.push_back(stem_key(t));
  for (const auto& t : reference) ref_stems.push_back(stem_key(t));
  match_stage(cand_stems, ref_stems, cand_to_ref, ref_used);

  MeteorAlignment a;
  int prev_ref = -2;
  bool prev_matched = false;
  for (int r : cand_to_ref) {
    if (r == kUnmatched) {
      prev_matched = false;
      continue;
    }
    ++a.matches;
    if (!prev_matched || r != prev_ref + 1) ++a.chunks;
    prev_ref = r;
    prev_matched = true;
  }
  return a;
}

double meteor(const TokenSequence& candidate, const TokenSequence& reference,
              const MeteorParams& params) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const MeteorAlignment a = meteor_align(candidate.tokens, reference.tokens);
  if (a.matches == 0) return 0.0;
  const auto m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double penalty =
      params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  return std::clamp(fmean * (1.0 - penalty), 0.0, 1.0);
}

}  // namespace ev2r::baselines
