#pragma once

// Data-parallel kernels. Each OpenMP kernel has a serial twin in
// ev2r::kernels::serial computing the same result; the tests check they
// agree and bench/ compares their throughput.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ev2r/baselines.hpp"
#include "ev2r/core.hpp"
#include "ev2r/text.hpp"

namespace ev2r::kernels {

using EvidenceMetric = std::function<double(const EvidenceSet&, const EvidenceSet&)>;

// METEOR for every (candidate item, reference item) pair.
baselines::CostMatrix pairwise_meteor(std::span<const TokenSequence> candidate,
                                      std::span<const TokenSequence> reference);

// metric(candidates[i], references[i]) for all i.
std::vector<double> batch_score(const EvidenceMetric& metric,
                                std::span<const EvidenceSet> candidates,
                                std::span<const EvidenceSet> references);

// Number of permutations p of {0..n-1} with
// |sum_i x[i] * y[p[i]]| >= threshold. Both vectors are expected centred;
// n is limited to 12.
std::uint64_t count_extreme_permutations(std::span<const double> x, std::span<const double> y,
                                         double threshold);

int max_threads();

namespace serial {

baselines::CostMatrix pairwise_meteor(std::span<const TokenSequence> candidate,
                                      std::span<const TokenSequence> reference);

std::vector<double> batch_score(const EvidenceMetric& metric,
                                std::span<const EvidenceSet> candidates,
                                std::span<const EvidenceSet> references);

std::uint64_t count_extreme_permutations(std::span<const double> x, std::span<const double> y,
                                         double threshold);

}  // namespace serial
}  // namespace ev2r::kernels
