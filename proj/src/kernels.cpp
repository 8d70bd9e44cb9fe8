#include "ev2r/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ev2r/error.hpp"

namespace ev2r::kernels {
namespace {

constexpr std::size_t kMaxPermutationN = 12;

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorKind::LengthMismatch, "kernel inputs differ in length");
}

// Enumerates permutations of `rest` appended after a fixed prefix sum.
std::uint64_t count_tail(std::span<const double> x, std::span<const double> y,
                         std::vector<std::size_t> rest, std::size_t offset, double prefix,
                         double threshold) {
  std::sort(rest.begin(), rest.end());
  std::uint64_t count = 0;
  do {
    double s = prefix;
    for (std::size_t k = 0; k < rest.size(); ++k) s += x[offset + k] * y[rest[k]];
    if (std::abs(s) >= threshold) ++count;
  } while (std::next_permutation(rest.begin(), rest.end()));
  return count;
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

baselines::CostMatrix pairwise_meteor(std::span<const TokenSequence> candidate,
                                      std::span<const TokenSequence> reference) {
  baselines::CostMatrix out(candidate.size(), reference.size());
  const auto rows = static_cast<std::ptrdiff_t>(candidate.size());
  const auto cols = static_cast<std::ptrdiff_t>(reference.size());
  const std::ptrdiff_t cells = rows * cols;
#pragma omp parallel for schedule(dynamic, 4) if (cells > 16)
  for (std::ptrdiff_t idx = 0; idx < cells; ++idx) {
    const auto r = static_cast<std::size_t>(idx / cols);
    const auto c = static_cast<std::size_t>(idx % cols);
    out(r, c) = baselines::meteor(candidate[r], reference[c]);
  }
  return out;
}

std::vector<double> batch_score(const EvidenceMetric& metric,
                                std::span<const EvidenceSet> candidates,
                                std::span<const EvidenceSet> references) {
  check_lengths(candidates.size(), references.size());
  std::vector<double> out(candidates.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        metric(candidates[static_cast<std::size_t>(i)], references[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::uint64_t count_extreme_permutations(std::span<const double> x, std::span<const double> y,
                                         double threshold) {
  check_lengths(x.size(), y.size());
  const std::size_t n = x.size();
  if (n > kMaxPermutationN) {
    throw Error(ErrorKind::InvalidArgument, "exact permutation enumeration limited to n <= 12");
  }
  if (n < 3) return serial::count_extreme_permutations(x, y, threshold);

  // One task per choice of the first two positions.
  const auto tasks = static_cast<std::ptrdiff_t>(n * (n - 1));
  std::uint64_t total = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : total)
  for (std::ptrdiff_t t = 0; t < tasks; ++t) {
    const auto first = static_cast<std::size_t>(t) / (n - 1);
    auto second = static_cast<std::size_t>(t) % (n - 1);
    if (second >= first) ++second;
    std::vector<std::size_t> rest;
    rest.reserve(n - 2);
    for (std::size_t k = 0; k < n; ++k) {
      if (k != first && k != second) rest.push_back(k);
    }
    const double prefix = x[0] * y[first] + x[1] * y[second];
    total += count_tail(x, y, std::move(rest), 2, prefix, threshold);
  }
  return total;
}

namespace serial {

baselines::CostMatrix pairwise_meteor(std::span<const TokenSequence> candidate,
                                      std::span<const TokenSequence> reference) {
  baselines::CostMatrix out(candidate.size(), reference.size());
  for (std::size_t r = 0; r < candidate.size(); ++r) {
    for (std::size_t c = 0; c < reference.size(); ++c) {
      out(r, c) = baselines::meteor(candidate[r], reference[c]);
    }
  }
  return out;
}

std::vector<double> batch_score(const EvidenceMetric& metric,
                                std::span<const EvidenceSet> candidates,
                                std::span<const EvidenceSet> references) {
  check_lengths(candidates.size(), references.size());
  std::vector<double> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.push_back(metric(candidates[i], references[i]));
  }
  return out;
}

std::uint64_t count_extreme_permutations(std::span<const double> x, std::span<const double> y,
                                         double threshold) {
  check_lengths(x.size(), y.size());
  if (x.size() > kMaxPermutationN) {
    throw Error(ErrorKind::InvalidArgument, "exact permutation enumeration limited to n <= 12");
  }
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  return count_tail(x, y, std::move(perm), 0, 0.0, threshold);
}

}  // namespace serial
}  // namespace ev2r::kernels
