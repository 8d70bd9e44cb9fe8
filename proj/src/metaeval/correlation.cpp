#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "ev2r/error.hpp"
#include "ev2r/kernels.hpp"
#include "ev2r/metaeval.hpp"

namespace ev2r::metaeval {
namespace {

void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::LengthMismatch, "x has " + std::to_string(x.size()) + " values, y has " +
                                               std::to_string(y.size()));
  }
  if (x.size() < 3) throw Error(ErrorKind::InvalidArgument, "correlation needs n >= 3");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorKind::InvalidArgument, "non-finite value in correlation input");
    }
  }
}

std::vector<double> centred(std::span<const double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [mean](double a) { return a - mean; });
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

}  // namespace

std::string_view to_string(PValueMethod method) {
  return method == PValueMethod::t_approx ? "t-approx" : "exact-permutation";
}

double t_test_p_value(double r, std::size_t n) {
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "t-test needs n >= 3");
  r = std::clamp(r, -1.0, 1.0);
  const double denom = 1.0 - r * r;
  if (denom <= 0.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = std::abs(r) * std::sqrt(df / denom);
  const boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

CorrelationTest pearson(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const std::vector<double> dx = centred(x);
  const std::vector<double> dy = centred(y);
  const double sxx = dot(dx, dx);
  const double syy = dot(dy, dy);
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ZeroVariance, "constant input");
  CorrelationTest out;
  out.n = x.size();
  out.coefficient = std::clamp(dot(dx, dy) / std::sqrt(sxx * syy), -1.0, 1.0);
  out.p_value = t_test_p_value(out.coefficient, out.n);
  out.method = PValueMethod::t_approx;
  return out;
}

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrelationTest spearman(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const std::vector<double> rx = mid_ranks(x);
  const std::vector<double> ry = mid_ranks(y);
  const std::vector<double> dx = centred(rx);
  const std::vector<double> dy = centred(ry);
  const double sxx = dot(dx, dx);
  const double syy = dot(dy, dy);
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ZeroVariance, "constant ranks");

  CorrelationTest out;
  out.n = x.size();
  const double num = dot(dx, dy);
  out.coefficient = std::clamp(num / std::sqrt(sxx * syy), -1.0, 1.0);
  if (out.n <= kExactPermutationMaxN) {
    // Permutations whose |numerator| reaches the observed one, up to
    // rounding in the accumulation order.
    const double tolerance = 1e-9 * std::sqrt(sxx * syy);
    const std::uint64_t hits =
        kernels::count_extreme_permutations(dx, dy, std::abs(num) - tolerance);
    out.p_value = static_cast<double>(hits) / factorial(out.n);
    out.method = PValueMethod::exact_permutation;
  } else {
    out.p_value = t_test_p_value(out.coefficient, out.n);
    out.method = PValueMethod::t_approx;
  }
  return out;
}

}  // namespace ev2r::metaeval
