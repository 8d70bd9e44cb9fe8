#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ev2r/error.hpp"
#include "ev2r/log.hpp"
#include "ev2r/metaeval.hpp"

namespace ev2r::metaeval {

double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts) {
  if (counts.empty()) throw Error(ErrorKind::InvalidArgument, "no items");
  const std::size_t k = counts.front().size();
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "need at least two categories");

  std::size_t raters = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].size() != k) {
      throw Error(ErrorKind::InvalidArgument, "item " + std::to_string(i) + " has wrong width");
    }
    std::size_t row = 0;
    for (std::size_t c : counts[i]) row += c;
    if (i == 0) raters = row;
    if (row != raters) {
      throw Error(ErrorKind::UnequalRaterCounts, "item " + std::to_string(i) + " has " +
                                                     std::to_string(row) + " ratings, expected " +
                                                     std::to_string(raters));
    }
  }
  if (raters < 2) throw Error(ErrorKind::InvalidArgument, "need at least two raters per item");

  const auto n_items = static_cast<double>(counts.size());
  const auto n = static_cast<double>(raters);
  std::vector<double> category_share(k, 0.0);
  double p_bar = 0.0;
  for (const auto& row : counts) {
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = static_cast<double>(row[j]);
      sq += c * c;
      category_share[j] += c;
    }
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  p_bar /= n_items;
  double p_e = 0.0;
  for (double s : category_share) {
    const double p = s / (n_items * n);
    p_e += p * p;
  }
  if (p_e >= 1.0) {
    throw Error(ErrorKind::DegenerateExpectedAgreement, "every rating falls in one category");
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

double krippendorff_alpha(std::span<const ReliabilityValue> values, MeasurementLevel level) {
  std::map<std::string, std::vector<double>> units;
  for (const auto& v : values) {
    if (!std::isfinite(v.value)) throw Error(ErrorKind::InvalidArgument, "non-finite rating");
    units[v.unit].push_back(v.value);
  }

  std::vector<double> codes;
  for (const auto& [unit, vals] : units) {
    if (vals.size() >= 2) codes.insert(codes.end(), vals.begin(), vals.end());
  }
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  if (codes.empty()) {
    throw Error(ErrorKind::InsufficientPairs, "no unit has two or more values");
  }
  auto index_of = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(codes.begin(), codes.end(), v) - codes.begin());
  };

  const std::size_t q = codes.size();
  std::vector<double> coincidence(q * q, 0.0);
  for (const auto& [unit, vals] : units) {
    const std::size_t m = vals.size();
    if (m < 2) continue;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) coincidence[index_of(vals[i]) * q + index_of(vals[j])] += w;
      }
    }
  }

  std::vector<double> marginal(q, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < q; ++c) {
    for (std::size_t k = 0; k < q; ++k) marginal[c] += coincidence[c * q + k];
    total += marginal[c];
  }
  auto delta2 = [&](std::size_t c, std::size_t k) {
    if (level == MeasurementLevel::nominal) return c == k ? 0.0 : 1.0;
    const double d = codes[c] - codes[k];
    return d * d;
  };

  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t c = 0; c < q; ++c) {
    for (std::size_t k = 0; k < q; ++k) {
      const double d = delta2(c, k);
      observed += coincidence[c * q + k] * d;
      expected += marginal[c] * marginal[k] * d;
    }
  }
  if (expected == 0.0) return 1.0;  // a single value everywhere: no disagreement possible
  return 1.0 - (total - 1.0) * observed / expected;
}

DimensionRegistry::DimensionRegistry() {
  for (const char* name : {"coverage", "relevance", "coherence", "repetition", "consistency"}) {
    dims_.emplace(name, Dimension{name, ValueKind::numeric, 1.0, 5.0});
  }
  dims_.emplace("verdict_agreement",
                Dimension{"verdict_agreement", ValueKind::categorical, std::nullopt, std::nullopt});
}

const Dimension* DimensionRegistry::find(std::string_view name) const {
  auto it = dims_.find(name);
  return it == dims_.end() ? nullptr : &it->second;
}

const Dimension& DimensionRegistry::ensure(std::string_view name, ValueKind kind) {
  auto it = dims_.find(name);
  if (it != dims_.end()) return it->second;
  log::warn("registering unknown rating dimension '" + std::string(name) + "'");
  return dims_.emplace(std::string(name), Dimension{std::string(name), kind, std::nullopt, std::nullopt})
      .first->second;
}

std::vector<std::string> DimensionRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, dim] : dims_) out.push_back(name);
  return out;
}

StdSummary rating_std(std::span<const RatingRecord> records, std::string_view dimension) {
  std::map<std::string, std::vector<double>> by_item;
  for (const auto& r : records) {
    if (r.dimension == dimension && r.is_numeric()) {
      by_item[r.instance_id].push_back(std::get<double>(r.value));
    }
  }
  StdSummary out;
  double sum = 0.0;
  for (const auto& [id, vals] : by_item) {
    if (vals.size() < 2) {
      log::warn("rating_std: item '" + id + "' has a single rating; excluded");
      ++out.excluded;
      continue;
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size());
    out.items.push_back({id, std::sqrt(var), vals.size()});
    sum += out.items.back().std;
  }
  out.mean_std = out.items.empty() ? 0.0 : sum / static_cast<double>(out.items.size());
  return out;
}

std::map<std::string, double> aggregate_numeric(std::span<const RatingRecord> records,
                                                std::string_view dimension) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& r : records) {
    if (r.dimension != dimension || !r.is_numeric()) continue;
    auto& [sum, n] = acc[r.instance_id];
    sum += std::get<double>(r.value);
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [id, sn] : acc) out[id] = sn.first / static_cast<double>(sn.second);
  return out;
}

std::map<std::string, std::string> aggregate_categorical(std::span<const RatingRecord> records,
                                                         std::string_view dimension) {
  struct Votes {
    std::map<std::string, std::size_t> counts;
    std::optional<std::string> tiebreak;
  };
  std::map<std::string, Votes> by_item;
  for (const auto& r : records) {
    if (r.dimension != dimension || r.is_numeric()) continue;
    auto& v = by_item[r.instance_id];
    const auto& label = std::get<std::string>(r.value);
    ++v.counts[label];
    if (r.tiebreak) v.tiebreak = label;
  }
  std::map<std::string, std::string> out;
  for (const auto& [id, votes] : by_item) {
    std::size_t best = 0;
    for (const auto& [label, c] : votes.counts) best = std::max(best, c);
    std::vector<std::string> tied;
    for (const auto& [label, c] : votes.counts) {
      if (c == best) tied.push_back(label);
    }
    if (tied.size() == 1) {
      out[id] = tied.front();
    } else if (votes.tiebreak) {
      out[id] = *votes.tiebreak;
    } else {
      log::warn("majority vote tied for '" + id + "' with no tiebreak rating");
      out[id] = tied.front();
    }
  }
  return out;
}

}  // namespace ev2r::metaeval
