#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ev2r/error.hpp"
#include "ev2r/metaeval.hpp"

using namespace ev2r;
using namespace ev2r::metaeval;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::InvalidArgument;
}

RatingRecord rating(std::string id, std::string who, std::string dim, double v) {
  return {std::move(id), std::move(who), std::move(dim), v, false};
}
RatingRecord rating(std::string id, std::string who, std::string dim, std::string v, bool tb = false) {
  return {std::move(id), std::move(who), std::move(dim), std::move(v), tb};
}

}  // namespace

TEST_SUITE("metaeval") {

// Reference values from scipy.stats 1.x.
TEST_CASE("pearson against reference values") {
  const std::vector<double> x{1.5, 2.0, 2.0, 3.1, 4.0, 5.5};
  const std::vector<double> y{10, 12, 11, 15, 14, 20};
  const auto t = pearson(x, y);
  CHECK(t.coefficient == doctest::Approx(0.9530620646414655).epsilon(1e-10));
  CHECK(t.p_value == doctest::Approx(0.003253048543324575).epsilon(1e-8));
  CHECK(t.method == PValueMethod::t_approx);
}

TEST_CASE("spearman above the exact limit uses the t approximation") {
  std::vector<double> x(12);
  std::iota(x.begin(), x.end(), 1.0);
  const std::vector<double> y{2, 1, 4, 3, 7, 8, 6, 5, 10, 12, 9, 11};
  const auto t = spearman(x, y);
  CHECK(t.coefficient == doctest::Approx(0.8881118881118881).epsilon(1e-10));
  CHECK(t.p_value == doctest::Approx(0.00011413359814618).epsilon(1e-8));
  CHECK(t.method == PValueMethod::t_approx);
}

TEST_CASE("spearman exact p for a perfect ranking of five") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{10, 20, 30, 40, 50};
  const auto t = spearman(x, y);
  CHECK(t.coefficient == doctest::Approx(1.0));
  CHECK(t.method == PValueMethod::exact_permutation);
  // Only the identity and the reversal reach |rho| = 1.
  CHECK(t.p_value == doctest::Approx(2.0 / 120.0));
}

TEST_CASE("mid ranks average ties") {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0, 3.0};
  const std::vector<double> want{4.0, 1.0, 4.0, 2.0, 4.0};
  CHECK(mid_ranks(v) == want);
}

TEST_CASE("correlation input errors") {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, c{5, 5, 5}, d{1, 2};
  CHECK(kind_of([&] { pearson(a, b); }) == ErrorKind::LengthMismatch);
  CHECK(kind_of([&] { pearson(a, c); }) == ErrorKind::ZeroVariance);
  CHECK(kind_of([&] { spearman(d, d); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("fleiss kappa") {
  // Perfect agreement with two categories in use.
  CHECK(fleiss_kappa({{3, 0}, {0, 3}, {3, 0}}) == doctest::Approx(1.0));
  CHECK(kind_of([] { fleiss_kappa({{3, 0}, {2, 0}}); }) == ErrorKind::UnequalRaterCounts);
  CHECK(kind_of([] { fleiss_kappa({{3, 0}, {3, 0}}); }) == ErrorKind::DegenerateExpectedAgreement);
}

// Reliability data from Krippendorff's "Computing Krippendorff's Alpha-
// Reliability": four coders, twelve units, missing values; nominal 0.743,
// interval 0.849.
TEST_CASE("krippendorff alpha on the classic reliability table") {
  const double nan = std::nan("");
  const double table[4][12] = {
      {1, 2, 3, 3, 2, 1, 4, 1, 2, nan, nan, nan},
      {1, 2, 3, 3, 2, 2, 4, 1, 2, 5, nan, 3},
      {nan, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, nan},
      {1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, nan},
  };
  std::vector<ReliabilityValue> v;
  for (int c = 0; c < 4; ++c)
    for (int u = 0; u < 12; ++u)
      if (!std::isnan(table[c][u])) v.push_back({"u" + std::to_string(u), "c" + std::to_string(c), table[c][u]});
  CHECK(krippendorff_alpha(v, MeasurementLevel::nominal) == doctest::Approx(0.743).epsilon(0.001));
  CHECK(krippendorff_alpha(v, MeasurementLevel::interval) == doctest::Approx(0.849).epsilon(0.001));
}

TEST_CASE("krippendorff alpha needs a pairable unit") {
  const std::vector<ReliabilityValue> v{{"a", "x", 1}, {"b", "x", 2}};
  CHECK(kind_of([&] { krippendorff_alpha(v, MeasurementLevel::nominal); }) == ErrorKind::InsufficientPairs);
}

TEST_CASE("rating aggregation") {
  const std::vector<RatingRecord> r{
      rating("i1", "a", "coverage", 2.0), rating("i1", "b", "coverage", 4.0), rating("i2", "a", "coverage", 5.0),
      rating("i1", "a", "verdict_agreement", "supported"), rating("i1", "b", "verdict_agreement", "refuted"),
      rating("i1", "c", "verdict_agreement", "refuted", true), rating("i2", "a", "verdict_agreement", "refuted"),
      rating("i2", "b", "verdict_agreement", "supported"),
  };
  const auto mean = aggregate_numeric(r, "coverage");
  CHECK(mean.at("i1") == doctest::Approx(3.0));
  CHECK(mean.at("i2") == doctest::Approx(5.0));
  const auto sd = rating_std(r, "coverage");
  CHECK(sd.excluded == 1);
  CHECK(sd.mean_std == doctest::Approx(1.0));
  const auto maj = aggregate_categorical(r, "verdict_agreement");
  CHECK(maj.at("i1") == "refuted");
  CHECK(maj.at("i2") == "refuted");  // tie without a tiebreak: smallest label
}

TEST_CASE("correlation report joins by instance id") {
  std::vector<ScoreRow> scores;
  std::vector<RatingRecord> ratings;
  for (int i = 0; i < 6; ++i) {
    const std::string id = "i" + std::to_string(i);
    scores.push_back({id, "good", double(i)});
    scores.push_back({id, "flat", 0.5});
    ratings.push_back(rating(id, "a", "coverage", 1.0 + (i % 5)));
  }
  scores.push_back({"extra", "good", 9.0});
  DimensionRegistry reg;
  const auto rep = correlate_report(scores, ratings, reg);
  const auto* good = rep.cell("good", "coverage");
  REQUIRE(good);
  CHECK(good->n == 6);
  REQUIRE(good->spearman);
  const auto* flat = rep.cell("flat", "coverage");
  REQUIRE(flat);
  CHECK(!flat->spearman);
  CHECK(!flat->note.empty());
  CHECK(rep.to_json().is_object());
  CHECK(rep.to_table().find("good") != std::string::npos);

  const std::vector<ScoreRow> none{{"zzz", "good", 1.0}};
  CHECK(kind_of([&] { correlate_report(none, ratings, reg); }) == ErrorKind::EmptyJoin);
}

TEST_CASE("agreement report per dimension") {
  std::vector<RatingRecord> r;
  for (int i = 0; i < 4; ++i) {
    const std::string id = "i" + std::to_string(i);
    for (const char* who : {"a", "b"}) {
      r.push_back(rating(id, who, "coverage", double(1 + i)));
      r.push_back(rating(id, who, "verdict_agreement", i % 2 ? "supported" : "refuted"));
    }
  }
  const auto j = agreement_report(r, DimensionRegistry());
  CHECK(j.at("coverage").at("kind") == "numeric");
  CHECK(j.at("verdict_agreement").at("kind") == "categorical");
  CHECK(!agreement_table(j).empty());
}

}  // TEST_SUITE
