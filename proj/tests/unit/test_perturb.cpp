#include <doctest.h>

#include "ev2r/error.hpp"
#include "ev2r/ingest.hpp"
#include "ev2r/perturb.hpp"
#include "perturb_invariants.hpp"
#include "test_util.hpp"

using namespace ev2r;
using namespace ev2r::perturb;

namespace {

std::vector<EvalInstance> random_instances(std::uint64_t seed, std::size_t n) {
  SeededRng rng(seed);
  std::vector<EvalInstance> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(testing::instance("r" + std::to_string(i), testing::random_sentence(rng),
                                    testing::random_evidence(rng), testing::random_evidence(rng)));
  }
  return out;
}

}  // namespace

TEST_SUITE("perturb") {

TEST_CASE("kind registry") {
  CHECK(all_kinds().size() == 12);
  for (Kind k : all_kinds()) CHECK(parse_kind(to_string(k)) == k);
  CHECK(semantics_class(Kind::completeness) == SemanticsClass::altering);
  CHECK(semantics_class(Kind::random_shuffle) == SemanticsClass::altering);
  CHECK(semantics_class(Kind::noise) == SemanticsClass::preserving);
  CHECK(expected_direction(Kind::completeness) == ExpectedDirection::score_should_drop);
  CHECK(default_intensity(Kind::completeness) == 0.5);
  CHECK(default_intensity(Kind::fluency_typos) == 0.1);
  CHECK(default_intensity(Kind::inv_synonyms) == 0.3);
  CHECK(default_intensity(Kind::redundancy_words) == 0.2);
  CHECK_THROWS_AS(parse_kind("shuffle_everything"), Error);
}

TEST_CASE("number words") {
  CHECK(number_to_words(0) == "zero");
  CHECK(number_to_words(53) == "fifty-three");
  CHECK(number_to_words(1204) == "one thousand two hundred four");
  CHECK(number_to_words(7000000) == "seven million");
  CHECK(numbers_to_words("It rose 9 points, to 53.") == "It rose nine points, to fifty-three.");
  CHECK(numbers_to_words("costs $5 or 3.5 units") == "costs $5 or 3.5 units");
  CHECK(words_to_numbers("Fifty-three people and one thousand two hundred four votes.") ==
        "53 people and 1204 votes.");
  SeededRng rng(1);
  for (int i = 0; i < 300; ++i) {
    const std::uint64_t v = rng.below(1'000'000'000'000ULL);
    REQUIRE(words_to_numbers(number_to_words(v)) == std::to_string(v));
  }
}

TEST_CASE("contractions round trip") {
  CHECK(contract("We are sure it is not what they did not say.") == "We're sure it's not what they didn't say.");
  CHECK(expand_contractions("We're sure it's fine, don't worry.") == "We are sure it is fine, do not worry.");
}

TEST_CASE("generators are pure functions of evidence and spec") {
  SeededRng rng(77);
  const auto instances = random_instances(3, 10);
  const auto corpus = NoiseCorpus::from_instances(instances);
  for (Kind k : all_kinds()) {
    for (int t = 0; t < 20; ++t) {
      const auto e = testing::random_evidence(rng);
      PerturbationSpec spec{k, rng.next(), 0.0, &corpus, "self"};
      try {
        const auto a = apply(e, spec);
        const auto b = apply(e, spec);
        CHECK(a.items == b.items);
      } catch (const Error& err) {
        CHECK((err.kind() == ErrorKind::TooShort || err.kind() == ErrorKind::NoNoiseCandidate));
      }
    }
  }
}

TEST_CASE("invariants hold on random inputs") {
  SeededRng rng(2025);
  const auto instances = random_instances(8, 12);
  const auto corpus = NoiseCorpus::from_instances(instances);
  for (Kind k : all_kinds()) {
    CAPTURE(to_string(k));
    for (int t = 0; t < 60; ++t) {
      const auto e = testing::random_evidence(rng);
      PerturbationSpec spec{k, rng.next(), 0.0, &corpus, "self"};
      if (k == Kind::completeness && unit_count(e) < 2) {
        CHECK_THROWS_AS(apply(e, spec), Error);
        continue;
      }
      const auto p = apply(e, spec);
      const auto bad = testing::check_invariant(k, e, p, &corpus, "self");
      CHECK_MESSAGE(!bad, (bad ? *bad : std::string()));
    }
  }
}

TEST_CASE("completeness never empties and rejects single units") {
  const auto two = testing::evidence({{"", "First point."}, {"", "Second point."}});
  const auto out = completeness_drop(two, {Kind::completeness, 1, 1.0});
  CHECK(out.items.size() == 1);
  const auto one = testing::evidence({{"", "Only one sentence here."}});
  try {
    completeness_drop(one, {Kind::completeness, 1, 0.5});
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooShort);
  }
}

TEST_CASE("noise never uses the instance's own text") {
  NoiseCorpus corpus;
  corpus.sentences.push_back({"self", "This is my own sentence."});
  const auto e = testing::evidence({{"", "Some evidence text."}});
  PerturbationSpec spec{Kind::noise, 3, 0.0, &corpus, "self"};
  CHECK_THROWS_AS(noise_insert(e, spec, corpus), Error);
  corpus.sentences.push_back({"other", "A sentence from elsewhere."});
  const auto out = noise_insert(e, spec, corpus);
  REQUIRE(out.items.size() == 2);
  CHECK((out.items[0].answer == "A sentence from elsewhere." || out.items[1].answer == "A sentence from elsewhere."));
}

TEST_CASE("suite: parallel equals serial and seeds are stable") {
  const auto instances = ingest::load_averitec(testing::data_dir() / "desk20.jsonl");
  SuiteOptions opt;
  opt.seed = 42;
  std::vector<std::string> skipped_a, skipped_b;
  const auto a = generate_suite(instances, opt, &skipped_a);
  const auto b = serial::generate_suite(instances, opt, &skipped_b);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(suite_row(a[i]) == suite_row(b[i]));
  CHECK(skipped_a == skipped_b);
  CHECK(a.size() + skipped_a.size() == instances.size() * all_kinds().size());
  CHECK(derive_seed(42, "d01", Kind::noise) == derive_seed(42, "d01", Kind::noise));
  CHECK(derive_seed(42, "d01", Kind::noise) != derive_seed(43, "d01", Kind::noise));
  CHECK(derive_seed(42, "d01", Kind::noise) != derive_seed(42, "d01", Kind::completeness));

  // JSON round trip keeps the perturbed evidence and spec.
  const auto back = suite_row_from_json(suite_row(a.front()), LabelSpaceId::averitec4);
  CHECK(back.perturbed.items == a.front().perturbed.items);
  CHECK(back.spec.seed == a.front().spec.seed);
  CHECK(manifest_row(a.front()).contains("kind"));
}

TEST_CASE("robustness deltas are relative percentages") {
  PerturbedInstance p;
  p.suite_id = "x/completeness";
  p.original = testing::instance("x", "Claim.", testing::evidence({{"", "A."}}),
                                 testing::evidence({{"", "A."}, {"", "B."}}));
  p.perturbed = testing::evidence({{"", "A."}});
  p.spec.kind = Kind::completeness;
  const std::vector<PerturbedInstance> suite{p};
  const Scorer by_size = [](const EvalInstance& in) { return 0.25 * double(in.retrieved_evidence.size()); };
  const auto r = robustness_report("size", by_size, suite);
  const auto* kd = r.find(Kind::completeness);
  REQUIRE(kd);
  CHECK(kd->n == 1);
  CHECK(kd->mean_delta_pct == doctest::Approx(-50.0));
  CHECK(r.class_average.at(SemanticsClass::altering) == doctest::Approx(-50.0));

  const Scorer zero = [](const EvalInstance&) { return 0.0; };
  const auto z = robustness_report("zero", zero, suite);
  CHECK(z.find(Kind::completeness)->skipped == 1);
  const std::vector<RobustnessReport> reports{r, z};
  CHECK(robustness_table(reports).find("completeness") != std::string::npos);
}

}  // TEST_SUITE
