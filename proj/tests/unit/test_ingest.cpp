#include <doctest.h>

#include "ev2r/error.hpp"
#include "ev2r/ingest.hpp"
#include "test_util.hpp"

using namespace ev2r;
using namespace ev2r::ingest;

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

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("qa serialization") {
  const auto e = testing::evidence({{"Who won?", "Ann."}, {"", "Bare sentence."}});
  CHECK(qa_serialize(e) == "Q: Who won?\nA: Ann.\n\nBare sentence.");
  CHECK(qa_serialize(EvidenceSet{}).empty());
}

TEST_CASE("averitec fixture loads") {
  const auto v = load_averitec(testing::data_dir() / "desk20.jsonl");
  REQUIRE(v.size() == 20);
  CHECK(v.front().id() == "d01");
  for (const auto& in : v) {
    CHECK(in.reference_evidence.size() == 2);
    CHECK(!in.retrieved_evidence.empty());
  }
}

TEST_CASE("averitec record variants") {
  testing::TempDir dir("ingest");
  testing::write_text(dir / "a.jsonl",
                      "\xEF\xBB\xBF{\"claim\": \"C1.\", \"label\": \"Refuted\", \"questions\": [{\"question\": \"Q?\", "
                      "\"answers\": [\"plain\", {\"answer\": \"No\", \"boolean_explanation\": \"Because.\", "
                      "\"source_url\": \"http://x\"}, {\"answer\": \"\"}]}], \"pred_label\": \"supported\"}\n"
                      "\n"
                      "{\"id\": 7, \"claim\": \"C2.\", \"label\": \"nee\", \"questions\": []}\n");
  const auto v = load_averitec(dir / "a.jsonl");
  REQUIRE(v.size() == 2);
  CHECK(v[0].id() == "0");
  CHECK(v[0].reference_label.index == 1);
  REQUIRE(v[0].reference_evidence.size() == 2);
  CHECK(v[0].reference_evidence.items[1].answer == "No. Because.");
  CHECK(v[0].reference_evidence.items[1].source_url == std::optional<std::string>("http://x"));
  CHECK(v[0].predicted_label->index == 0);
  CHECK(v[1].id() == "7");
  CHECK(v[1].reference_evidence.empty());
}

TEST_CASE("errors carry path and line") {
  testing::TempDir dir("ingest");
  testing::write_text(dir / "bad.jsonl", "{\"claim\": \"ok\", \"label\": \"supported\", \"questions\": []}\n"
                                         "{\"claim\": \"x\", \"label\": \"probably\", \"questions\": []}\n");
  try {
    load_averitec(dir / "bad.jsonl");
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownLabel);
    CHECK(e.message().find("bad.jsonl:2") != std::string::npos);
  }
  testing::write_text(dir / "junk.jsonl", "{not json\n");
  CHECK(kind_of([&] { load_averitec(dir / "junk.jsonl"); }) == ErrorKind::SchemaViolation);
  CHECK(kind_of([&] { load_averitec(dir / "missing.jsonl"); }) == ErrorKind::Io);
}

TEST_CASE("evidence sets group by claim and pair against the first") {
  testing::TempDir dir("ingest");
  testing::write_text(dir / "f.jsonl",
                      "{\"claim_id\": \"k\", \"claim\": \"X.\", \"evidence\": \"e1\", \"label\": \"SUPPORTS\"}\n"
                      "{\"claim_id\": \"k\", \"claim\": \"X.\", \"evidence\": [\"e2\", \"e2b\"], \"label\": \"REFUTES\"}\n"
                      "{\"claim_id\": \"k\", \"claim\": \"X.\", \"evidence\": [{\"question\": \"q\", \"answer\": \"e3\"}], "
                      "\"label\": \"SUPPORTS\"}\n"
                      "{\"claim\": \"Lonely.\", \"evidence\": \"e\", \"label\": \"NOT ENOUGH INFO\"}\n"
                      "{\"id\": \"g\", \"claim\": \"G.\", \"evidence_sets\": [{\"label\": \"supports\", \"evidence\": \"a\"}, "
                      "{\"label\": \"supports\", \"evidence\": \"b\"}]}\n");
  const auto claims = load_evidence_sets(dir / "f.jsonl");
  REQUIRE(claims.size() == 3);
  CHECK(claims[0].sets.size() == 3);
  const auto def = build_pairs(claims);
  CHECK(def.instances.size() == 3);  // k: 2 pairs, g: 1 pair
  CHECK(def.skipped_single_set == 1);
  CHECK(def.instances[0].id() == "k#0-1");
  CHECK(def.agreement == std::vector<std::uint8_t>{0, 1, 1});
  CHECK(def.instances[0].predicted_label->index == 1);
  const auto all = build_pairs(claims, {true});
  CHECK(all.instances.size() == 3 * 2 + 2);

  DatasetDescriptor d{Format::fever_pairs, dir / "f.jsonl", LabelSpaceId::nli3};
  CHECK(load_dataset(d).size() == 3);
  CHECK(load_dataset(d, {true}).size() == 8);
}

TEST_CASE("ratings and score rows") {
  testing::TempDir dir("ingest");
  testing::write_text(dir / "r.jsonl",
                      "{\"instance_id\": \"a\", \"annotator_id\": 1, \"dimension\": \"coverage\", \"value\": 4}\n"
                      "{\"instance_id\": \"a\", \"annotator_id\": 2, \"dimension\": \"verdict_agreement\", \"value\": "
                      "\"refuted\", \"tiebreak\": true}\n"
                      "{\"instance_id\": \"a\", \"annotator_id\": 2, \"dimension\": \"novelty\", \"value\": 9}\n");
  metaeval::DimensionRegistry reg;
  const auto r = load_ratings(dir / "r.jsonl", reg);
  REQUIRE(r.size() == 3);
  CHECK(r[0].annotator_id == "1");
  CHECK(std::get<double>(r[0].value) == 4.0);
  CHECK(r[1].tiebreak);
  CHECK(reg.find("novelty") != nullptr);

  testing::write_text(dir / "bad.jsonl",
                      "{\"instance_id\": \"a\", \"annotator_id\": 1, \"dimension\": \"coverage\", \"value\": 6}\n");
  CHECK(kind_of([&] { load_ratings(dir / "bad.jsonl", reg); }) == ErrorKind::SchemaViolation);

  testing::write_text(dir / "s.jsonl", "{\"instance_id\": \"a\", \"scorer\": \"bleu\", \"score\": 0.5, \"x\": 1}\n");
  const auto s = load_score_rows(dir / "s.jsonl");
  REQUIRE(s.size() == 1);
  CHECK(s[0].score == 0.5);
}

TEST_CASE("validation reports every bad line") {
  testing::TempDir dir("ingest");
  testing::write_text(dir / "v.jsonl", "{\"claim\": \"A.\", \"label\": \"supported\", \"questions\": []}\n"
                                       "{\"claim\": \"\", \"label\": \"supported\", \"questions\": []}\n"
                                       "nope\n"
                                       "{\"claim\": \"B.\", \"label\": \"refuted\", \"questions\": []}\n");
  const auto rep = validate(DatasetDescriptor{Format::averitec_qa, dir / "v.jsonl", LabelSpaceId::averitec4});
  CHECK(!rep.ok());
  CHECK(rep.errors.size() == 2);
  CHECK(rep.warnings.size() == 2);
  CHECK(validate(DatasetDescriptor{Format::averitec_qa, testing::data_dir() / "desk20.jsonl",
                                   LabelSpaceId::averitec4})
            .ok());
  CHECK(kind_of([] { parse_format("csv"); }) == ErrorKind::Config);
}

}  // TEST_SUITE
