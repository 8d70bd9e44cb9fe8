#include <doctest.h>

#include <cmath>

#include "ev2r/error.hpp"
#include "ev2r/ingest.hpp"
#include "ev2r/proxy_scorer.hpp"
#include "mock_backends.hpp"
#include "stub_server.hpp"
#include "test_util.hpp"

using namespace ev2r;
using namespace ev2r::proxy;

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

ProxyBackendConfig config(const std::string& endpoint = "http://nli.invalid") {
  ProxyBackendConfig c;
  c.endpoint = endpoint;
  return c;
}

EvalInstance sample(std::string id, std::string claim, std::string evidence, std::uint8_t label = 0) {
  return testing::instance(std::move(id), std::move(claim), testing::evidence({{"", "Reference."}}),
                           testing::evidence({{"", std::move(evidence)}}), {LabelSpaceId::averitec4, label});
}

}  // namespace

TEST_SUITE("proxy") {

TEST_CASE("softmax is shift invariant and stable") {
  const std::vector<double> z{1.0, 2.0, 3.0};
  const auto p = softmax(z);
  const double denom = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(p[2] == doctest::Approx(std::exp(3.0) / denom));
  const std::vector<double> big{1001.0, 1002.0, 1003.0};
  const auto q = softmax(big);
  for (std::size_t i = 0; i < 3; ++i) CHECK(q[i] == doctest::Approx(p[i]));
  CHECK(std::isfinite(softmax(std::vector<double>{-1e6, 0.0, 1e6})[0]));
}

TEST_CASE("softmax confidence checks the label space") {
  const LogitVector z{{0.0, 0.0, std::log(2.0)}, LabelSpaceId::nli3};
  CHECK(softmax_confidence(z, {LabelSpaceId::nli3, 2}) == doctest::Approx(0.5));
  CHECK(kind_of([&] { softmax_confidence(z, {LabelSpaceId::averitec4, 0}); }) == ErrorKind::LabelSpaceMismatch);
  const LogitVector wrong{{0.0, 1.0}, LabelSpaceId::nli3};
  CHECK(kind_of([&] { wrong.validate(); }) == ErrorKind::LabelSpaceMismatch);
  const LogitVector nan{{0.0, std::nan(""), 1.0}, LabelSpaceId::nli3};
  CHECK(kind_of([&] { nan.validate(); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("verdict response parsing") {
  const nlohmann::json ok{{"logits", {1.0, 0.0, -1.0}}, {"labels", {"supports", "refutes", "not-enough-info"}},
                          {"label_space", "nli-3"}, {"model_id", "m1"}, {"truncated", true}};
  const auto r = parse_verdict_response(ok, LabelSpaceId::nli3);
  CHECK(r.logits.values == std::vector<double>{1.0, 0.0, -1.0});
  CHECK(r.model_id == "m1");
  CHECK(r.truncated);

  auto reordered = ok;
  reordered["labels"] = {"refutes", "supports", "not-enough-info"};
  CHECK(kind_of([&] { parse_verdict_response(reordered, LabelSpaceId::nli3); }) == ErrorKind::LabelSpaceMismatch);
  auto other_space = ok;
  other_space["label_space"] = "averitec-4";
  CHECK(kind_of([&] { parse_verdict_response(other_space, LabelSpaceId::nli3); }) == ErrorKind::LabelSpaceMismatch);

  const nlohmann::json probs{{"probabilities", {0.2, 0.3, 0.5}}};
  const auto p = parse_verdict_response(probs, LabelSpaceId::nli3);
  CHECK(softmax_confidence(p.logits, {LabelSpaceId::nli3, 2}) == doctest::Approx(0.5));

  CHECK(kind_of([] { parse_verdict_response(nlohmann::json{{"label", "x"}}, LabelSpaceId::nli3); }) ==
        ErrorKind::MalformedResponse);
}

TEST_CASE("scores use the mapped reference label") {
  auto backends = std::make_shared<testing::MockBackends>();
  backends->options().logits = [](const std::string&, const std::string&) {
    return std::vector<double>{0.0, 0.0, std::log(2.0)};
  };
  ProxyScorer s(config(), std::make_shared<testing::MockTransport>(backends), std::make_shared<llm::ResponseCache>());
  // conflicting/cherrypicking maps to not-enough-info by default.
  CHECK(s.score_proxy(sample("a", "Claim.", "Text.", 3)) == doctest::Approx(0.5));
  CHECK(s.score_proxy(sample("b", "Claim.", "Text.", 0)) == doctest::Approx(0.25));
  CHECK(s.model_id() == "mock-nli-1");

  ProxyScorer over(config(), std::make_shared<testing::MockTransport>(backends), std::make_shared<llm::ResponseCache>(),
                   LabelMapping::from_json({{"averitec-4->nli-3", {{"conflicting-evidence/cherrypicking", "supports"}}}}));
  CHECK(over.score_proxy(sample("c", "Claim.", "Text.", 3)) == doctest::Approx(0.25));
}

TEST_CASE("batch results equal single calls, in order") {
  auto backends = std::make_shared<testing::MockBackends>();
  auto c = config();
  c.batch_size = 3;
  ProxyScorer s(c, std::make_shared<testing::MockTransport>(backends), std::make_shared<llm::ResponseCache>());
  std::vector<EvalInstance> items;
  for (int i = 0; i < 7; ++i) {
    items.push_back(sample("i" + std::to_string(i), "The tax rose by " + std::to_string(i) + " points.",
                           i % 2 ? "The tax rose." : "Rain fell in " + std::to_string(i) + " towns."));
  }
  const auto batch = s.verdict_batch(items);
  CHECK(backends->calls("/v1/verdict/batch") == 3);
  REQUIRE(batch.size() == items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto one = s.verdict(items[i].claim, items[i].retrieved_evidence);
    CHECK(one.logits.values == batch[i].logits.values);
  }
}

TEST_CASE("long evidence is cut at the tail and flagged") {
  auto backends = std::make_shared<testing::MockBackends>();
  auto c = config();
  c.max_evidence_chars = 40;
  ProxyScorer s(c, std::make_shared<testing::MockTransport>(backends), std::make_shared<llm::ResponseCache>());
  const auto r = s.verdict({"x", "A claim that stays whole.", {}, {}},
                           testing::evidence({{"", std::string(200, 'a')}}));
  CHECK(r.truncated);
  CHECK(s.truncated() == 1);
  const auto short_r = s.verdict({"y", "Claim.", {}, {}}, testing::evidence({{"", "short"}}));
  CHECK(!short_r.truncated);
}

TEST_CASE("responses are cached by request") {
  auto backends = std::make_shared<testing::MockBackends>();
  ProxyScorer s(config(), std::make_shared<testing::MockTransport>(backends), std::make_shared<llm::ResponseCache>());
  const auto in = sample("a", "Claim.", "Evidence.");
  s.score_proxy(in);
  s.score_proxy(in);
  CHECK(backends->calls("/v1/verdict") == 1);
}

TEST_CASE("empty retrieved evidence is rejected") {
  auto backends = std::make_shared<testing::MockBackends>();
  ProxyScorer s(config(), std::make_shared<testing::MockTransport>(backends), std::make_shared<llm::ResponseCache>());
  auto in = sample("a", "Claim.", "x");
  in.retrieved_evidence.items.clear();
  CHECK(kind_of([&] { s.score_proxy(in); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("config validation and json") {
  auto c = config();
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(config("").validate(), Error);
  const auto j = to_json(config());
  CHECK(proxy_config_from_json(j).endpoint == "http://nli.invalid");
}

TEST_CASE("sidecar over http: health, verdicts and errors") {
  auto backends = std::make_shared<testing::MockBackends>();
  testing::StubServer server(backends);
  auto c = config(server.url());
  c.max_retries = 1;
  ProxyScorer s(c, nullptr, std::make_shared<llm::ResponseCache>());

  const auto h = s.health();
  CHECK(h.at("status") == "ok");

  const auto in = sample("a", "Voters approved the school budget.", "Voters approved the school budget.");
  const double high = s.score_proxy(in);
  CHECK(high > 0.5);

  std::vector<EvalInstance> items{in, sample("b", "Another claim.", "Unrelated text.")};
  const auto batch = s.verdict_batch(items);
  CHECK(batch.size() == 2);

  // 422 from the sidecar is a client error: no retry.
  auto bad = config(server.url());
  bad.label_space = LabelSpaceId::averitec4;
  ProxyScorer wrong(bad, nullptr, std::make_shared<llm::ResponseCache>());
  backends->reset_counts();
  CHECK(kind_of([&] { wrong.verdict(in.claim, in.retrieved_evidence); }) == ErrorKind::MalformedResponse);
  CHECK(backends->calls("/v1/verdict") == 1);
  CHECK(kind_of([&] { wrong.health(); }) == ErrorKind::LabelSpaceMismatch);

  // One 503 is retried.
  backends->fail_next("/v1/verdict", 503, 1);
  const auto again = s.verdict({"z", "Fresh claim.", {}, {}}, testing::evidence({{"", "Fresh evidence."}}));
  CHECK(again.logits.values.size() == 3);

  // Persistent 500 surfaces as a transport failure.
  backends->fail_next("/v1/verdict", 500, 5);
  CHECK(kind_of([&] { s.verdict({"w", "Other claim.", {}, {}}, testing::evidence({{"", "More."}})); }) ==
        ErrorKind::Transport);
}

TEST_CASE("llm proxy uses log-probs, else elicits a confidence") {
  auto backends = std::make_shared<testing::MockBackends>();
  llm::BackendConfig jc;
  jc.endpoint = "http://judge.invalid/v1/chat/completions";
  jc.model = "judge";
  jc.token_env = "";
  llm::Backend judge(jc, std::make_shared<testing::MockTransport>(backends), std::make_shared<llm::ResponseCache>());
  LlmProxyScorer s(judge);
  const auto in = sample("a", "The budget passed.", "The budget passed.", 0);
  const auto r = s.score(in);
  CHECK(r.mode == "logprob");
  CHECK(r.score == doctest::Approx(0.7));

  backends->options().logprobs = false;
  const auto e = s.score(sample("b", "The budget passed.", "The budget passed today.", 0));
  CHECK(e.mode == "elicited");
  CHECK(e.score >= 0.0);
  CHECK(e.score <= 1.0);
}

}  // TEST_SUITE
