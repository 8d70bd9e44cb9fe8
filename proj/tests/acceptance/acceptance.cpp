// Acceptance checks. One [PASS]/[FAIL] line per criterion; exit status is
// the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ev2r/baselines.hpp"
#include "ev2r/core.hpp"
#include "ev2r/error.hpp"
#include "ev2r/ingest.hpp"
#include "ev2r/log.hpp"
#include "ev2r/metaeval.hpp"
#include "ev2r/perturb.hpp"
#include "ev2r/proxy_scorer.hpp"
#include "ev2r/reference_scorer.hpp"
#include "ev2r/rng.hpp"
#include "ev2r/run.hpp"
#include "mock_backends.hpp"
#include "perturb_invariants.hpp"
#include "run_fixture.hpp"
#include "test_util.hpp"

using namespace ev2r;
using Failure = std::optional<std::string>;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

std::vector<EvalInstance> desk20() {
  return ingest::load_dataset({ingest::Format::averitec_qa, testing::data_dir() / "desk20.jsonl",
                               LabelSpaceId::averitec4});
}

// --- 1 ------------------------------------------------------------------

Failure formula_properties() {
  const auto t0 = Clock::now();
  SeededRng rng(101);
  constexpr int kCases = 1000;
  for (int i = 0; i < kCases; ++i) {
    const double p = (i % 17 == 0) ? 0.0 : rng.uniform();
    const double r = (i % 19 == 0) ? 0.0 : rng.uniform();
    const double f = f1_from_prec_recall(p, r);
    const double want = (p + r == 0.0) ? 0.0 : 2.0 * p * r / (p + r);
    if (std::abs(f - want) > 1e-12) return "f1(" + fmt(p) + ", " + fmt(r) + ") = " + fmt(f);
    if (f != f1_from_prec_recall(r, p)) return std::string("f1 not symmetric");
    if (f < std::min(p, r) - 1e-12 || f > std::max(p, r) + 1e-12) return std::string("f1 outside [min, max]");
  }
  if (f1_from_prec_recall(0.0, 0.0) != 0.0) return std::string("f1(0, 0) != 0");

  for (int i = 0; i < kCases; ++i) {
    const double f = rng.uniform(), x = rng.uniform();
    const double a = (i == 0) ? 0.0 : (i == 1) ? 1.0 : rng.uniform();
    const double s = weighted_score(f, x, a);
    if (s < std::min(f, x) - 1e-12 || s > std::max(f, x) + 1e-12) return "weighted score out of range at alpha " + fmt(a);
    if (std::abs(s - (a * f + (1 - a) * x)) > 1e-12) return std::string("weighted score is not the convex mix");
    if (weighted_score(f, x, 1.0) != f || weighted_score(f, x, 0.0) != x) return std::string("alpha endpoints");
    const double p = rng.uniform(), r = rng.uniform();
    const Ev2RScore c = combine_scores(p, r, x, a, {});
    if (std::abs(c.s_final - weighted_score(f1_from_prec_recall(p, r), x, a)) > 1e-12)
      return std::string("combine_scores disagrees with its parts");
  }

  for (int i = 0; i < kCases; ++i) {
    std::vector<double> z(2 + rng.below(4));
    for (double& v : z) v = (rng.uniform() - 0.5) * (i % 10 == 0 ? 2000.0 : 20.0);
    const auto s = proxy::softmax(z);
    const double sum = std::accumulate(s.begin(), s.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12) return "softmax sums to " + fmt(sum);
    for (double v : s)
      if (!(v >= 0.0 && v <= 1.0)) return std::string("softmax value outside [0, 1]");
    auto shifted = z;
    for (double& v : shifted) v += 37.5;
    const auto s2 = proxy::softmax(shifted);
    for (std::size_t k = 0; k < s.size(); ++k)
      if (std::abs(s[k] - s2[k]) > 1e-12) return std::string("softmax not shift invariant");
    if (std::max_element(s.begin(), s.end()) - s.begin() != std::max_element(z.begin(), z.end()) - z.begin())
      return std::string("softmax argmax moved");
  }
  const double took = seconds_since(t0);
  if (took >= 5.0) return "took " + fmt(took) + " s";
  return std::nullopt;
}

// --- 2 ------------------------------------------------------------------

double brute_assignment(const baselines::CostMatrix& m) {
  const std::size_t n = std::max(m.rows(), m.cols());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double c = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t col = perm[r];
      c += (r < m.rows() && col < m.cols()) ? m(r, col) : baselines::kPaddingCost;
    }
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::size_t quadratic_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
  return t[a.size()][b.size()];
}

std::vector<double> ranks_oracle(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1) / 2.0;
  }
  return r;
}

double pearson_plain(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Failure oracles() {
  SeededRng rng(202);
  for (int t = 0; t < 200; ++t) {
    baselines::CostMatrix m(1 + rng.below(6), 1 + rng.below(6));
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform();
    const double got = baselines::hungarian_assign(m).total_cost;
    const double want = brute_assignment(m);
    if (std::abs(got - want) > 1e-9) return "assignment cost " + fmt(got) + " vs brute force " + fmt(want);
  }

  static const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f"};
  for (int t = 0; t < 200; ++t) {
    TokenSequence c, r;
    for (std::size_t i = 1 + rng.below(15); i > 0; --i) c.tokens.push_back(vocab[rng.below(vocab.size())]);
    for (std::size_t i = 1 + rng.below(15); i > 0; --i) r.tokens.push_back(vocab[rng.below(vocab.size())]);
    const double l = double(quadratic_lcs(c.tokens, r.tokens));
    const double p = l / double(c.size()), q = l / double(r.size());
    const double want = l == 0 ? 0.0 : 2 * p * q / (p + q);
    const double got = baselines::rouge_l(c, r);
    if (std::abs(got - want) > 1e-12) return "rouge-l " + fmt(got) + " vs " + fmt(want);
  }

  for (std::size_t n = 3; n <= 8; ++n) {
    for (int t = 0; t < 5; ++t) {
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = double(rng.below(t < 2 ? 100 : 4));  // later rounds carry ties
        y[i] = double(rng.below(t < 2 ? 100 : 4));
      }
      const auto rx = ranks_oracle(x);
      auto ry = ranks_oracle(y);
      if (std::all_of(rx.begin(), rx.end(), [&](double v) { return v == rx[0]; }) ||
          std::all_of(ry.begin(), ry.end(), [&](double v) { return v == ry[0]; }))
        continue;
      const double rho = pearson_plain(rx, ry);
      std::sort(ry.begin(), ry.end());
      std::size_t extreme = 0, total = 0;
      do {
        ++total;
        if (std::abs(pearson_plain(rx, ry)) >= std::abs(rho) - 1e-9) ++extreme;
      } while (std::next_permutation(ry.begin(), ry.end()));
      // Distinct arrangements of tied ranks each stand for the same number
      // of permutations, so counting them gives the same share.
      const double want_p = double(extreme) / double(total);
      const auto got = metaeval::spearman(x, y);
      if (got.method != metaeval::PValueMethod::exact_permutation) return std::string("spearman did not enumerate");
      if (std::abs(got.coefficient - rho) > 1e-12) return "spearman rho " + fmt(got.coefficient) + " vs " + fmt(rho);
      if (std::abs(got.p_value - want_p) > 1e-12)
        return "exact p at n=" + std::to_string(n) + ": " + fmt(got.p_value) + " vs " + fmt(want_p);
    }
  }
  return std::nullopt;
}

// --- 3 ------------------------------------------------------------------

// Coincidence matrix built by hand from the pairable values of each unit.
double krippendorff_oracle(const std::vector<metaeval::ReliabilityValue>& values, bool interval) {
  std::map<std::string, std::vector<double>> units;
  for (const auto& v : values) units[v.unit].push_back(v.value);
  std::map<std::pair<double, double>, double> o;
  std::map<double, double> nc;
  double n = 0;
  for (const auto& [u, vs] : units) {
    const double m = double(vs.size());
    if (vs.size() < 2) continue;
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (std::size_t j = 0; j < vs.size(); ++j)
        if (i != j) o[{vs[i], vs[j]}] += 1.0 / (m - 1);
  }
  for (const auto& [ck, w] : o) {
    nc[ck.first] += w;
    n += w;
  }
  auto delta = [&](double c, double k) { return interval ? (c - k) * (c - k) : (c == k ? 0.0 : 1.0); };
  double d_o = 0, d_e = 0;
  for (const auto& [ck, w] : o) d_o += w * delta(ck.first, ck.second);
  for (const auto& [c, a] : nc)
    for (const auto& [k, b] : nc) d_e += a * b * delta(c, k);
  d_o /= n;
  d_e /= n * (n - 1);
  return 1.0 - d_o / d_e;
}

std::vector<metaeval::ReliabilityValue> table(const std::vector<std::vector<double>>& by_annotator) {
  std::vector<metaeval::ReliabilityValue> out;
  for (std::size_t a = 0; a < by_annotator.size(); ++a)
    for (std::size_t u = 0; u < by_annotator[a].size(); ++u)
      if (!std::isnan(by_annotator[a][u]))
        out.push_back({"u" + std::to_string(u), "a" + std::to_string(a), by_annotator[a][u]});
  return out;
}

Failure agreement() {
  const std::vector<std::vector<std::size_t>> fleiss{
      {0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0}, {2, 2, 8, 1, 1},
      {7, 7, 0, 0, 0},  {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2}, {6, 5, 2, 1, 0}, {0, 2, 2, 3, 7}};
  const double k = metaeval::fleiss_kappa(fleiss);
  if (std::abs(k - 0.210) > 0.005) return "fleiss kappa " + fmt(k);

  const auto unanimous = table({{1, 2, 3, 1, 4}, {1, 2, 3, 1, 4}, {1, 2, 3, 1, 4}});
  for (auto level : {metaeval::MeasurementLevel::nominal, metaeval::MeasurementLevel::interval}) {
    const double a = metaeval::krippendorff_alpha(unanimous, level);
    if (std::abs(a - 1.0) > 1e-12) return "alpha on unanimous data " + fmt(a);
  }

  const double na = std::nan("");
  const std::vector<std::vector<std::vector<double>>> fixtures{
      {{1, 2, 3, 3, 2, 1, 4, 1, 2, na, na, na},
       {1, 2, 3, 3, 2, 2, 4, 1, 2, 5, na, 3},
       {na, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, na},
       {1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, na}},
      {{2, 1, 1, 2, 3, 3}, {2, 1, 2, 2, 3, 1}},
      {{1, 4, 2, 5, na, 3, 1}, {2, 4, 2, 4, 5, na, 1}, {1, 5, 3, 5, 5, 3, na}}};
  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    const auto values = table(fixtures[f]);
    for (bool interval : {false, true}) {
      const double got = metaeval::krippendorff_alpha(
          values, interval ? metaeval::MeasurementLevel::interval : metaeval::MeasurementLevel::nominal);
      const double want = krippendorff_oracle(values, interval);
      if (std::abs(got - want) > 1e-6)
        return "alpha fixture " + std::to_string(f) + (interval ? " interval " : " nominal ") + fmt(got) +
               " vs " + fmt(want);
    }
  }
  return std::nullopt;
}

// --- 4 ------------------------------------------------------------------

// The mock judge's rule restated: facts are the answer sentences, a fact is
// supported when it appears verbatim in the other side's serialized text.
std::vector<std::string> answer_sentences(const EvidenceSet& e) {
  std::vector<std::string> out;
  for (const auto& qa : e.items) {
    std::size_t pos = 0;
    while (pos < qa.answer.size()) {
      std::size_t end = qa.answer.find(". ", pos);
      if (end == std::string::npos) end = qa.answer.size() - 1;
      out.push_back(qa.answer.substr(pos, end + 1 - pos));
      pos = end + 2;
    }
  }
  return out;
}

double supported_share(const EvidenceSet& side, const EvidenceSet& other, std::size_t* n_facts) {
  const auto facts = answer_sentences(side);
  const std::string against = ingest::qa_serialize(other);
  std::size_t ok = 0;
  for (const auto& f : facts) ok += against.find(f) != std::string::npos;
  *n_facts = facts.size();
  return facts.empty() ? 0.0 : double(ok) / double(facts.size());
}

llm::BackendConfig judge_config() {
  llm::BackendConfig c;
  c.endpoint = "http://judge.test/v1/chat/completions";
  c.model = "mock-judge";
  c.token_env = "";
  return c;
}

Failure mock_judge_end_to_end() {
  auto backends = std::make_shared<testing::MockBackends>();
  auto transport = std::make_shared<testing::MockTransport>(backends);
  llm::Backend judge(judge_config(), transport, std::make_shared<llm::ResponseCache>());
  reference::ReferenceScorer scorer(judge);

  SeededRng rng(404);
  for (int i = 0; i < 50; ++i) {
    const EvidenceSet retrieved = testing::random_evidence(rng);
    EvidenceSet reference = testing::random_evidence(rng);
    for (auto& qa : reference.items)
      if (rng.below(2)) qa.answer = retrieved.items[rng.below(retrieved.items.size())].answer;
    const auto inst = testing::instance("s" + std::to_string(i), testing::random_sentence(rng), reference, retrieved);
    const auto got = scorer.score_reference_based(inst);
    std::size_t n_ret = 0, n_ref = 0;
    const double prec = supported_share(retrieved, reference, &n_ret);
    const double rec = supported_share(reference, retrieved, &n_ref);
    const double f1 = (prec + rec == 0) ? 0.0 : 2 * prec * rec / (prec + rec);
    if (got.s_prec != prec || got.s_recall != rec || std::abs(got.s_f1 - f1) > 1e-15)
      return "instance " + std::to_string(i) + ": (" + fmt(got.s_prec) + ", " + fmt(got.s_recall) + ") vs (" +
             fmt(prec) + ", " + fmt(rec) + ")";
    if (got.counts.retrieved_facts != n_ret || got.counts.reference_facts != n_ref)
      return "fact counts differ at instance " + std::to_string(i);
  }

  const EvidenceSet same = testing::random_evidence(rng);
  const auto twin = testing::instance("twin", "The council cut the budget.", same, same);
  const auto s = scorer.score_reference_based(twin);
  if (s.s_prec != 1.0 || s.s_recall != 1.0 || s.s_f1 != 1.0)
    return "identical evidence gives (" + fmt(s.s_prec) + ", " + fmt(s.s_recall) + ", " + fmt(s.s_f1) + ")";

  backends->options().logits = [](const std::string&, const std::string&) {
    return std::vector<double>{60.0, 0.0, 0.0};
  };
  proxy::ProxyBackendConfig pc;
  pc.endpoint = "http://nli.test";
  proxy::ProxyScorer px(pc, transport, std::make_shared<llm::ResponseCache>());
  const double p = px.score_from(px.verdict(twin.claim, twin.retrieved_evidence), twin);
  const Ev2RScore final_score = combine_scores(s.s_prec, s.s_recall, p, 0.5, s.counts);
  if (final_score.s_final != 1.0) return "one-hot proxy at alpha 0.5 gives " + fmt(final_score.s_final);
  return std::nullopt;
}

// --- 5 ------------------------------------------------------------------

Failure perturbation_determinism_and_invariants() {
  const auto instances = desk20();
  perturb::SuiteOptions opts;
  opts.seed = 42;
  std::vector<std::string> runs;
  for (int r = 0; r < 3; ++r) {
    std::string dump;
    for (const auto& p : perturb::generate_suite(instances, opts)) dump += perturb::suite_row(p).dump() + "\n";
    runs.push_back(std::move(dump));
  }
  if (runs[0].empty()) return std::string("empty suite");
  if (runs[0] != runs[1] || runs[0] != runs[2]) return std::string("suite differs between runs");

  SeededRng rng(505);
  std::vector<EvalInstance> pool;
  for (int i = 0; i < 16; ++i)
    pool.push_back(testing::instance("p" + std::to_string(i), testing::random_sentence(rng),
                                     testing::random_evidence(rng), testing::random_evidence(rng)));
  const auto corpus = perturb::NoiseCorpus::from_instances(pool);
  for (perturb::Kind k : perturb::all_kinds()) {
    int checked = 0;
    while (checked < 500) {
      const EvidenceSet e = testing::random_evidence(rng);
      if (k == perturb::Kind::completeness && perturb::unit_count(e) < 2) continue;
      const perturb::PerturbationSpec spec{k, rng.next(), perturb::default_intensity(k), &corpus, "self"};
      const EvidenceSet p = perturb::apply(e, spec);
      if (perturb::apply(e, spec).items != p.items) return std::string(perturb::to_string(k)) + ": same seed, different output";
      if (auto bad = testing::check_invariant(k, e, p, &corpus, "self"))
        return std::string(perturb::to_string(k)) + ": " + *bad;
      ++checked;
    }
  }
  return std::nullopt;
}

// --- 6 ------------------------------------------------------------------

Failure lexical_sensitivity() {
  const auto t0 = Clock::now();
  const auto instances = desk20();
  perturb::SuiteOptions opts;
  opts.seed = 42;
  const auto suite = perturb::generate_suite(instances, opts);
  using M = double (*)(const EvidenceSet&, const EvidenceSet&);
  const std::vector<std::pair<std::string, M>> metrics{
      {"rouge-l", &baselines::rouge_l}, {"bleu", &baselines::bleu},
      {"meteor", &baselines::meteor},   {"h-meteor", &baselines::hungarian_meteor}};
  std::map<std::string, perturb::RobustnessReport> reports;
  for (const auto& [name, m] : metrics) {
    auto fn = [m](const EvalInstance& i) { return m(i.retrieved_evidence, i.reference_evidence); };
    reports.emplace(name, perturb::robustness_report(name, fn, suite));
  }
  for (const auto& [name, rep] : reports) {
    for (perturb::Kind k : {perturb::Kind::completeness, perturb::Kind::random_shuffle}) {
      const auto* d = rep.find(k);
      if (!d || d->n == 0) return name + ": no rows for " + std::string(perturb::to_string(k));
      if (!(d->mean_delta_pct < 0.0))
        return name + " " + std::string(perturb::to_string(k)) + " delta " + fmt(d->mean_delta_pct) + "%";
    }
  }
  const double bleu = reports.at("bleu").find(perturb::Kind::random_shuffle)->mean_delta_pct;
  const double meteor = reports.at("meteor").find(perturb::Kind::random_shuffle)->mean_delta_pct;
  if (!(bleu < meteor)) return "shuffle: bleu " + fmt(bleu) + "% vs meteor " + fmt(meteor) + "%";
  const double took = seconds_since(t0);
  if (took >= 30.0) return "took " + fmt(took) + " s";
  return std::nullopt;
}

// --- 7 ------------------------------------------------------------------

Failure reference_component_invariance() {
  testing::MockOptions mo;
  mo.containment = testing::Containment::normalized;
  auto backends = std::make_shared<testing::MockBackends>(mo);
  llm::Backend judge(judge_config(), std::make_shared<testing::MockTransport>(backends),
                     std::make_shared<llm::ResponseCache>());
  reference::ReferenceScorer scorer(judge);

  auto instances = desk20();
  for (auto& inst : instances) {
    inst.retrieved_evidence = inst.reference_evidence;
    inst.retrieved_evidence.provenance = Provenance::retrieved;
  }
  perturb::SuiteOptions opts;
  opts.seed = 42;
  opts.kinds = {perturb::Kind::inv_contractions, perturb::Kind::inv_text2num, perturb::Kind::argument_structure};
  const auto suite = perturb::generate_suite(instances, opts);
  auto fn = [&scorer](const EvalInstance& i) { return scorer.score_reference_based(i).s_f1; };
  const auto rep = perturb::robustness_report("ref-f1", fn, suite);
  for (perturb::Kind k : opts.kinds) {
    const auto* d = rep.find(k);
    if (!d || d->n == 0) return "no rows for " + std::string(perturb::to_string(k));
    if (!(std::abs(d->mean_delta_pct) < 2.0))
      return std::string(perturb::to_string(k)) + " delta " + fmt(d->mean_delta_pct) + "%";
  }
  return std::nullopt;
}

// --- 8 ------------------------------------------------------------------

Failure warm_cache_rerun() {
  testing::TempDir dir("acceptance-rerun");
  auto backends = std::make_shared<testing::MockBackends>();
  auto cfg = testing::mock_run_config(dir / "out", {run::ScorerId::ev2r, run::ScorerId::meteor});
  cfg.cache_dir = dir / "cache";
  cfg.resume = false;
  const auto first = run::cmd_score(cfg, testing::inject(backends));
  if (first.exit_code != run::kExitOk) return "first run exit " + std::to_string(first.exit_code);
  if (first.network_calls == 0) return std::string("first run made no backend calls");
  const std::string a = run::report_without_timestamps(first.report_path);
  const std::string scores_a = testing::read_text(first.scores_path);

  backends->reset_counts();
  const auto second = run::cmd_score(cfg, testing::inject(backends));
  if (second.network_calls != 0 || backends->total_calls() != 0)
    return "second run made " + std::to_string(backends->total_calls()) + " backend calls";
  if (run::report_without_timestamps(second.report_path) != a) return std::string("reports differ");
  if (testing::read_text(second.scores_path) != scores_a) return std::string("scores differ");
  return std::nullopt;
}

}  // namespace

int main() {
  log::set_level(log::Level::error);
  const std::vector<std::pair<std::string, std::function<Failure()>>> checks{
      {"1 formula properties", formula_properties},
      {"2 assignment, LCS and exact permutation oracles", oracles},
      {"3 agreement statistics", agreement},
      {"4 mock judge end to end", mock_judge_end_to_end},
      {"5 perturbation determinism and invariants", perturbation_determinism_and_invariants},
      {"6 lexical baselines on altering perturbations", lexical_sensitivity},
      {"7 reference component under meaning-preserving edits", reference_component_invariance},
      {"8 warm-cache rerun is byte-identical", warm_cache_rerun},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    Failure f;
    try {
      f = check();
    } catch (const std::exception& e) {
      f = std::string("exception: ") + e.what();
    }
    if (f) {
      ++failed;
      std::cout << "[FAIL] " << name << ": " << *f << "\n";
    } else {
      std::cout << "[PASS] " << name << "\n";
    }
  }
  return failed;
}
