#include <array>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <sstream>

#include "ev2r/error.hpp"
#include "ev2r/log.hpp"
#include "ev2r/perturb.hpp"
#include "ev2r/rng.hpp"

namespace ev2r::perturb {
namespace {

struct KindInfo {
  Kind kind;
  std::string_view name;
  SemanticsClass cls;
  double intensity;
};

constexpr std::array<KindInfo, 12> kKinds = {{
    {Kind::completeness, "completeness", SemanticsClass::altering, 0.5},
    {Kind::random_shuffle, "random_shuffle", SemanticsClass::altering, 0.0},
    {Kind::fluency_typos, "fluency_typos", SemanticsClass::preserving, 0.1},
    {Kind::fluency_stopwords, "fluency_stopwords", SemanticsClass::preserving, 0.0},
    {Kind::inv_num2text, "inv_num2text", SemanticsClass::preserving, 0.0},
    {Kind::inv_text2num, "inv_text2num", SemanticsClass::preserving, 0.0},
    {Kind::inv_synonyms, "inv_synonyms", SemanticsClass::preserving, 0.3},
    {Kind::inv_contractions, "inv_contractions", SemanticsClass::preserving, 0.0},
    {Kind::noise, "noise", SemanticsClass::preserving, 0.0},
    {Kind::redundancy_sent, "redundancy_sent", SemanticsClass::preserving, 0.0},
    {Kind::redundancy_words, "redundancy_words", SemanticsClass::preserving, 0.2},
    {Kind::argument_structure, "argument_structure", SemanticsClass::preserving, 0.0},
}};

const KindInfo& info(Kind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown perturbation kind");
}

struct Task {
  std::size_t instance;
  Kind kind;
};

struct Outcome {
  std::optional<PerturbedInstance> result;
  std::string skipped;
};

Outcome run_task(const EvalInstance& inst, Kind kind, const SuiteOptions& options,
                 const NoiseCorpus& corpus) {
  PerturbedInstance p;
  p.suite_id = inst.id() + "/" + std::string(to_string(kind));
  p.original = inst;
  if (p.original.retrieved_evidence.empty()) {
    p.original.retrieved_evidence = inst.reference_evidence;
    p.original.retrieved_evidence.provenance = Provenance::retrieved;
  }
  p.spec.kind = kind;
  p.spec.seed = derive_seed(options.seed, inst.id(), kind);
  auto it = options.intensity.find(kind);
  p.spec.intensity = it != options.intensity.end() ? it->second : default_intensity(kind);
  if (kind == Kind::noise) {
    p.spec.corpus = &corpus;
    p.spec.exclude_source = inst.id();
  }
  p.expected_direction = expected_direction(kind);
  try {
    p.perturbed = apply(p.original.retrieved_evidence, p.spec);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::TooShort || e.kind() == ErrorKind::NoNoiseCandidate) {
      return {std::nullopt, p.suite_id + ": " + e.what()};
    }
    throw;
  }
  // The corpus pointer is not meaningful outside this call.
  p.spec.corpus = nullptr;
  return {std::move(p), {}};
}

std::vector<Task> tasks_for(std::span<const EvalInstance> instances, const SuiteOptions& options) {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (Kind k : options.kinds) tasks.push_back({i, k});
  }
  return tasks;
}

std::vector<PerturbedInstance> collect(std::vector<Outcome>& outcomes,
                                       std::vector<std::string>* skipped) {
  std::vector<PerturbedInstance> suite;
  for (auto& o : outcomes) {
    if (o.result) suite.push_back(std::move(*o.result));
    else if (skipped) skipped->push_back(std::move(o.skipped));
  }
  return suite;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f", v);
  return buf;
}

}  // namespace

const std::vector<Kind>& all_kinds() {
  static const std::vector<Kind> kinds = [] {
    std::vector<Kind> v;
    for (const auto& k : kKinds) v.push_back(k.kind);
    return v;
  }();
  return kinds;
}

std::string_view to_string(Kind kind) { return info(kind).name; }

std::string_view to_string(SemanticsClass cls) {
  return cls == SemanticsClass::altering ? "altering" : "preserving";
}

std::string_view to_string(ExpectedDirection direction) {
  return direction == ExpectedDirection::score_should_drop ? "score_should_drop"
                                                           : "score_should_hold";
}

Kind parse_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown perturbation kind '" + std::string(name) + "'");
}

SemanticsClass semantics_class(Kind kind) { return info(kind).cls; }

ExpectedDirection expected_direction(Kind kind) {
  return semantics_class(kind) == SemanticsClass::altering ? ExpectedDirection::score_should_drop
                                                           : ExpectedDirection::score_should_hold;
}

double default_intensity(Kind kind) { return info(kind).intensity; }

std::uint64_t derive_seed(std::uint64_t suite_seed, std::string_view instance_id, Kind kind) {
  const auto k = static_cast<std::uint64_t>(kind) + 1;
  return splitmix64(splitmix64(suite_seed) ^ stable_hash(instance_id) ^ (k * 0x9E3779B97F4A7C15ULL));
}

std::vector<PerturbedInstance> generate_suite(std::span<const EvalInstance> instances,
                                              const SuiteOptions& options,
                                              std::vector<std::string>* skipped) {
  const NoiseCorpus corpus = NoiseCorpus::from_instances(instances);
  const auto tasks = tasks_for(instances, options);
  std::vector<Outcome> outcomes(tasks.size());
  const auto n = static_cast<std::ptrdiff_t>(tasks.size());
  std::optional<Error> failure;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    try {
      outcomes[static_cast<std::size_t>(i)] = run_task(instances[t.instance], t.kind, options, corpus);
    } catch (const Error& e) {
#pragma omp critical(ev2r_suite_failure)
      if (!failure) failure = e;
    }
  }
  if (failure) throw *failure;
  return collect(outcomes, skipped);
}

namespace serial {
std::vector<PerturbedInstance> generate_suite(std::span<const EvalInstance> instances,
                                              const SuiteOptions& options,
                                              std::vector<std::string>* skipped) {
  const NoiseCorpus corpus = NoiseCorpus::from_instances(instances);
  std::vector<Outcome> outcomes;
  for (const Task& t : tasks_for(instances, options)) {
    outcomes.push_back(run_task(instances[t.instance], t.kind, options, corpus));
  }
  return collect(outcomes, skipped);
}
}  // namespace serial

nlohmann::json manifest_row(const PerturbedInstance& p) {
  const EvidenceSet& before = p.original.retrieved_evidence;
  return {{"suite_id", p.suite_id},
          {"instance_id", p.original.id()},
          {"kind", to_string(p.spec.kind)},
          {"semantics_class", to_string(semantics_class(p.spec.kind))},
          {"expected_direction", to_string(p.expected_direction)},
          {"seed", p.spec.seed},
          {"intensity", p.spec.intensity},
          {"units_before", unit_count(before)},
          {"units_after", unit_count(p.perturbed)},
          {"tokens_before", token_count(before)},
          {"tokens_after", token_count(p.perturbed)}};
}

nlohmann::json suite_row(const PerturbedInstance& p) {
  nlohmann::json j = manifest_row(p);
  j["original"] = instance_to_json(p.original);
  j["perturbed_evidence"] = evidence_to_json(p.perturbed);
  return j;
}

PerturbedInstance suite_row_from_json(const nlohmann::json& j, LabelSpaceId space) {
  try {
    PerturbedInstance p;
    p.suite_id = j.at("suite_id").get<std::string>();
    p.original = instance_from_json(j.at("original"), space);
    p.perturbed = evidence_from_json(j.at("perturbed_evidence"), Provenance::retrieved);
    p.spec.kind = parse_kind(j.at("kind").get<std::string>());
    p.spec.seed = j.at("seed").get<std::uint64_t>();
    p.spec.intensity = j.value("intensity", 0.0);
    p.expected_direction = expected_direction(p.spec.kind);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("suite row: ") + e.what());
  }
}

const KindDelta* RobustnessReport::find(Kind kind) const {
  for (const auto& k : kinds) {
    if (k.kind == kind) return &k;
  }
  return nullptr;
}

nlohmann::json RobustnessReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& k : kinds) {
    rows.push_back({{"kind", to_string(k.kind)},
                    {"semantics_class", to_string(semantics_class(k.kind))},
                    {"mean_delta_pct", k.n ? nlohmann::json(k.mean_delta_pct) : nlohmann::json()},
                    {"n", k.n},
                    {"skipped", k.skipped}});
  }
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [cls, v] : class_average) classes[std::string(to_string(cls))] = v;
  return {{"scorer", scorer}, {"kinds", rows}, {"class_average", classes}};
}

RobustnessReport robustness_report(std::string scorer_name, const Scorer& scorer,
                                   std::span<const PerturbedInstance> suite) {
  RobustnessReport report;
  report.scorer = std::move(scorer_name);

  std::map<std::string, std::optional<double>> original_scores;
  std::map<Kind, std::pair<double, KindDelta>> acc;
  for (const auto& p : suite) {
    auto& [sum, kd] = acc[p.spec.kind];
    kd.kind = p.spec.kind;

    auto it = original_scores.find(p.original.id());
    if (it == original_scores.end()) {
      std::optional<double> s;
      try {
        s = scorer(p.original);
      } catch (const Error& e) {
        log::warn("scoring " + p.original.id() + " failed: " + e.what());
      }
      it = original_scores.emplace(p.original.id(), s).first;
    }
    if (!it->second || *it->second == 0.0) {
      ++kd.skipped;
      continue;
    }
    EvalInstance perturbed = p.original;
    perturbed.retrieved_evidence = p.perturbed;
    double after = 0.0;
    try {
      after = scorer(perturbed);
    } catch (const Error& e) {
      log::warn("scoring " + p.suite_id + " failed: " + e.what());
      ++kd.skipped;
      continue;
    }
    sum += (after - *it->second) / *it->second * 100.0;
    ++kd.n;
  }

  std::map<SemanticsClass, std::pair<double, std::size_t>> cls;
  for (Kind k : all_kinds()) {
    auto it = acc.find(k);
    if (it == acc.end()) continue;
    KindDelta kd = it->second.second;
    if (kd.n > 0) {
      kd.mean_delta_pct = it->second.first / static_cast<double>(kd.n);
      auto& c = cls[semantics_class(k)];
      c.first += kd.mean_delta_pct;
      ++c.second;
    }
    report.kinds.push_back(kd);
  }
  for (const auto& [c, v] : cls) report.class_average[c] = v.first / static_cast<double>(v.second);
  return report;
}

std::string robustness_table(std::span<const RobustnessReport> reports) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"perturbation"};
  for (const auto& r : reports) header.push_back(r.scorer);
  rows.push_back(header);

  for (SemanticsClass cls : {SemanticsClass::altering, SemanticsClass::preserving}) {
    for (Kind k : all_kinds()) {
      if (semantics_class(k) != cls) continue;
      std::vector<std::string> row{std::string(to_string(k))};
      bool any = false;
      for (const auto& r : reports) {
        const KindDelta* kd = r.find(k);
        if (kd && kd->n > 0) {
          row.push_back(pct(kd->mean_delta_pct));
          any = true;
        } else {
          row.push_back("-");
        }
      }
      if (any) rows.push_back(std::move(row));
    }
    std::vector<std::string> avg{"avg " + std::string(to_string(cls))};
    for (const auto& r : reports) {
      auto it = r.class_average.find(cls);
      avg.push_back(it != r.class_average.end() ? pct(it->second) : "-");
    }
    rows.push_back(std::move(avg));
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      if (i) out << "  ";
      if (i == 0) out << std::left << std::setw(static_cast<int>(width[i])) << rows[r][i];
      else out << std::right << std::setw(static_cast<int>(width[i])) << rows[r][i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace ev2r::perturb
