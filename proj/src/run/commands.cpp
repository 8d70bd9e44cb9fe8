#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "ev2r/baselines.hpp"
#include "ev2r/error.hpp"
#include "ev2r/log.hpp"
#include "ev2r/metaeval.hpp"
#include "ev2r/run.hpp"
#include "scorer_set.hpp"

namespace ev2r::run {
namespace {

namespace fs = std::filesystem;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

// Whole-file replace through a temporary so readers never see half a file.
void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string jsonl(const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

// The only writer of an append-mode JSONL file; workers hand rows over.
class RowWriter {
 public:
  RowWriter(const fs::path& path, bool append)
      : out_(path, append ? std::ios::app | std::ios::binary : std::ios::trunc | std::ios::binary) {
    if (!out_) throw Error(ErrorKind::Io, "cannot open " + path.string());
  }

  void write(const nlohmann::json& row) {
    std::lock_guard lock(mutex_);
    out_ << row.dump() << '\n';
    out_.flush();
  }

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

std::vector<EvalInstance> load_instances(const RunConfig& c) {
  if (!c.dataset) throw Error(ErrorKind::Config, "no dataset configured");
  ingest::PairOptions opts;
  opts.all_ordered_pairs = c.all_ordered_pairs;
  return ingest::load_dataset(*c.dataset, opts);
}

using RowKey = std::pair<std::string, std::string>;  // instance id, scorer

std::map<RowKey, nlohmann::json> read_previous_rows(const fs::path& path) {
  std::map<RowKey, nlohmann::json> rows;
  if (!fs::exists(path)) return rows;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    // A torn last line from an interrupted run is expected; anything else
    // is only worth a warning since the instance is simply rescored.
    if (j.is_discarded() || !j.is_object() || !j.contains("instance_id") || !j.contains("scorer")) {
      log::warn(path.string() + ":" + std::to_string(n) + ": unreadable row ignored");
      continue;
    }
    if (!j["score"].is_number()) continue;  // failures are retried
    RowKey key{j["instance_id"].get<std::string>(), j["scorer"].get<std::string>()};
    rows[std::move(key)] = std::move(j);
  }
  return rows;
}

nlohmann::json failure_row(const std::string& id, ScorerId s, const Error& e) {
  return {{"instance_id", id},
          {"scorer", to_string(s)},
          {"score", nullptr},
          {"error", {{"kind", to_string(e.kind())}, {"message", e.message()}}}};
}

std::size_t worker_count(const RunConfig& c, std::size_t tasks) {
  std::size_t n = c.workers;
  if (n == 0) {
    n = c.judge ? c.judge->max_concurrency : std::max(1u, std::thread::hardware_concurrency());
  }
  return std::max<std::size_t>(1, std::min(n, tasks));
}

// Metadata that depends on what was scored is read back from the rows, so
// a resumed run reports the same thing as the run that did the work.
nlohmann::json build_report(const RunConfig& c, const std::vector<EvalInstance>& instances,
                            const std::vector<nlohmann::json>& rows, const std::string& started) {
  nlohmann::json meta;
  meta["config_hash"] = config_hash(c);
  meta["config"] = effective_config(c);
  meta["run"] = {{"output_dir", c.output_dir.generic_string()}, {"resume", c.resume}};
  meta["dataset"] = {{"instances", instances.size()}};
  if (c.dataset) {
    meta["dataset"]["path"] = c.dataset->path.generic_string();
    meta["dataset"]["format"] = ingest::to_string(c.dataset->format);
    meta["dataset"]["label_space"] = label_space(c.dataset->label_space).name;
  }
  nlohmann::json models = nlohmann::json::object();
  if (c.judge) models["judge"] = c.judge->model;
  if (c.similarity) models["similarity"] = c.similarity->model;
  nlohmann::json templates = nlohmann::json::object();
  for (ScorerId s : c.scorers) {
    const auto t = ScorerSet::templates(s);
    if (!t.empty()) templates[std::string(to_string(s))] = t;
  }
  meta["templates"] = templates;
  meta["label_map_version"] = LabelMapping::from_json(c.label_map).version();
  meta["meteor_variant"] = baselines::kMeteorVariant;

  std::map<std::string, std::size_t> proxy_modes;
  std::set<std::string> proxy_models;
  std::set<std::string> truncated;
  struct Agg {
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t failed = 0;
  };
  std::map<std::string, Agg> agg;
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& r : rows) {
    const std::string scorer = r["scorer"].get<std::string>();
    Agg& a = agg[scorer];
    if (!r["score"].is_number()) {
      ++a.failed;
      failures.push_back({{"instance_id", r["instance_id"]},
                          {"scorer", scorer},
                          {"kind", r["error"]["kind"]},
                          {"message", r["error"]["message"]}});
      continue;
    }
    a.sum += r["score"].get<double>();
    ++a.n;
    if (!r.contains("details")) continue;
    const auto& d = r["details"];
    if (d.contains("proxy_mode")) ++proxy_modes[d["proxy_mode"].get<std::string>()];
    if (d.contains("proxy_model") && !d["proxy_model"].get<std::string>().empty()) {
      proxy_models.insert(d["proxy_model"].get<std::string>());
    }
    if (d.value("evidence_truncated", false)) truncated.insert(r["instance_id"].get<std::string>());
  }
  if (!proxy_models.empty()) models["proxy"] = proxy_models;
  meta["models"] = models;
  meta["proxy_mode"] = proxy_modes;
  meta["started_at"] = started;
  meta["finished_at"] = utc_now();

  nlohmann::json aggregates = nlohmann::json::object();
  for (ScorerId s : c.scorers) {
    const Agg& a = agg[std::string(to_string(s))];
    aggregates[std::string(to_string(s))] = {
        {"mean", a.n ? nlohmann::json(a.sum / static_cast<double>(a.n)) : nlohmann::json(nullptr)},
        {"n", a.n},
        {"failures", a.failed}};
  }
  return {{"metadata", meta},
          {"aggregates", aggregates},
          {"failures", failures},
          {"evidence_truncated", truncated.size()}};
}

}  // namespace

ScoreOutcome cmd_score(const RunConfig& config, const Injected& injected) {
  config.validate();
  ScorerSet scorers(config, injected);
  scorers.require_auth();
  const std::vector<EvalInstance> instances = load_instances(config);
  const std::string started = utc_now();

  ensure_dir(config.output_dir);
  ScoreOutcome outcome;
  outcome.instances = instances.size();
  outcome.scores_path = config.output_dir / "scores.jsonl";
  outcome.report_path = config.output_dir / "report.json";

  std::map<RowKey, nlohmann::json> previous;
  if (config.resume) previous = read_previous_rows(outcome.scores_path);

  // rows[i][k]: instance i, k-th selected scorer.
  const std::size_t k_count = config.scorers.size();
  std::vector<std::vector<nlohmann::json>> rows(instances.size(), std::vector<nlohmann::json>(k_count));
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    bool complete = true;
    for (std::size_t k = 0; k < k_count; ++k) {
      auto it = previous.find({instances[i].id(), std::string(to_string(config.scorers[k]))});
      if (it != previous.end()) {
        rows[i][k] = it->second;
      } else {
        complete = false;
      }
    }
    if (complete) {
      ++outcome.resumed;
    } else {
      todo.push_back(i);
    }
  }
  if (outcome.resumed > 0) log::info("resuming: " + std::to_string(outcome.resumed) + " instances already scored");

  {
    RowWriter writer(outcome.scores_path, config.resume);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    auto work = [&] {
      for (std::size_t t = next++; t < todo.size(); t = next++) {
        const std::size_t i = todo[t];
        const EvalInstance& inst = instances[i];
        for (std::size_t k = 0; k < k_count; ++k) {
          if (!rows[i][k].is_null()) continue;
          const ScorerId s = config.scorers[k];
          nlohmann::json row;
          try {
            ScoreResult r = scorers.score(s, inst);
            row = {{"instance_id", inst.id()}, {"scorer", to_string(s)}, {"score", r.score}};
            if (!r.details.is_null()) row["details"] = std::move(r.details);
          } catch (const Error& e) {
            log::warn("instance " + inst.id() + ", " + std::string(to_string(s)) + ": " + e.what());
            row = failure_row(inst.id(), s, e);
          } catch (const std::exception& e) {
            log::error("instance " + inst.id() + ", " + std::string(to_string(s)) + ": " + e.what());
            row = failure_row(inst.id(), s, Error(ErrorKind::InvalidArgument, e.what()));
          }
          writer.write(row);
          rows[i][k] = std::move(row);
        }
        const std::size_t d = ++done;
        if (d % 50 == 0 || d == todo.size()) {
          log::info("scored " + std::to_string(d) + "/" + std::to_string(todo.size()));
        }
      }
    };
    const std::size_t n_workers = worker_count(config, todo.size());
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(work);
    work();
  }

  // Final file in dataset order, regardless of completion order.
  std::vector<nlohmann::json> ordered;
  ordered.reserve(instances.size() * k_count);
  for (auto& per_instance : rows) {
    for (auto& r : per_instance) {
      if (!r["score"].is_number()) ++outcome.failures;
      ordered.push_back(std::move(r));
    }
  }
  write_file(outcome.scores_path, jsonl(ordered));
  write_file(outcome.report_path, build_report(config, instances, ordered, started).dump(2) + "\n");

  outcome.network_calls = scorers.network_calls();
  outcome.exit_code = outcome.failures > 0 ? kExitPartial : kExitOk;
  log::info("wrote " + outcome.scores_path.string() + " and " + outcome.report_path.string() + " (" +
            std::to_string(outcome.failures) + " failed rows, " + std::to_string(outcome.network_calls) +
            " backend calls)");
  return outcome;
}

int cmd_perturb(const RunConfig& config, std::ostream& out) {
  const std::vector<EvalInstance> instances = load_instances(config);
  perturb::SuiteOptions opts;
  opts.kinds = config.perturb_kinds;
  opts.seed = config.seed;
  opts.intensity = config.perturb_intensity;
  std::vector<std::string> skipped;
  const auto suite = perturb::generate_suite(instances, opts, &skipped);

  ensure_dir(config.output_dir);
  std::vector<nlohmann::json> suite_rows, manifest_rows;
  std::map<perturb::Kind, std::size_t> per_kind;
  for (const auto& p : suite) {
    suite_rows.push_back(perturb::suite_row(p));
    manifest_rows.push_back(perturb::manifest_row(p));
    ++per_kind[p.spec.kind];
  }
  write_file(config.output_dir / "suite.jsonl", jsonl(suite_rows));
  write_file(config.output_dir / "manifest.jsonl", jsonl(manifest_rows));
  for (const auto& s : skipped) log::info("skipped " + s);

  out << std::left << std::setw(22) << "kind" << "generated\n";
  for (perturb::Kind k : opts.kinds) {
    out << std::setw(22) << perturb::to_string(k) << per_kind[k] << "\n";
  }
  out << std::setw(22) << "skipped" << skipped.size() << "\n";
  return kExitOk;
}

int cmd_robustness(const RunConfig& config, const fs::path& suite_path, std::ostream& out,
                   const Injected& injected) {
  config.validate();
  ScorerSet scorers(config, injected);
  scorers.require_auth();
  const LabelSpaceId space = config.dataset ? config.dataset->label_space : LabelSpaceId::averitec4;
  std::vector<perturb::PerturbedInstance> suite;
  ingest::stream_jsonl(suite_path, [&](const nlohmann::json& j, std::size_t) {
    suite.push_back(perturb::suite_row_from_json(j, space));
  });
  if (suite.empty()) throw Error(ErrorKind::Io, suite_path.string() + " holds no suite rows");

  std::vector<perturb::RobustnessReport> reports;
  for (ScorerId s : config.scorers) {
    auto fn = [&scorers, s](const EvalInstance& inst) { return scorers.score(s, inst).score; };
    reports.push_back(perturb::robustness_report(std::string(to_string(s)), fn, suite));
  }

  nlohmann::json j;
  j["suite"] = suite_path.generic_string();
  j["rows"] = suite.size();
  j["scorers"] = nlohmann::json::array();
  for (const auto& r : reports) j["scorers"].push_back(r.to_json());
  const std::string table = perturb::robustness_table(reports);
  ensure_dir(config.output_dir);
  write_file(config.output_dir / "robustness.json", j.dump(2) + "\n");
  write_file(config.output_dir / "robustness.txt", table);
  out << table;
  return kExitOk;
}

int cmd_metaeval(const fs::path& scores_path, const fs::path& ratings_path, const fs::path& out_dir,
                 std::ostream& out, const RunConfig* config) {
  metaeval::DimensionRegistry registry;
  const auto ratings = ingest::load_ratings(ratings_path, registry);
  const auto scores = ingest::load_score_rows(scores_path);

  std::map<std::string, VerdictLabel> labels;
  metaeval::CorrelateOptions opts;
  if (config != nullptr && config->dataset) {
    for (const auto& inst : load_instances(*config)) labels[inst.id()] = inst.reference_label;
    opts.reference_labels = &labels;
  }
  const metaeval::CorrelationReport report = metaeval::correlate_report(scores, ratings, registry, opts);
  ensure_dir(out_dir);
  write_file(out_dir / "correlation.json", report.to_json().dump(2) + "\n");
  const std::string table = report.to_table();
  write_file(out_dir / "correlation.txt", table);
  out << table;
  return kExitOk;
}

int cmd_agreement(const fs::path& ratings_path, const fs::path& out_dir, std::ostream& out) {
  metaeval::DimensionRegistry registry;
  const auto ratings = ingest::load_ratings(ratings_path, registry);
  const nlohmann::json report = metaeval::agreement_report(ratings, registry);
  ensure_dir(out_dir);
  write_file(out_dir / "agreement.json", report.dump(2) + "\n");
  const std::string table = metaeval::agreement_table(report);
  write_file(out_dir / "agreement.txt", table);
  out << table;
  return kExitOk;
}

int cmd_validate(const std::optional<ingest::DatasetDescriptor>& dataset,
                 const std::optional<fs::path>& ratings, std::ostream& out) {
  bool ok = true;
  if (dataset) {
    const ingest::ValidationReport r = ingest::validate(*dataset);
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
    for (const auto& e : r.errors) out << "error: " << e << "\n";
    out << dataset->path.generic_string() << ": " << r.records << " records, " << r.errors.size()
        << " errors, " << r.warnings.size() << " warnings\n";
    ok = ok && r.ok();
  }
  if (ratings) {
    metaeval::DimensionRegistry registry;
    try {
      const auto records = ingest::load_ratings(*ratings, registry);
      out << ratings->generic_string() << ": " << records.size() << " ratings\n";
    } catch (const Error& e) {
      out << "error: " << e.message() << "\n";
      ok = false;
    }
  }
  if (!dataset && !ratings) throw Error(ErrorKind::Config, "nothing to validate");
  return ok ? kExitOk : kExitFailure;
}

std::string report_without_timestamps(const fs::path& report_path) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + report_path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::SchemaViolation, report_path.string() + " is not JSON");
  if (j.contains("metadata")) {
    j["metadata"].erase("started_at");
    j["metadata"].erase("finished_at");
  }
  return j.dump(2);
}

}  // namespace ev2r::run
