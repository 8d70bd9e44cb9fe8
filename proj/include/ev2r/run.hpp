#pragma once

// Batch runs behind the command-line tool: configuration, scorer wiring,
// resumable scoring with persisted reports, perturbation suites, robustness
// tables and meta-evaluation. Each cmd_* returns the process exit code.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ev2r/core.hpp"
#include "ev2r/ingest.hpp"
#include "ev2r/llm_backend.hpp"
#include "ev2r/perturb.hpp"
#include "ev2r/proxy_scorer.hpp"

namespace ev2r::run {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // config or I/O error, nothing trustworthy written
inline constexpr int kExitPartial = 2;   // some instances failed, the rest were written

enum class ScorerId {
  ev2r,
  ref_based_only,
  proxy_only,
  ref_less,
  llm_proxy,
  rouge_l,
  bleu,
  meteor,
  h_meteor,
  external_sim,
};

std::string_view to_string(ScorerId id);
ScorerId parse_scorer(std::string_view name);
bool needs_judge(ScorerId id);
bool needs_proxy(ScorerId id);
bool needs_similarity(ScorerId id);

struct RunConfig {
  std::optional<ingest::DatasetDescriptor> dataset;
  std::vector<ScorerId> scorers;
  double alpha = kDefaultAlpha;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "ev2r-out";
  std::optional<std::filesystem::path> cache_dir;
  std::optional<llm::BackendConfig> judge;
  std::optional<proxy::ProxyBackendConfig> proxy;
  std::optional<llm::BackendConfig> similarity;
  nlohmann::json label_map = nlohmann::json::object();
  std::vector<perturb::Kind> perturb_kinds = perturb::all_kinds();
  std::map<perturb::Kind, double> perturb_intensity;
  bool all_ordered_pairs = false;
  bool resume = true;
  std::size_t workers = 0;  // 0: judge concurrency, or hardware threads

  // Throws Config when a selected scorer lacks its backend, alpha is out
  // of range, or no scorer is selected.
  void validate() const;
};

// Relative paths resolve against base_dir. "${VAR}" is expanded from the
// environment in secret fields only ("token", "*_token", "api_key").
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Every run parameter, secrets excluded; hashed into the report.
nlohmann::json effective_config(const RunConfig& c);
std::string config_hash(const RunConfig& c);

// Test seam: transports used instead of real HTTP.
struct Injected {
  std::shared_ptr<llm::Transport> judge_transport;
  std::shared_ptr<llm::Transport> proxy_transport;
  std::shared_ptr<llm::Transport> similarity_transport;
};

struct ScoreOutcome {
  int exit_code = kExitOk;
  std::size_t instances = 0;
  std::size_t resumed = 0;      // instances skipped because all their rows existed
  std::size_t failures = 0;     // failed (instance, scorer) rows
  std::size_t network_calls = 0;
  std::filesystem::path report_path;
  std::filesystem::path scores_path;
};

// Writes <out>/scores.jsonl (one row per instance x scorer, dataset order)
// and <out>/report.json. Errors in single instances are recorded and the
// run continues.
ScoreOutcome cmd_score(const RunConfig& config, const Injected& injected = {});

// Writes <out>/suite.jsonl and <out>/manifest.jsonl.
int cmd_perturb(const RunConfig& config, std::ostream& out);

// Scores the original and perturbed evidence of every suite row with the
// configured scorers; writes <out>/robustness.json and robustness.txt.
int cmd_robustness(const RunConfig& config, const std::filesystem::path& suite_path,
                   std::ostream& out, const Injected& injected = {});

// Correlation of score rows with human ratings; writes
// <out>/correlation.json and prints the table. Verdict-type ratings are
// compared with reference labels from the configured dataset when given.
int cmd_metaeval(const std::filesystem::path& scores_path, const std::filesystem::path& ratings_path,
                 const std::filesystem::path& out_dir, std::ostream& out,
                 const RunConfig* config = nullptr);

// Fleiss kappa, Krippendorff alpha and rating std per dimension; writes
// <out>/agreement.json and prints the table.
int cmd_agreement(const std::filesystem::path& ratings_path, const std::filesystem::path& out_dir,
                  std::ostream& out);

// Checks a dataset (and optionally a ratings file) without scoring.
int cmd_validate(const std::optional<ingest::DatasetDescriptor>& dataset,
                 const std::optional<std::filesystem::path>& ratings, std::ostream& out);

// Report JSON with the started_at/finished_at fields removed; two runs on
// the same inputs must agree on this byte for byte.
std::string report_without_timestamps(const std::filesystem::path& report_path);

}  // namespace ev2r::run
