// ev2r command-line tool. Data goes to files and stdout, logs to stderr.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ev2r/error.hpp"
#include "ev2r/log.hpp"
#include "ev2r/run.hpp"
#include "ev2r/text.hpp"

namespace {

using namespace ev2r;

struct Shared {
  std::string config;
  std::string dataset;
  std::string format;
  std::string label_space;
  std::string out;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::string scorers;
  std::optional<bool> resume;
  std::string cache_dir;
  bool all_ordered_pairs = false;
  std::optional<std::size_t> workers;
};

void add_shared(CLI::App* app, Shared& s) {
  app->add_option("--config", s.config, "Run configuration (JSON)");
  app->add_option("--dataset", s.dataset, "Dataset path, overrides the config");
  app->add_option("--format", s.format, "averitec-qa | fever-pairs | vitaminc-pairs | generic-jsonl");
  app->add_option("--label-space", s.label_space, "averitec-4 | nli-3");
  app->add_option("--out", s.out, "Output directory");
  app->add_option("--alpha", s.alpha, "Weight of the reference component")->check(CLI::Range(0.0, 1.0));
  app->add_option("--seed", s.seed, "Seed for perturbation suites");
  app->add_option("--scorers", s.scorers, "Comma-separated scorer names");
  app->add_flag("--resume,!--no-resume", s.resume, "Skip instances already in scores.jsonl");
  app->add_option("--cache-dir", s.cache_dir, "Response cache directory (else EV2R_CACHE_DIR)");
  app->add_flag("--all-ordered-pairs", s.all_ordered_pairs, "Pair every ordered pair of evidence sets");
  app->add_option("--workers", s.workers, "Instance-level worker threads");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::optional<ingest::DatasetDescriptor> dataset_from_flags(const Shared& s) {
  if (s.dataset.empty()) return std::nullopt;
  ingest::DatasetDescriptor d;
  d.path = s.dataset;
  d.format = ingest::parse_format(s.format.empty() ? "averitec-qa" : s.format);
  d.label_space = (d.format == ingest::Format::fever_pairs || d.format == ingest::Format::vitaminc_pairs)
                      ? LabelSpaceId::nli3
                      : LabelSpaceId::averitec4;
  if (!s.label_space.empty()) d.label_space = parse_label_space(s.label_space);
  return d;
}

run::RunConfig build_config(const Shared& s) {
  run::RunConfig c = s.config.empty() ? run::RunConfig{} : run::load_config(s.config);
  if (auto d = dataset_from_flags(s)) {
    c.dataset = d;
  } else if (c.dataset) {
    if (!s.format.empty()) c.dataset->format = ingest::parse_format(s.format);
    if (!s.label_space.empty()) c.dataset->label_space = parse_label_space(s.label_space);
  }
  if (!s.out.empty()) c.output_dir = s.out;
  if (s.alpha) c.alpha = *s.alpha;
  if (s.seed) c.seed = *s.seed;
  if (!s.scorers.empty()) {
    c.scorers.clear();
    for (const auto& name : split_list(s.scorers)) c.scorers.push_back(run::parse_scorer(name));
  }
  if (s.resume) c.resume = *s.resume;
  if (!s.cache_dir.empty()) c.cache_dir = s.cache_dir;
  if (s.all_ordered_pairs) c.all_ordered_pairs = true;
  if (s.workers) c.workers = *s.workers;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidence retrieval scoring toolkit"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug | info | warn | error | off");

  Shared shared;
  std::string kinds, suite, scores, ratings;

  auto* score = app.add_subcommand("score", "Score a dataset with the selected scorers");
  add_shared(score, shared);

  auto* perturb_cmd = app.add_subcommand("perturb", "Generate a perturbation suite");
  add_shared(perturb_cmd, shared);
  perturb_cmd->add_option("--kinds", kinds, "Comma-separated perturbation kinds (default: all)");

  auto* robustness = app.add_subcommand("robustness", "Score deltas under a perturbation suite");
  add_shared(robustness, shared);
  robustness->add_option("--suite", suite, "suite.jsonl from the perturb command")->required();

  auto* metaeval = app.add_subcommand("meta-eval", "Correlate scores with human ratings");
  add_shared(metaeval, shared);
  metaeval->add_option("--scores", scores, "scores.jsonl")->required();
  metaeval->add_option("--ratings", ratings, "Ratings JSONL")->required();

  auto* agreement = app.add_subcommand("agreement", "Inter-annotator agreement per dimension");
  add_shared(agreement, shared);
  agreement->add_option("--ratings", ratings, "Ratings JSONL")->required();

  auto* validate = app.add_subcommand("validate", "Check a dataset or ratings file");
  add_shared(validate, shared);
  validate->add_option("--ratings", ratings, "Ratings JSONL");

  CLI11_PARSE(app, argc, argv);

  try {
    if (log_level == "debug") log::set_level(log::Level::debug);
    else if (log_level == "info") log::set_level(log::Level::info);
    else if (log_level == "warn") log::set_level(log::Level::warn);
    else if (log_level == "error") log::set_level(log::Level::error);
    else if (log_level == "off") log::set_level(log::Level::off);
    else throw Error(ErrorKind::Config, "unknown log level " + log_level);

    if (score->parsed()) {
      return run::cmd_score(build_config(shared)).exit_code;
    }
    if (perturb_cmd->parsed()) {
      run::RunConfig c = build_config(shared);
      if (!kinds.empty()) {
        c.perturb_kinds.clear();
        for (const auto& k : split_list(kinds)) c.perturb_kinds.push_back(perturb::parse_kind(k));
      }
      return run::cmd_perturb(c, std::cout);
    }
    if (robustness->parsed()) {
      return run::cmd_robustness(build_config(shared), suite, std::cout);
    }
    if (metaeval->parsed()) {
      const run::RunConfig c = build_config(shared);
      return run::cmd_metaeval(scores, ratings, c.output_dir, std::cout, c.dataset ? &c : nullptr);
    }
    if (agreement->parsed()) {
      return run::cmd_agreement(ratings, build_config(shared).output_dir, std::cout);
    }
    if (validate->parsed()) {
      const run::RunConfig c = build_config(shared);
      std::optional<std::filesystem::path> r;
      if (!ratings.empty()) r = ratings;
      return run::cmd_validate(c.dataset, r, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run::kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run::kExitFailure;
  }
  return run::kExitFailure;
}
