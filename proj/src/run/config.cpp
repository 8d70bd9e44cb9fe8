#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include "ev2r/error.hpp"
#include "ev2r/log.hpp"
#include "ev2r/run.hpp"

namespace ev2r::run {
namespace {

struct ScorerName {
  ScorerId id;
  std::string_view name;
};

constexpr ScorerName kScorers[] = {
    {ScorerId::ev2r, "ev2r"},
    {ScorerId::ref_based_only, "ref-based-only"},
    {ScorerId::proxy_only, "proxy-only"},
    {ScorerId::ref_less, "ref-less"},
    {ScorerId::llm_proxy, "llm-proxy"},
    {ScorerId::rouge_l, "rouge-l"},
    {ScorerId::bleu, "bleu"},
    {ScorerId::meteor, "meteor"},
    {ScorerId::h_meteor, "h-meteor"},
    {ScorerId::external_sim, "external-sim"},
};

bool is_secret_key(std::string_view key) {
  return key == "token" || key == "api_key" ||
         (key.size() > 6 && key.substr(key.size() - 6) == "_token");
}

// ${NAME} -> getenv(NAME). Only secret fields may use it so that every
// parameter that changes results is visible in the file itself.
std::string expand_env(const std::string& value, std::string_view key) {
  static const std::regex var(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");
  std::string out;
  auto begin = std::sregex_iterator(value.begin(), value.end(), var);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(value, last, static_cast<std::size_t>(m.position(0)) - last);
    const std::string name = m[1].str();
    const char* v = std::getenv(name.c_str());
    if (v == nullptr || *v == '\0') {
      throw Error(ErrorKind::AuthMissing,
                  "environment variable " + name + " referenced by '" + std::string(key) + "' is not set");
    }
    out += v;
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(value, last);
  return out;
}

void interpolate(nlohmann::json& j, const std::string& path) {
  if (j.is_object()) {
    for (auto& [key, value] : j.items()) {
      const std::string child = path.empty() ? key : path + "." + key;
      if (value.is_string() && value.get<std::string>().find("${") != std::string::npos) {
        if (!is_secret_key(key)) {
          throw Error(ErrorKind::Config, "'" + child +
                                             "': environment interpolation is only allowed in secret fields");
        }
        value = expand_env(value.get<std::string>(), child);
      } else {
        interpolate(value, child);
      }
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) interpolate(j[i], path + "[" + std::to_string(i) + "]");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

LabelSpaceId default_space(ingest::Format f) {
  return (f == ingest::Format::fever_pairs || f == ingest::Format::vitaminc_pairs) ? LabelSpaceId::nli3
                                                                                  : LabelSpaceId::averitec4;
}

}  // namespace

std::string_view to_string(ScorerId id) {
  for (const auto& s : kScorers) {
    if (s.id == id) return s.name;
  }
  return "?";
}

ScorerId parse_scorer(std::string_view name) {
  for (const auto& s : kScorers) {
    if (s.name == name) return s.id;
  }
  std::string known;
  for (const auto& s : kScorers) known += (known.empty() ? "" : ", ") + std::string(s.name);
  throw Error(ErrorKind::Config, "unknown scorer '" + std::string(name) + "' (known: " + known + ")");
}

bool needs_judge(ScorerId id) {
  return id == ScorerId::ev2r || id == ScorerId::ref_based_only || id == ScorerId::ref_less ||
         id == ScorerId::llm_proxy;
}
bool needs_proxy(ScorerId id) { return id == ScorerId::ev2r || id == ScorerId::proxy_only; }
bool needs_similarity(ScorerId id) { return id == ScorerId::external_sim; }

void RunConfig::validate() const {
  if (scorers.empty()) throw Error(ErrorKind::Config, "no scorer selected");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Config, "alpha must lie in [0, 1]");
  for (ScorerId s : scorers) {
    if (needs_judge(s) && !judge) {
      throw Error(ErrorKind::Config, "scorer " + std::string(to_string(s)) + " needs a 'judge' backend");
    }
    if (needs_proxy(s) && !proxy) {
      throw Error(ErrorKind::Config, "scorer " + std::string(to_string(s)) + " needs a 'proxy' backend");
    }
    if (needs_similarity(s) && !similarity) {
      throw Error(ErrorKind::Config,
                  "scorer " + std::string(to_string(s)) + " needs a 'similarity' backend");
    }
  }
  if (judge) judge->validate();
  if (proxy) proxy->validate();
  if (similarity) similarity->validate();
}

RunConfig config_from_json(const nlohmann::json& input, const std::filesystem::path& base_dir) {
  if (!input.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
  nlohmann::json j = input;
  interpolate(j, "");

  RunConfig c;
  try {
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      ingest::DatasetDescriptor desc;
      if (d.is_string()) {
        desc.path = resolve(base_dir, d.get<std::string>());
        desc.format = ingest::Format::averitec_qa;
      } else {
        desc.path = resolve(base_dir, d.at("path").get<std::string>());
        desc.format = ingest::parse_format(d.value("format", std::string("averitec-qa")));
      }
      desc.label_space = default_space(desc.format);
      if (d.is_object() && d.contains("label_space")) {
        desc.label_space = parse_label_space(d["label_space"].get<std::string>());
      }
      c.dataset = desc;
    }
    if (j.contains("scorers")) {
      for (const auto& s : j["scorers"]) c.scorers.push_back(parse_scorer(s.get<std::string>()));
    }
    c.alpha = j.value("alpha", c.alpha);
    c.seed = j.value("seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    if (j.contains("cache_dir")) c.cache_dir = resolve(base_dir, j["cache_dir"].get<std::string>());
    if (j.contains("judge")) c.judge = llm::backend_config_from_json(j["judge"]);
    if (j.contains("proxy")) c.proxy = proxy::proxy_config_from_json(j["proxy"]);
    if (j.contains("similarity")) c.similarity = llm::backend_config_from_json(j["similarity"]);
    if (j.contains("label_map")) {
      c.label_map = j["label_map"];
      LabelMapping::from_json(c.label_map);  // fail early on bad entries
    }
    if (j.contains("perturb")) {
      const auto& p = j["perturb"];
      if (p.contains("kinds")) {
        c.perturb_kinds.clear();
        for (const auto& k : p["kinds"]) c.perturb_kinds.push_back(perturb::parse_kind(k.get<std::string>()));
      }
      if (p.contains("intensity")) {
        for (const auto& [k, v] : p["intensity"].items()) {
          c.perturb_intensity[perturb::parse_kind(k)] = v.get<double>();
        }
      }
    }
    c.all_ordered_pairs = j.value("all_ordered_pairs", c.all_ordered_pairs);
    c.resume = j.value("resume", c.resume);
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false, true);
  if (j.is_discarded()) throw Error(ErrorKind::Config, path.string() + " is not valid JSON");
  return config_from_json(j, path.parent_path());
}

nlohmann::json effective_config(const RunConfig& c) {
  nlohmann::json j;
  if (c.dataset) {
    j["dataset"] = {{"path", c.dataset->path.generic_string()},
                    {"format", ingest::to_string(c.dataset->format)},
                    {"label_space", label_space(c.dataset->label_space).name}};
  }
  j["scorers"] = nlohmann::json::array();
  for (ScorerId s : c.scorers) j["scorers"].push_back(to_string(s));
  j["alpha"] = c.alpha;
  j["seed"] = c.seed;
  if (c.judge) j["judge"] = llm::to_json(*c.judge);
  if (c.proxy) j["proxy"] = proxy::to_json(*c.proxy);
  if (c.similarity) j["similarity"] = llm::to_json(*c.similarity);
  j["label_map"] = c.label_map;
  nlohmann::json kinds = nlohmann::json::array();
  for (perturb::Kind k : c.perturb_kinds) kinds.push_back(perturb::to_string(k));
  nlohmann::json intensity = nlohmann::json::object();
  for (const auto& [k, v] : c.perturb_intensity) intensity[std::string(perturb::to_string(k))] = v;
  j["perturb"] = {{"kinds", kinds}, {"intensity", intensity}};
  j["all_ordered_pairs"] = c.all_ordered_pairs;
  return j;
}

std::string config_hash(const RunConfig& c) { return llm::sha256_hex(effective_config(c).dump()); }

}  // namespace ev2r::run
