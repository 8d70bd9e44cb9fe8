#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "ev2r/error.hpp"
#include "ev2r/llm_backend.hpp"
#include "ev2r/log.hpp"

namespace ev2r::llm {
namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json entry_json(const CacheEntry& e) {
  return {{"key", e.key},       {"model", e.model},       {"schema", e.schema},
          {"kind", e.kind},     {"prompt", e.prompt},     {"response", e.response},
          {"timestamp", e.timestamp}};
}

bool matches(const CacheEntry& e, std::string_view model, std::string_view schema,
             std::string_view kind, std::string_view prompt) {
  return e.model == model && e.schema == schema && e.kind == kind && e.prompt == prompt;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::optional<std::filesystem::path> resolve_cache_dir(
    const std::optional<std::filesystem::path>& configured) {
  if (configured && !configured->empty()) return configured;
  if (const char* env = std::getenv("EV2R_CACHE_DIR"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) {
    std::error_code ec;
    std::filesystem::create_directories(*dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create cache directory " + dir_->string() + ": " + ec.message());
  }
}

std::string ResponseCache::key(std::string_view model, std::string_view schema,
                               std::string_view kind, std::string_view prompt) {
  std::string material;
  material.reserve(model.size() + schema.size() + kind.size() + prompt.size() + 3);
  material.append(model).push_back('\0');
  material.append(schema).push_back('\0');
  material.append(kind).push_back('\0');
  material.append(prompt);
  return sha256_hex(material);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return *dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(std::string_view model, std::string_view schema,
                                              std::string_view kind, std::string_view prompt) {
  const std::string k = key(model, schema, kind, prompt);
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(k); it != memory_.end() && matches(it->second, model, schema, kind, prompt)) {
    ++hits_;
    return it->second.response;
  }
  if (!dir_) return std::nullopt;
  std::ifstream in(path_for(k), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  const nlohmann::json j = nlohmann::json::parse(buf.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    log::warn("ignoring unreadable cache entry " + path_for(k).string());
    return std::nullopt;
  }
  CacheEntry e{k,
               j.value("model", std::string()),
               j.value("schema", std::string()),
               j.value("kind", std::string()),
               j.value("prompt", std::string()),
               j.value("response", std::string()),
               j.value("timestamp", std::string())};
  if (!matches(e, model, schema, kind, prompt)) {
    log::warn("cache entry " + k + " does not match its request; ignoring it");
    return std::nullopt;
  }
  ++hits_;
  std::string response = e.response;
  memory_.emplace(k, std::move(e));
  return response;
}

void ResponseCache::put(std::string_view model, std::string_view schema, std::string_view kind,
                        std::string_view prompt, std::string_view response) {
  const std::string k = key(model, schema, kind, prompt);
  CacheEntry e{k,
               std::string(model),
               std::string(schema),
               std::string(kind),
               std::string(prompt),
               std::string(response),
               utc_now()};
  std::lock_guard lock(mutex_);
  if (dir_) {
    const auto target = path_for(k);
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
    std::ostringstream tmp_name;
    tmp_name << target.string() << ".tmp." << std::this_thread::get_id();
    const std::filesystem::path tmp = tmp_name.str();
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << entry_json(e).dump();
      if (!out) throw Error(ErrorKind::Io, "cannot write cache entry " + tmp.string());
    }
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot move cache entry into place: " + ec.message());
  }
  memory_[k] = std::move(e);
}

}  // namespace ev2r::llm
