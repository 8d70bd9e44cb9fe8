#include "ev2r/prompts.hpp"

#include <array>

#include "ev2r/assets.hpp"
#include "ev2r/error.hpp"
#include "ev2r/text.hpp"

namespace ev2r::prompts {
namespace {

struct Entry {
  std::string_view id;
  std::string_view schema_id;
};

constexpr std::array<Entry, 8> kRegistry = {{
    {"refbased.v1", "refbased.v1"},
    {"decompose.v1", "facts.v1"},
    {"decompose_claim.v1", "facts.v1"},
    {"verify.v1", "support.v1"},
    {"addressed.v1", "addressed.v1"},
    {"llm_proxy.v1", "label.v1"},
    {"elicit_confidence.v1", "confidence.v1"},
    {"repair.v1", ""},
}};

const std::vector<Template>& templates() {
  static const std::vector<Template> all = [] {
    std::vector<Template> out;
    for (const Entry& e : kRegistry) {
      const std::string name = "prompts/" + std::string(e.id) + ".txt";
      out.push_back({e.id, e.schema_id, asset(name)});
    }
    return out;
  }();
  return all;
}

}  // namespace

const Template& get(std::string_view id) {
  for (const Template& t : templates()) {
    if (t.id == id) return t;
  }
  throw Error(ErrorKind::Config, "unregistered prompt template '" + std::string(id) + "'");
}

std::vector<std::string_view> ids() {
  std::vector<std::string_view> out;
  for (const Entry& e : kRegistry) out.push_back(e.id);
  return out;
}

PromptRequest render(std::string_view id, const Vars& vars) {
  const Template& t = get(id);
  std::string out;
  out.reserve(t.text.size() + 256);
  std::size_t pos = 0;
  while (pos < t.text.size()) {
    const std::size_t open = t.text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(t.text.substr(pos));
      break;
    }
    const std::size_t close = t.text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw Error(ErrorKind::Config, "unterminated placeholder in template " + std::string(id));
    }
    out.append(t.text.substr(pos, open - pos));
    const std::string_view name = t.text.substr(open + 2, close - open - 2);
    auto it = vars.find(name);
    if (it == vars.end()) {
      throw Error(ErrorKind::Config,
                  "template " + std::string(id) + " needs a value for '" + std::string(name) + "'");
    }
    out += it->second;
    pos = close + 2;
  }
  if (trim(out).empty()) throw Error(ErrorKind::Config, "empty prompt from template " + std::string(id));
  return {std::string(id), std::move(out), std::string(t.schema_id)};
}

PromptRequest repair(const PromptRequest& original, std::string_view error) {
  PromptRequest r = render("repair.v1", {{"error", std::string(error)}, {"original", original.text}});
  r.schema_id = original.schema_id;
  return r;
}

}  // namespace ev2r::prompts
