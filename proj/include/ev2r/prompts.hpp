#pragma once

// Registry of the versioned prompt templates shipped under assets/prompts.
// Templates use {{name}} placeholders; the first line names the template
// ("TASK: <id>") so recorded traffic can be attributed.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ev2r {

struct PromptRequest {
  std::string template_id;
  std::string text;       // filled prompt
  std::string schema_id;  // expected response schema
};

namespace prompts {

struct Template {
  std::string_view id;
  std::string_view schema_id;
  std::string_view text;
};

// Throws Config for unknown ids.
const Template& get(std::string_view id);
std::vector<std::string_view> ids();

using Vars = std::map<std::string, std::string, std::less<>>;

// Fills every placeholder; a placeholder without a value, or an empty
// result, is a Config error.
PromptRequest render(std::string_view id, const Vars& vars);

// Wraps a failed request in the error-correction template. The schema of
// the original request is kept.
PromptRequest repair(const PromptRequest& original, std::string_view error);

}  // namespace prompts
}  // namespace ev2r
