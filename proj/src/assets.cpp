#include "ev2r/assets.hpp"

#include <utility>

#include "ev2r/error.hpp"
#include "ev2r/text.hpp"

namespace ev2r {
namespace detail {
extern const std::pair<std::string_view, std::string_view> kAssets[];
extern const unsigned kAssetCount;
}  // namespace detail

std::string_view asset(std::string_view name) {
  for (unsigned i = 0; i < detail::kAssetCount; ++i) {
    if (detail::kAssets[i].first == name) return detail::kAssets[i].second;
  }
  throw Error(ErrorKind::Config, "unknown asset '" + std::string(name) + "'");
}

std::vector<std::string> asset_lines(std::string_view name) {
  std::vector<std::string> lines;
  const std::string_view text = asset(name);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim(text.substr(pos, nl - pos));
    if (!line.empty() && line.front() != '#') lines.emplace_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> asset_names() {
  std::vector<std::string_view> names;
  for (unsigned i = 0; i < detail::kAssetCount; ++i) names.push_back(detail::kAssets[i].first);
  return names;
}

}  // namespace ev2r
