#pragma once

// Versioned text assets (prompt templates, lexicon tables) compiled into the
// library from the assets/ directory.

#include <string>
#include <string_view>
#include <vector>

namespace ev2r {

// Throws Config when no asset has that name.
std::string_view asset(std::string_view name);

// Non-empty lines of an asset, '#' comment lines skipped, each trimmed.
std::vector<std::string> asset_lines(std::string_view name);

std::vector<std::string_view> asset_names();

}  // namespace ev2r
