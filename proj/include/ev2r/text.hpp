#pragma once

// Text utilities shared by the lexical metrics, the perturbation suite and
// the prompt builders.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ev2r {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercased tokens plus [begin, end) byte offsets into the source text.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, std::size_t>> offsets;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

// Lowercase; split on whitespace and punctuation; numerals such as "3.5" or
// "1,000" stay intact and intra-word apostrophes ("we're") are kept.
// Pure punctuation is dropped.
TokenSequence tokenize(std::string_view text);

// Sentence segmentation on . ! ? and newlines, aware of common abbreviations,
// initials and decimal numbers.
std::vector<std::string> split_sentences(std::string_view text);

// Cuts at most max_bytes from the front of s without splitting a UTF-8
// sequence.
std::string utf8_truncate(std::string_view s, std::size_t max_bytes);

}  // namespace ev2r
