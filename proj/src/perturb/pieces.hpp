#pragma once

// Whitespace-token view of a string that keeps the original separators so
// untouched text round-trips byte for byte.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace ev2r::perturb::detail {

struct Piece {
  std::string gap;   // whitespace before the token
  std::string text;  // the token
};

struct Pieces {
  std::vector<Piece> tokens;
  std::string tail;  // whitespace after the last token

  static Pieces parse(std::string_view s) {
    Pieces p;
    std::size_t i = 0;
    while (i < s.size()) {
      const std::size_t gap_begin = i;
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i == s.size()) {
        p.tail = std::string(s.substr(gap_begin));
        break;
      }
      const std::size_t tok_begin = i;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      p.tokens.push_back({std::string(s.substr(gap_begin, tok_begin - gap_begin)),
                          std::string(s.substr(tok_begin, i - tok_begin))});
    }
    return p;
  }

  std::string render() const {
    std::string out;
    for (const Piece& t : tokens) {
      out += t.gap;
      out += t.text;
    }
    out += tail;
    return out;
  }
};

// Splits a token into leading punctuation, alphanumeric core, trailing
// punctuation. Inner punctuation ("we're", "fifty-three") stays in the core.
struct Affixed {
  std::string prefix;
  std::string core;
  std::string suffix;

  static Affixed split(std::string_view tok) {
    std::size_t b = 0;
    std::size_t e = tok.size();
    auto word_char = [](char c) {
      const auto u = static_cast<unsigned char>(c);
      return std::isalnum(u) || u >= 0x80;
    };
    while (b < e && !word_char(tok[b])) ++b;
    while (e > b && !word_char(tok[e - 1])) --e;
    return {std::string(tok.substr(0, b)), std::string(tok.substr(b, e - b)),
            std::string(tok.substr(e))};
  }

  std::string join() const { return prefix + core + suffix; }
};

inline bool starts_upper(std::string_view s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s.front()));
}

inline std::string capitalize_like(std::string replacement, std::string_view original) {
  if (starts_upper(original) && !replacement.empty()) {
    replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  return replacement;
}

}  // namespace ev2r::perturb::detail
