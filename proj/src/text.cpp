#include "ev2r/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace ev2r {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

enum class CharClass { word, space, punct, apostrophe };

// Classifies the code point starting at s[i] and reports its byte length.
CharClass classify(std::string_view s, std::size_t i, std::size_t& len) {
  const auto c = static_cast<unsigned char>(s[i]);
  len = 1;
  if (c < 0x80) {
    if (std::isalnum(c)) return CharClass::word;
    if (is_space(c)) return CharClass::space;
    if (c == '\'') return CharClass::apostrophe;
    return CharClass::punct;
  }
  if (c == 0xC2 && i + 1 < s.size()) {
    len = 2;
    const auto c1 = static_cast<unsigned char>(s[i + 1]);
    if (c1 == 0xA0) return CharClass::space;  // no-break space
    if (c1 == 0xAB || c1 == 0xBB || c1 == 0xBF || c1 == 0xA1) return CharClass::punct;
    return CharClass::word;
  }
  if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80) {
    len = 3;
    const auto c2 = static_cast<unsigned char>(s[i + 2]);
    if (c2 <= 0x8A || c2 == 0xAF) return CharClass::space;  // U+2000..U+200A, U+202F
    if (c2 == 0x98 || c2 == 0x99) return CharClass::apostrophe;
    if ((c2 >= 0x90 && c2 <= 0x97) || (c2 >= 0x9A && c2 <= 0x9F) || c2 == 0xA6 ||
        c2 == 0xA2) {
      return CharClass::punct;
    }
    return CharClass::word;
  }
  // Remaining multi-byte sequences count as word characters.
  if (c >= 0xF0) len = 4;
  else if (c >= 0xE0) len = 3;
  else if (c >= 0xC0) len = 2;
  len = std::min(len, s.size() - i);
  return CharClass::word;
}

bool is_digit_at(std::string_view s, std::size_t i) {
  return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
}

bool is_alpha_at(std::string_view s, std::size_t i) {
  if (i >= s.size()) return false;
  const auto c = static_cast<unsigned char>(s[i]);
  return std::isalpha(c) || c >= 0x80;
}

constexpr std::array<std::string_view, 34> kAbbreviations = {
    "mr",  "mrs", "ms",  "dr",  "prof", "sr",  "jr",  "st",  "vs",   "etc", "e.g",  "i.e",
    "u.s", "u.k", "no",  "inc", "ltd",  "co",  "jan", "feb", "mar",  "apr", "jun",  "jul",
    "aug", "sep", "sept", "oct", "nov", "dec", "approx", "est", "gov", "fig",
};

}  // namespace

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t b = i;
    while (i < s.size() && !is_space(static_cast<unsigned char>(s[i]))) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  std::string current;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    if (!current.empty()) {
      seq.tokens.push_back(std::move(current));
      seq.offsets.emplace_back(start, end);
      current.clear();
    }
  };

  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = 1;
    const CharClass cls = classify(text, i, len);
    if (cls == CharClass::word) {
      if (current.empty()) start = i;
      for (std::size_t k = 0; k < len; ++k) {
        current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i + k]))));
      }
    } else if (cls == CharClass::apostrophe && !current.empty() && is_alpha_at(text, i - 1) &&
               is_alpha_at(text, i + len)) {
      current.push_back('\'');
    } else if (cls == CharClass::punct && (text[i] == '.' || text[i] == ',') &&
               !current.empty() && is_digit_at(text, i - 1) && is_digit_at(text, i + 1)) {
      current.push_back(text[i]);
    } else {
      flush(i);
    }
    i += len;
  }
  flush(text.size());
  return seq;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    auto s = trim(text.substr(b, e - b));
    if (!s.empty()) out.emplace_back(s);
  };

  std::size_t begin = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      emit(begin, i);
      begin = i + 1;
      continue;
    }
    if (c != '.' && c != '!' && c != '?') continue;

    // Closing quotes/brackets belong to the sentence.
    std::size_t end = i + 1;
    while (end < text.size() && (text[end] == '"' || text[end] == '\'' || text[end] == ')' ||
                                 text[end] == ']' || text[end] == '.' || text[end] == '!' ||
                                 text[end] == '?')) {
      ++end;
    }
    if (end < text.size() && !is_space(static_cast<unsigned char>(text[end]))) continue;

    if (c == '.') {
      std::size_t w = i;
      while (w > begin && !is_space(static_cast<unsigned char>(text[w - 1])) && text[w - 1] != '(') {
        --w;
      }
      const std::string word = to_lower(text.substr(w, i - w));
      const bool initial = word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]));
      const bool abbrev =
          std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
      if (initial || abbrev) continue;
      // "... e.g. lowercase continuation" style: next word starts lowercase.
      std::size_t n = end;
      while (n < text.size() && text[n] == ' ') ++n;
      if (n < text.size() && std::islower(static_cast<unsigned char>(text[n])) &&
          word.find('.') != std::string::npos) {
        continue;
      }
    }
    emit(begin, end);
    begin = end;
    i = end - 1;
  }
  emit(begin, text.size());
  return out;
}

std::string utf8_truncate(std::string_view s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return std::string(s);
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return std::string(s.substr(0, cut));
}

}  // namespace ev2r
