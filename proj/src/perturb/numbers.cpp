// Number <-> word conversion and contraction tables for the invariance
// perturbations.

#include <array>
#include <optional>

#include "ev2r/assets.hpp"
#include "ev2r/perturb.hpp"
#include "ev2r/text.hpp"
#include "pieces.hpp"

namespace ev2r::perturb {
namespace {

using detail::Affixed;
using detail::Pieces;

constexpr std::array<std::string_view, 20> kSmall = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen",
};
constexpr std::array<std::string_view, 10> kTens = {
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
};

struct Scale {
  std::string_view name;
  std::uint64_t value;
};
constexpr std::array<Scale, 3> kScales = {{
    {"billion", 1'000'000'000ULL},
    {"million", 1'000'000ULL},
    {"thousand", 1'000ULL},
}};

constexpr std::uint64_t kMaxNumber = 999'999'999'999ULL;

std::string below_thousand(std::uint64_t n) {
  std::string out;
  if (n >= 100) {
    out = std::string(kSmall[n / 100]) + " hundred";
    n %= 100;
    if (n == 0) return out;
    out += ' ';
  }
  if (n < 20) return out + std::string(kSmall[n]);
  out += kTens[n / 10];
  if (n % 10) out += "-" + std::string(kSmall[n % 10]);
  return out;
}

std::optional<std::uint64_t> small_value(std::string_view w) {
  for (std::size_t i = 0; i < kSmall.size(); ++i) {
    if (kSmall[i] == w) return i;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> tens_value(std::string_view w) {
  for (std::size_t i = 2; i < kTens.size(); ++i) {
    if (kTens[i] == w) return i * 10;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> scale_value(std::string_view w) {
  for (const Scale& s : kScales) {
    if (s.name == w) return s.value;
  }
  return std::nullopt;
}

enum class Last { none, unit, teen, tens, tens_unit, hundred, scale };

struct WordNumber {
  std::uint64_t value = 0;
  std::size_t tokens = 0;  // how many pieces were consumed
};

// Longest grammatical number phrase starting at pieces[start].
std::optional<WordNumber> parse_phrase(const Pieces& p, std::size_t start) {
  std::uint64_t total = 0;
  std::uint64_t group = 0;
  std::uint64_t last_scale = ~std::uint64_t{0};
  Last last = Last::none;
  std::size_t consumed = 0;

  for (std::size_t i = start; i < p.tokens.size(); ++i) {
    const Affixed a = Affixed::split(p.tokens[i].text);
    if (i > start && !a.prefix.empty()) break;
    const std::string w = to_lower(a.core);

    bool ok = false;
    if (w == "zero") {
      // never combines with anything
      if (last == Last::none) return WordNumber{0, 1};
    } else if (auto dash = w.find('-'); dash != std::string::npos) {
      const auto t = tens_value(w.substr(0, dash));
      const auto u = small_value(w.substr(dash + 1));
      if (t && u && *u >= 1 && *u <= 9 &&
          (last == Last::none || last == Last::hundred || last == Last::scale)) {
        group += *t + *u;
        last = Last::tens_unit;
        ok = true;
      }
    } else if (auto s = small_value(w)) {
      if (*s >= 1 && *s <= 9 &&
          (last == Last::none || last == Last::hundred || last == Last::scale)) {
        group += *s;
        last = Last::unit;
        ok = true;
      } else if (*s >= 10 &&
                 (last == Last::none || last == Last::hundred || last == Last::scale)) {
        group += *s;
        last = Last::teen;
        ok = true;
      }
    } else if (auto t = tens_value(w)) {
      if (last == Last::none || last == Last::hundred || last == Last::scale) {
        group += *t;
        last = Last::tens;
        ok = true;
      }
    } else if (w == "hundred") {
      if (last == Last::unit && group < 10) {
        group *= 100;
        last = Last::hundred;
        ok = true;
      }
    } else if (auto sc = scale_value(w)) {
      if (last != Last::none && last != Last::scale && *sc < last_scale && group > 0) {
        total += group * *sc;
        group = 0;
        last_scale = *sc;
        last = Last::scale;
        ok = true;
      }
    }
    if (!ok) break;
    consumed = i - start + 1;
    if (!a.suffix.empty()) break;
  }
  if (consumed == 0) return std::nullopt;
  return WordNumber{total + group, consumed};
}

struct ContractionEntry {
  std::vector<std::string> expanded;  // lowercase words
  std::string contracted;
};

const std::vector<ContractionEntry>& contraction_table() {
  static const auto table = [] {
    std::vector<ContractionEntry> t;
    for (const std::string& line : asset_lines("lexicon/contractions.tsv")) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      t.push_back({split_whitespace(to_lower(line.substr(0, tab))), line.substr(tab + 1)});
    }
    // Longer expansions first so "we are" wins over any one-word entry.
    std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
      return a.expanded.size() > b.expanded.size();
    });
    return t;
  }();
  return table;
}

}  // namespace

std::string number_to_words(std::uint64_t value) {
  if (value > kMaxNumber) return std::to_string(value);
  if (value == 0) return "zero";
  std::string out;
  for (const Scale& s : kScales) {
    if (value >= s.value) {
      if (!out.empty()) out += ' ';
      out += below_thousand(value / s.value) + " " + std::string(s.name);
      value %= s.value;
    }
  }
  if (value > 0) {
    if (!out.empty()) out += ' ';
    out += below_thousand(value);
  }
  return out;
}

std::string numbers_to_words(std::string_view text) {
  Pieces p = Pieces::parse(text);
  for (auto& tok : p.tokens) {
    Affixed a = Affixed::split(tok.text);
    if (a.core.empty() || a.core.size() > 12) continue;
    if (a.core.find_first_not_of("0123456789") != std::string::npos) continue;
    if (a.core.size() > 1 && a.core.front() == '0') continue;
    // "3.5", "1,000": separators glued to digits are not plain integers.
    if ((!a.suffix.empty() && (a.suffix.front() == '.' || a.suffix.front() == ',') &&
         a.suffix.size() > 1 && std::isdigit(static_cast<unsigned char>(a.suffix[1])))) {
      continue;
    }
    if (!a.prefix.empty() && (a.prefix.back() == '$' || a.prefix.back() == '-' ||
                              a.prefix.back() == '.')) {
      continue;
    }
    a.core = number_to_words(std::stoull(a.core));
    tok.text = a.join();
  }
  return p.render();
}

std::string words_to_numbers(std::string_view text) {
  const Pieces in = Pieces::parse(text);
  Pieces out;
  out.tail = in.tail;
  std::size_t i = 0;
  while (i < in.tokens.size()) {
    if (auto num = parse_phrase(in, i)) {
      const Affixed first = Affixed::split(in.tokens[i].text);
      const Affixed last = Affixed::split(in.tokens[i + num->tokens - 1].text);
      out.tokens.push_back(
          {in.tokens[i].gap, first.prefix + std::to_string(num->value) + last.suffix});
      i += num->tokens;
    } else {
      out.tokens.push_back(in.tokens[i]);
      ++i;
    }
  }
  return out.render();
}

std::string contract(std::string_view text) {
  const Pieces in = Pieces::parse(text);
  Pieces out;
  out.tail = in.tail;
  std::size_t i = 0;
  while (i < in.tokens.size()) {
    bool replaced = false;
    for (const ContractionEntry& e : contraction_table()) {
      const std::size_t k = e.expanded.size();
      if (i + k > in.tokens.size()) continue;
      bool match = true;
      for (std::size_t w = 0; w < k && match; ++w) {
        const Affixed a = Affixed::split(in.tokens[i + w].text);
        match = to_lower(a.core) == e.expanded[w] && (w == 0 || a.prefix.empty()) &&
                (w + 1 == k || a.suffix.empty());
      }
      if (!match) continue;
      const Affixed first = Affixed::split(in.tokens[i].text);
      const Affixed last = Affixed::split(in.tokens[i + k - 1].text);
      out.tokens.push_back({in.tokens[i].gap, first.prefix +
                                                  detail::capitalize_like(e.contracted, first.core) +
                                                  last.suffix});
      i += k;
      replaced = true;
      break;
    }
    if (!replaced) {
      out.tokens.push_back(in.tokens[i]);
      ++i;
    }
  }
  return out.render();
}

std::string expand_contractions(std::string_view text) {
  Pieces p = Pieces::parse(text);
  for (auto& tok : p.tokens) {
    Affixed a = Affixed::split(tok.text);
    std::string core = to_lower(a.core);
    // Typographic apostrophe
    if (auto pos = core.find("\xE2\x80\x99"); pos != std::string::npos) core.replace(pos, 3, "'");
    for (const ContractionEntry& e : contraction_table()) {
      if (to_lower(e.contracted) == core) {
        a.core = detail::capitalize_like(join(e.expanded, " "), a.core);
        tok.text = a.join();
        break;
      }
    }
  }
  return p.render();
}

}  // namespace ev2r::perturb
