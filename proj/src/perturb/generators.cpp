#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ev2r/assets.hpp"
#include "ev2r/error.hpp"
#include "ev2r/perturb.hpp"
#include "ev2r/rng.hpp"
#include "ev2r/text.hpp"
#include "pieces.hpp"

namespace ev2r::perturb {
namespace {

using detail::Affixed;
using detail::Pieces;

double intensity_of(const PerturbationSpec& spec) {
  return spec.intensity > 0.0 ? spec.intensity : default_intensity(spec.kind);
}

std::size_t rate_count(double rate, std::size_t eligible) {
  const auto k = static_cast<std::size_t>(std::llround(rate * static_cast<double>(eligible)));
  return std::clamp<std::size_t>(k, 1, eligible);
}

bool single_item(const EvidenceSet& e) { return e.items.size() == 1; }

std::string join_sentences(const std::vector<std::string>& sentences) {
  return join(sentences, " ");
}

// A field location: item index and 0 = question, 1 = answer.
struct FieldRef {
  std::size_t item;
  int field;
};

std::string& field_of(EvidenceSet& e, FieldRef f) {
  return f.field == 0 ? e.items[f.item].question : e.items[f.item].answer;
}

std::vector<FieldRef> fields(const EvidenceSet& e) {
  std::vector<FieldRef> out;
  for (std::size_t i = 0; i < e.items.size(); ++i) {
    out.push_back({i, 0});
    out.push_back({i, 1});
  }
  return out;
}

// Every whitespace token of every field, addressed by (field, token index).
struct TokenRef {
  std::size_t field;
  std::size_t token;
};

bool ascii_alpha(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
  });
}

const std::unordered_set<std::string>& stopwords() {
  static const auto set = [] {
    std::unordered_set<std::string> s;
    for (const auto& w : asset_lines("lexicon/stopwords.txt")) s.insert(to_lower(w));
    return s;
  }();
  return set;
}

const std::unordered_map<std::string, std::vector<std::string>>& synonyms() {
  static const auto table = [] {
    std::unordered_map<std::string, std::vector<std::string>> t;
    for (const auto& line : asset_lines("lexicon/synonyms.tsv")) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      std::vector<std::string> alts;
      std::string rest = line.substr(tab + 1);
      std::size_t b = 0;
      while (b <= rest.size()) {
        auto e = rest.find(',', b);
        if (e == std::string::npos) e = rest.size();
        const auto alt = trim(std::string_view(rest).substr(b, e - b));
        if (!alt.empty()) alts.emplace_back(alt);
        b = e + 1;
      }
      if (!alts.empty()) t[to_lower(line.substr(0, tab))] = std::move(alts);
    }
    return t;
  }();
  return table;
}

// Edits tokens chosen by `pick` in every field. `edit` rewrites a token in
// place and returns false to leave it alone.
template <typename Eligible, typename Edit>
EvidenceSet edit_tokens(const EvidenceSet& evidence, SeededRng& rng, double rate,
                        Eligible eligible, Edit edit) {
  EvidenceSet out = evidence;
  const auto refs = fields(out);
  std::vector<Pieces> parsed;
  parsed.reserve(refs.size());
  for (const auto& f : refs) parsed.push_back(Pieces::parse(field_of(out, f)));

  std::vector<TokenRef> candidates;
  for (std::size_t f = 0; f < parsed.size(); ++f) {
    for (std::size_t t = 0; t < parsed[f].tokens.size(); ++t) {
      if (eligible(Affixed::split(parsed[f].tokens[t].text))) candidates.push_back({f, t});
    }
  }
  if (candidates.empty()) return out;

  std::vector<bool> touched(parsed.size(), false);
  for (std::size_t idx : rng.sample(candidates.size(), rate_count(rate, candidates.size()))) {
    const TokenRef r = candidates[idx];
    Affixed a = Affixed::split(parsed[r.field].tokens[r.token].text);
    if (edit(a, rng)) {
      parsed[r.field].tokens[r.token].text = a.join();
      touched[r.field] = true;
    }
  }
  for (std::size_t f = 0; f < parsed.size(); ++f) {
    if (touched[f]) field_of(out, refs[f]) = parsed[f].render();
  }
  return out;
}

template <typename Fn>
EvidenceSet map_fields(const EvidenceSet& evidence, Fn fn) {
  EvidenceSet out = evidence;
  for (auto& item : out.items) {
    item.question = fn(item.question);
    item.answer = fn(item.answer);
  }
  return out;
}

std::vector<std::size_t> permutation(SeededRng& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  if (n >= 2 && std::is_sorted(order.begin(), order.end())) {
    std::rotate(order.begin(), order.begin() + 1, order.end());
  }
  return order;
}

std::string drop_stopwords(const std::string& text) {
  const Pieces in = Pieces::parse(text);
  Pieces out;
  out.tail = in.tail;
  std::string pending_gap;
  bool have_gap = false;
  for (const auto& tok : in.tokens) {
    const Affixed a = Affixed::split(tok.text);
    if (!a.core.empty() && stopwords().count(to_lower(a.core))) {
      // Keep trailing punctuation attached to what came before.
      if (!out.tokens.empty()) out.tokens.back().text += a.suffix;
      if (!have_gap) {
        pending_gap = tok.gap;
        have_gap = true;
      }
      continue;
    }
    out.tokens.push_back({have_gap && out.tokens.empty() ? pending_gap : tok.gap, tok.text});
    have_gap = false;
  }
  if (out.tokens.empty()) return text;
  return out.render();
}

std::string shuffle_words(const std::string& text, SeededRng rng) {
  auto words = split_whitespace(text);
  if (words.size() < 2) return text;
  const auto order = permutation(rng, words.size());
  std::vector<std::string> shuffled;
  shuffled.reserve(words.size());
  for (std::size_t i : order) shuffled.push_back(words[i]);
  return join(shuffled, " ");
}

}  // namespace

std::size_t unit_count(const EvidenceSet& evidence) {
  if (evidence.items.size() >= 2) return evidence.items.size();
  if (evidence.items.empty()) return 0;
  return split_sentences(evidence.items.front().answer).size();
}

std::size_t token_count(const EvidenceSet& evidence) {
  std::size_t n = 0;
  for (const auto& item : evidence.items) {
    n += split_whitespace(item.question).size() + split_whitespace(item.answer).size();
  }
  return n;
}

std::size_t sentence_count(const EvidenceSet& evidence) {
  std::size_t n = 0;
  for (const auto& item : evidence.items) n += split_sentences(item.answer).size();
  return n;
}

NoiseCorpus NoiseCorpus::from_instances(std::span<const EvalInstance> instances) {
  NoiseCorpus corpus;
  for (const auto& inst : instances) {
    std::set<std::string> seen;
    for (const EvidenceSet* ev : {&inst.reference_evidence, &inst.retrieved_evidence}) {
      for (const auto& item : ev->items) {
        for (auto& s : split_sentences(item.answer)) {
          if (split_whitespace(s).size() < 3) continue;
          if (split_sentences(s).size() != 1) continue;
          if (seen.insert(s).second) corpus.sentences.push_back({inst.id(), s});
        }
      }
    }
  }
  return corpus;
}

EvidenceSet completeness_drop(const EvidenceSet& evidence, const PerturbationSpec& spec) {
  SeededRng rng(spec.seed);
  const std::size_t n = unit_count(evidence);
  if (n < 2) throw Error(ErrorKind::TooShort, "completeness drop needs at least two units");
  const std::size_t k = std::min(rate_count(intensity_of(spec), n), n - 1);
  const auto start = static_cast<std::size_t>(rng.below(n - k + 1));

  EvidenceSet out = evidence;
  if (single_item(evidence)) {
    auto sentences = split_sentences(evidence.items.front().answer);
    sentences.erase(sentences.begin() + static_cast<std::ptrdiff_t>(start),
                    sentences.begin() + static_cast<std::ptrdiff_t>(start + k));
    out.items.front().answer = join_sentences(sentences);
  } else {
    out.items.erase(out.items.begin() + static_cast<std::ptrdiff_t>(start),
                    out.items.begin() + static_cast<std::ptrdiff_t>(start + k));
  }
  return out;
}

EvidenceSet random_shuffle(const EvidenceSet& evidence, const PerturbationSpec& spec) {
  const SeededRng rng(spec.seed);
  EvidenceSet out = evidence;
  for (std::size_t i = 0; i < out.items.size(); ++i) {
    auto& item = out.items[i];
    item.question = shuffle_words(item.question, rng.split(2 * i));
    item.answer = shuffle_words(item.answer, rng.split(2 * i + 1));
  }
  return out;
}

EvidenceSet fluency(const EvidenceSet& evidence, const PerturbationSpec& spec) {
  if (spec.kind == Kind::fluency_stopwords) {
    return map_fields(evidence, [](const std::string& s) { return drop_stopwords(s); });
  }
  if (spec.kind != Kind::fluency_typos) {
    throw Error(ErrorKind::InvalidArgument, "fluency called with " + std::string(to_string(spec.kind)));
  }
  SeededRng rng(spec.seed);
  return edit_tokens(
      evidence, rng, intensity_of(spec),
      [](const Affixed& a) {
        if (a.core.size() < 4 || !ascii_alpha(a.core)) return false;
        for (std::size_t j = 0; j + 1 < a.core.size(); ++j) {
          if (a.core[j] != a.core[j + 1]) return true;
        }
        return false;
      },
      [](Affixed& a, SeededRng& r) {
        std::vector<std::size_t> spots;
        for (std::size_t j = 0; j + 1 < a.core.size(); ++j) {
          if (a.core[j] != a.core[j + 1]) spots.push_back(j);
        }
        const std::size_t j = spots[r.below(spots.size())];
        std::swap(a.core[j], a.core[j + 1]);
        return true;
      });
}

EvidenceSet invariance(const EvidenceSet& evidence, const PerturbationSpec& spec) {
  switch (spec.kind) {
    case Kind::inv_num2text:
      return map_fields(evidence, [](const std::string& s) { return numbers_to_words(s); });
    case Kind::inv_text2num:
      return map_fields(evidence, [](const std::string& s) { return words_to_numbers(s); });
    case Kind::inv_contractions:
      return map_fields(evidence, [](const std::string& s) { return contract(s); });
    case Kind::inv_synonyms: {
      SeededRng rng(spec.seed);
      return edit_tokens(
          evidence, rng, intensity_of(spec),
          [](const Affixed& a) { return synonyms().count(to_lower(a.core)) > 0; },
          [](Affixed& a, SeededRng& r) {
            const auto& alts = synonyms().at(to_lower(a.core));
            a.core = detail::capitalize_like(alts[r.below(alts.size())], a.core);
            return true;
          });
    }
    default:
      throw Error(ErrorKind::InvalidArgument,
                  "invariance called with " + std::string(to_string(spec.kind)));
  }
}

EvidenceSet noise_insert(const EvidenceSet& evidence, const PerturbationSpec& spec,
                         const NoiseCorpus& corpus) {
  std::set<std::string> present;
  for (const auto& item : evidence.items) {
    for (auto& s : split_sentences(item.answer)) present.insert(std::move(s));
  }
  std::vector<const NoiseSentence*> candidates;
  for (const auto& s : corpus.sentences) {
    if (s.source_id == spec.exclude_source) continue;
    if (present.count(s.text)) continue;
    candidates.push_back(&s);
  }
  if (candidates.empty()) throw Error(ErrorKind::NoNoiseCandidate, "no sentence from another instance");

  SeededRng rng(spec.seed);
  const NoiseSentence* pick = candidates[rng.below(candidates.size())];
  const auto pos = static_cast<std::ptrdiff_t>(rng.below(evidence.items.size() + 1));
  EvidenceSet out = evidence;
  out.items.insert(out.items.begin() + pos, QAPair{"", pick->text, std::nullopt});
  return out;
}

EvidenceSet redundancy(const EvidenceSet& evidence, const PerturbationSpec& spec) {
  SeededRng rng(spec.seed);
  if (spec.kind == Kind::redundancy_words) {
    return edit_tokens(
        evidence, rng, intensity_of(spec), [](const Affixed& a) { return !a.core.empty(); },
        [](Affixed& a, SeededRng&) {
          a.core = a.core + " " + a.core;
          return true;
        });
  }
  if (spec.kind != Kind::redundancy_sent) {
    throw Error(ErrorKind::InvalidArgument,
                "redundancy called with " + std::string(to_string(spec.kind)));
  }
  if (evidence.items.empty()) throw Error(ErrorKind::TooShort, "no evidence to repeat");

  struct SentRef {
    std::size_t item;
    std::size_t sentence;
  };
  std::vector<std::vector<std::string>> split;
  std::vector<SentRef> candidates;
  for (std::size_t i = 0; i < evidence.items.size(); ++i) {
    split.push_back(split_sentences(evidence.items[i].answer));
    for (std::size_t s = 0; s < split.back().size(); ++s) {
      const char last = split.back()[s].back();
      if (last == '.' || last == '!' || last == '?') candidates.push_back({i, s});
    }
  }
  EvidenceSet out = evidence;
  if (candidates.empty()) {
    // Nothing sentence-like: repeat a whole item next to itself.
    const auto i = static_cast<std::ptrdiff_t>(rng.below(evidence.items.size()));
    out.items.insert(out.items.begin() + i, evidence.items[static_cast<std::size_t>(i)]);
    return out;
  }
  const SentRef r = candidates[rng.below(candidates.size())];
  auto& sentences = split[r.item];
  sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(r.sentence),
                   sentences[r.sentence]);
  out.items[r.item].answer = join_sentences(sentences);
  return out;
}

EvidenceSet argument_structure(const EvidenceSet& evidence, const PerturbationSpec& spec) {
  SeededRng rng(spec.seed);
  EvidenceSet out = evidence;
  if (single_item(evidence)) {
    const auto sentences = split_sentences(evidence.items.front().answer);
    if (sentences.size() < 2) return out;
    std::vector<std::string> moved;
    for (std::size_t i : permutation(rng, sentences.size())) moved.push_back(sentences[i]);
    out.items.front().answer = join_sentences(moved);
    return out;
  }
  out.items.clear();
  for (std::size_t i : permutation(rng, evidence.items.size())) {
    out.items.push_back(evidence.items[i]);
  }
  return out;
}

EvidenceSet apply(const EvidenceSet& evidence, const PerturbationSpec& spec) {
  switch (spec.kind) {
    case Kind::completeness:
      return completeness_drop(evidence, spec);
    case Kind::random_shuffle:
      return random_shuffle(evidence, spec);
    case Kind::fluency_typos:
    case Kind::fluency_stopwords:
      return fluency(evidence, spec);
    case Kind::inv_num2text:
    case Kind::inv_text2num:
    case Kind::inv_synonyms:
    case Kind::inv_contractions:
      return invariance(evidence, spec);
    case Kind::noise:
      if (spec.corpus == nullptr) throw Error(ErrorKind::InvalidArgument, "noise needs a corpus");
      return noise_insert(evidence, spec, *spec.corpus);
    case Kind::redundancy_sent:
    case Kind::redundancy_words:
      return redundancy(evidence, spec);
    case Kind::argument_structure:
      return argument_structure(evidence, spec);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown perturbation kind");
}

std::vector<std::vector<std::string>> dedup_sentences(const EvidenceSet& evidence) {
  std::vector<std::vector<std::string>> out;
  for (const auto& item : evidence.items) {
    std::vector<std::string> sentences;
    for (auto& s : split_sentences(item.answer)) {
      if (sentences.empty() || sentences.back() != s) sentences.push_back(std::move(s));
    }
    sentences.insert(sentences.begin(), std::string(trim(item.question)));
    if (out.empty() || out.back() != sentences) out.push_back(std::move(sentences));
  }
  return out;
}

std::vector<std::vector<std::string>> dedup_words(const EvidenceSet& evidence) {
  std::vector<std::vector<std::string>> out;
  for (const auto& item : evidence.items) {
    for (const std::string* field : {&item.question, &item.answer}) {
      std::vector<std::string> words;
      // Whitespace words, not tokens: a repeated "eighty-six" must collapse
      // even though the tokenizer splits it.
      for (const auto& raw : split_whitespace(*field)) {
        std::string w = to_lower(Affixed::split(raw).core);
        if (w.empty()) continue;
        if (words.empty() || words.back() != w) words.push_back(std::move(w));
      }
      out.push_back(std::move(words));
    }
  }
  return out;
}

}  // namespace ev2r::perturb
