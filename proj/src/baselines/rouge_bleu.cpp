#include <algorithm>
#include <cmath>
#include <map>

#include "ev2r/baselines.hpp"
#include "ev2r/log.hpp"

namespace ev2r::baselines {

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  if (candidate.empty() || reference.empty()) {
    log::warn("rouge_l: empty input scored 0");
    return 0.0;
  }
  const auto lcs = static_cast<double>(lcs_length(candidate.tokens, reference.tokens));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

double bleu(const TokenSequence& candidate, const TokenSequence& reference, int max_n) {
  if (candidate.empty() || reference.empty() || max_n < 1) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const NgramCounts cand = ngrams(candidate.tokens, static_cast<std::size_t>(n));
    const NgramCounts ref = ngrams(reference.tokens, static_cast<std::size_t>(n));
    std::size_t total = 0;
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    double p;
    if (n == 1) {
      if (matched == 0) return 0.0;
      p = static_cast<double>(matched) / static_cast<double>(total);
    } else {
      p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
    }
    log_sum += std::log(p);
  }
  const auto c = static_cast<double>(candidate.size());
  const auto r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return std::clamp(bp * std::exp(log_sum / max_n), 0.0, 1.0);
}

std::string item_text(const QAPair& qa) {
  if (qa.question.empty()) return qa.answer;
  return qa.question + " " + qa.answer;
}

std::string evidence_text(const EvidenceSet& evidence) {
  std::string out;
  for (const QAPair& qa : evidence.items) {
    if (!out.empty()) out.push_back(' ');
    out += item_text(qa);
  }
  return out;
}

double rouge_l(const EvidenceSet& candidate, const EvidenceSet& reference) {
  return rouge_l(tokenize(evidence_text(candidate)), tokenize(evidence_text(reference)));
}

double bleu(const EvidenceSet& candidate, const EvidenceSet& reference) {
  return bleu(tokenize(evidence_text(candidate)), tokenize(evidence_text(reference)));
}

double meteor(const EvidenceSet& candidate, const EvidenceSet& reference) {
  return meteor(tokenize(evidence_text(candidate)), tokenize(evidence_text(reference)));
}

}  // namespace ev2r::baselines
