#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tsum::rouge {

struct RecallF1 {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  bool operator==(const RecallF1&) const = default;
};

struct RougeScore {
  RecallF1 rouge1;
  RecallF1 rouge2;
  RecallF1 rougeL;
  bool operator==(const RougeScore&) const = default;
};

// Scores from a matched count. Empty denominators give 0.
RecallF1 from_counts(std::size_t matched, std::size_t candidate_total, std::size_t reference_total);

// Clipped n-gram overlap: sum over distinct n-grams of min(count in candidate, count in reference).
template <typename T>
std::size_t ngram_overlap(std::span<const T> candidate, std::span<const T> reference, std::size_t n) {
  if (n == 0 || candidate.size() < n || reference.size() < n) return 0;
  std::map<std::vector<T>, std::size_t> ref_counts;
  for (std::size_t i = 0; i + n <= reference.size(); ++i)
    ++ref_counts[std::vector<T>(reference.begin() + i, reference.begin() + i + n)];
  std::size_t matched = 0;
  for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
    auto it = ref_counts.find(std::vector<T>(candidate.begin() + i, candidate.begin() + i + n));
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  return matched;
}

inline std::size_t ngram_count(std::size_t length, std::size_t n) {
  return (n == 0 || length < n) ? 0 : length - n + 1;
}

template <typename T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

template <typename T>
RecallF1 rouge_n(std::span<const T> candidate, std::span<const T> reference, std::size_t n) {
  return from_counts(ngram_overlap(candidate, reference, n), ngram_count(candidate.size(), n),
                     ngram_count(reference.size(), n));
}

template <typename T>
RecallF1 rouge_l(std::span<const T> candidate, std::span<const T> reference) {
  return from_counts(lcs_length(candidate, reference), candidate.size(), reference.size());
}

using Tokens = std::vector<std::string>;

// Throws ContractViolation when n == 0.
RecallF1 rouge_n(const Tokens& candidate, const Tokens& reference, std::size_t n);
RecallF1 rouge_l(const Tokens& candidate, const Tokens& reference);
RougeScore score_pair(const Tokens& candidate, const Tokens& reference);

// Mean of per-pair scores. Throws ConfigError on an empty list.
RougeScore evaluate_corpus(std::span<const std::pair<Tokens, Tokens>> pairs);

// One-line JSON report, every component x100 with two decimals.
std::string report_json(const RougeScore& score);
// Human-readable table, same scaling.
std::string report_text(const RougeScore& score);

}  // namespace tsum::rouge
