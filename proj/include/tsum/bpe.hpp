#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsum/vocab.hpp"

namespace tsum {

using SymbolPair = std::pair<std::string, std::string>;

inline constexpr std::string_view kEndOfWord = "</w>";

// Learned merge table plus the vocabulary over the resulting subword units.
// Immutable after construction.
class BpeModel {
 public:
  BpeModel() = default;
  BpeModel(std::vector<SymbolPair> merges, Vocabulary subword_vocab, std::string marker = std::string(kEndOfWord));

  const std::vector<SymbolPair>& merges() const { return merges_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::string& marker() const { return marker_; }
  // Rank of a pair in the merge table, or merges().size() when absent.
  std::size_t rank(const SymbolPair& pair) const;

  // Subword strings for one word, merges applied lowest rank first.
  std::vector<std::string> segment(std::string_view word) const;

  void save(const std::filesystem::path& merges_path, const std::filesystem::path& vocab_path) const;
  static BpeModel load(const std::filesystem::path& merges_path, const std::filesystem::path& vocab_path);
  std::string serialize_merges() const;
  static BpeModel deserialize(std::string_view merges_text, std::string_view vocab_text);

 private:
  std::vector<SymbolPair> merges_;
  Vocabulary vocab_;
  std::string marker_ = std::string(kEndOfWord);
  std::map<SymbolPair, std::size_t> ranks_;
};

// Splits a word into UTF-8 characters and attaches the end-of-word marker
// to the last one.
std::vector<std::string> initial_symbols(std::string_view word, std::string_view marker = kEndOfWord);

// Applies `merges` in order, each over the whole sequence left to right.
std::vector<std::string> apply_merges(std::vector<std::string> symbols, std::span<const SymbolPair> merges);

// Greedy most-frequent-pair learning over word types. Ties go to the
// lexicographically smallest (left, right) pair. Stops early when no pair
// is left.
BpeModel bpe_learn(const std::map<std::string, std::size_t>& word_counts, std::size_t num_merges);
BpeModel bpe_learn(std::span<const std::vector<std::string>> token_stream, std::size_t num_merges);

// Unknown characters map to UNK; an unknown final character becomes UNK
// followed by the bare marker so word boundaries survive.
std::vector<TokenId> bpe_encode(std::span<const std::string> tokens, const BpeModel& model);

// Concatenates subwords, ending a word at every marker. PAD/BOS/EOS are
// skipped. Throws DataError for ids outside the subword vocabulary.
std::vector<std::string> bpe_decode(std::span<const TokenId> ids, const BpeModel& model);

}  // namespace tsum
