#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tsum/corpus.hpp"

namespace tsum {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kBosId = 2;
inline constexpr TokenId kEosId = 3;
inline constexpr std::size_t kNumSpecials = 4;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

inline bool is_special(TokenId id) { return id >= 0 && id < static_cast<TokenId>(kNumSpecials); }

// Token <-> id map. Ids 0..3 are PAD, UNK, BOS, EOS; the remaining ids are
// ordered by descending frequency, ties broken lexicographically.
class Vocabulary {
 public:
  Vocabulary();

  // Keeps tokens with count >= min_freq, then the max_size - 4 most
  // frequent. Special token strings in `counts` are ignored.
  // Throws ConfigError when max_size < 4.
  static Vocabulary from_counts(const std::map<std::string, std::size_t>& counts, std::size_t max_size,
                                std::size_t min_freq);

  std::size_t size() const { return id_to_token_.size(); }
  std::optional<TokenId> find(std::string_view token) const;
  // UNK for unknown tokens.
  TokenId id(std::string_view token) const;
  // Throws ContractViolation for an out-of-range id.
  const std::string& token(TokenId id) const;
  std::size_t frequency(TokenId id) const { return frequency_.at(static_cast<std::size_t>(id)); }
  bool contains(TokenId id) const { return id >= 0 && static_cast<std::size_t>(id) < size(); }

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  // Lines "token\tfrequency" in id order.
  std::string serialize() const;
  static Vocabulary deserialize(std::string_view text);

  bool operator==(const Vocabulary& other) const {
    return id_to_token_ == other.id_to_token_ && frequency_ == other.frequency_;
  }

 private:
  void push(std::string token, std::size_t freq);

  std::vector<std::string> id_to_token_;
  std::vector<std::size_t> frequency_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

// Counts source and target tokens of the training documents.
// Throws ConfigError on an empty training set or max_size < 4.
Vocabulary build_word_vocab(std::span<const Document> train, std::size_t max_size, std::size_t min_freq = 1);

}  // namespace tsum
