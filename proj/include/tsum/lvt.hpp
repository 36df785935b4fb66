#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "tsum/corpus.hpp"
#include "tsum/tensor.hpp"
#include "tsum/vocab.hpp"

namespace tsum {

// Which texts of a batch seed its vocabulary.
enum class LvtSource { Union, SourceOnly };

// Per-batch decoder vocabulary: specials, then batch tokens, then the most
// frequent remaining tokens.
class BatchVocab {
 public:
  BatchVocab() = default;
  explicit BatchVocab(std::vector<TokenId> local_to_global);

  std::size_t size() const { return local_to_global_.size(); }
  const std::vector<TokenId>& local_to_global() const { return local_to_global_; }
  TokenId global(TokenId local) const { return local_to_global_.at(static_cast<std::size_t>(local)); }
  bool contains(TokenId global) const { return global_to_local_.count(global) != 0; }
  // Throws ContractViolation when `global` is not a member.
  TokenId local(TokenId global) const;

  // Batch tokens that were placed before filling, and the fill count.
  std::size_t batch_types = 0;
  std::size_t fill_count = 0;
  bool truncated = false;

 private:
  std::vector<TokenId> local_to_global_;
  std::unordered_map<TokenId, TokenId> global_to_local_;
};

// Core construction over global id sequences (already UNK-mapped).
// Throws ConfigError when size < 4.
BatchVocab build_batch_vocab(std::span<const std::vector<TokenId>> sequences, const Vocabulary& full_vocab,
                             std::size_t size);

BatchVocab build_batch_vocab(std::span<const Document> batch, const Vocabulary& full_vocab, std::size_t size,
                             LvtSource source = LvtSource::Union);

std::vector<TokenId> remap_targets(std::span<const TokenId> targets, const BatchVocab& bv);

// Row i of the result is row local_to_global[i] of `weights`.
Matrix gather_rows(const Matrix& weights, const BatchVocab& bv);

// sink[local_to_global[i]] += local_grads[i]; every other row is untouched.
void scatter_row_gradients(Matrix& sink, const Matrix& local_grads, const BatchVocab& bv);

}  // namespace tsum
