#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tsum/corpus.hpp"
#include "tsum/tensor.hpp"

namespace tsum {

// Spans of the encoder input vector: word | POS | TF | IDF, in that order.
struct FeatureLayout {
  std::size_t word_dim = 0;
  std::size_t pos_dim = kNumPosTags;
  std::size_t tf_dim = 10;
  std::size_t idf_dim = 10;

  std::size_t concat_dim() const { return word_dim + pos_dim + tf_dim + idf_dim; }
  std::size_t pos_offset() const { return word_dim; }
  std::size_t tf_offset() const { return word_dim + pos_dim; }
  std::size_t idf_offset() const { return word_dim + pos_dim + tf_dim; }
  std::size_t feature_dim() const { return pos_dim + tf_dim + idf_dim; }

  // Shrinks the word span so concat_dim == hidden. Throws ConfigError when
  // the one-hot spans alone do not fit.
  static FeatureLayout fit_to_hidden(std::size_t hidden, std::size_t n_tf_bins, std::size_t n_idf_bins);
  static FeatureLayout with_word_dim(std::size_t word_dim, std::size_t n_tf_bins, std::size_t n_idf_bins);

  bool operator==(const FeatureLayout&) const = default;
};

struct SharedBpe {
  bool operator==(const SharedBpe&) const = default;
};
struct SeparateWord {
  bool operator==(const SeparateWord&) const = default;
};
struct FreFitToHidden {
  FeatureLayout layout;
  bool operator==(const FreFitToHidden&) const = default;
};
// The concat_dim x hidden map itself is a model parameter ("embed.fre_map").
struct FreLinearMapToHidden {
  FeatureLayout layout;
  std::size_t hidden = 0;
  bool operator==(const FreLinearMapToHidden&) const = default;
};

using EmbeddingVariant = std::variant<SharedBpe, SeparateWord, FreFitToHidden, FreLinearMapToHidden>;

std::string variant_name(const EmbeddingVariant& v);
const FeatureLayout* feature_layout(const EmbeddingVariant& v);

// Per-token categorical features of an encoder input.
struct TokenFeatures {
  std::size_t pos = 0;
  std::size_t tf_bin = 0;
  std::size_t idf_bin = 0;
};

// Throws ContractViolation when index >= size.
std::vector<double> one_hot(std::size_t index, std::size_t size);

// Throws ContractViolation on a word-embedding length or feature index
// that does not fit the layout.
std::vector<double> assemble_fre_vector(std::span<const double> word_emb, const TokenFeatures& features,
                                        const FeatureLayout& layout);

// Row-wise assembly for a whole sequence: word_rows is T x word_dim.
Matrix assemble_fre_rows(const Matrix& word_rows, std::span<const TokenFeatures> features,
                         const FeatureLayout& layout);

// Fit-to-hidden: identity after a length check.
std::vector<double> project_to_hidden(std::span<const double> concat, const FreFitToHidden& variant);
// Linear map to hidden: concat * map with no bias; map is concat_dim x hidden.
std::vector<double> project_to_hidden(std::span<const double> concat, const FreLinearMapToHidden& variant,
                                      const Matrix& map);

}  // namespace tsum
