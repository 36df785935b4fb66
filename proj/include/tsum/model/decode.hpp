#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsum/model/transformer.hpp"

namespace tsum {

enum class DecodeStrategy { Greedy, Beam };

struct DecodeOptions {
  DecodeStrategy strategy = DecodeStrategy::Beam;
  std::size_t beam_width = 4;
  std::size_t max_len = 30;

  // Throws ConfigError when max_len < 1 or beam_width < 1.
  void validate() const;
};

DecodeStrategy parse_strategy(const std::string& name);

// Generated tokens exclude BOS and EOS. `finished` is set when EOS was
// emitted before max_len.
struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  bool finished = false;

  // Length-normalized log-probability: EOS counts as a generated token.
  double score() const;
};

// PAD and BOS are never generated, and EOS never first. Decoding always
// uses the full vocabulary.
Hypothesis greedy_decode(const Example& source, const Model& model, std::size_t max_len);

// Keeps `width` live hypotheses and returns the best length-normalized one
// among the finished hypotheses, those still live at max_len, and the
// greedy hypothesis. Width 1 reproduces greedy decoding.
Hypothesis beam_decode(const Example& source, const Model& model, std::size_t width, std::size_t max_len);

Hypothesis decode(const Example& source, const Model& model, const DecodeOptions& options);

// Log-probability of a fixed continuation under the model (for checking
// search results).
double sequence_log_prob(const Example& source, const Model& model, std::span<const TokenId> tokens, bool finished);

}  // namespace tsum
