#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsum/bpe.hpp"
#include "tsum/corpus.hpp"
#include "tsum/model/transformer.hpp"
#include "tsum/pipeline/experiment.hpp"
#include "tsum/stats.hpp"
#include "tsum/tagger.hpp"
#include "tsum/vocab.hpp"

namespace tsum {

// Everything needed to turn text into model ids and back for one variant:
// the word vocabulary or BPE model, and corpus statistics for FRE inputs.
class TextCodec {
 public:
  static TextCodec words(Vocabulary vocab);
  static TextCodec words_with_features(Vocabulary vocab, CorpusStats stats);
  static TextCodec bpe(BpeModel model);

  bool is_bpe() const { return bpe_.has_value(); }
  bool has_features() const { return stats_.has_value(); }
  // Vocabulary over model ids (word or subword).
  const Vocabulary& vocab() const { return bpe_ ? bpe_->vocab() : vocab_; }
  const CorpusStats& stats() const { return *stats_; }
  std::size_t vocab_size() const { return vocab().size(); }

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  // Fills tf/idf bins (and POS tags when missing) on an unannotated document.
  void annotate(Document& doc) const;
  // Source ids plus aligned features. BPE sources never carry features.
  Example to_example(const Document& doc, std::size_t max_positions) const;

  // Embedded in checkpoints so evaluation and summarization need no other file.
  nlohmann::json to_json() const;
  static TextCodec from_json(const nlohmann::json& j);

 private:
  Vocabulary vocab_;
  std::optional<BpeModel> bpe_;
  std::optional<CorpusStats> stats_;
  LexiconTagger tagger_;
};

// Reads the annotated corpus written by preprocess and returns the
// documents of one split ("train" or "valid").
std::vector<Document> load_split(const std::filesystem::path& annotated, const std::string& split_name);

// Batches of document indices for one epoch: a seeded shuffle cut into
// consecutive runs of batch_size (the last batch may be shorter).
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n_docs, std::size_t batch_size, std::uint64_t seed,
                                                    std::size_t epoch);

}  // namespace tsum
