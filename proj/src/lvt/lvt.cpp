#include "tsum/lvt.hpp"

#include <algorithm>
#include <set>

#include "tsum/errors.hpp"

namespace tsum {

namespace {

// Descending global frequency, ties by ascending id.
std::vector<TokenId> by_frequency(std::vector<TokenId> ids, const Vocabulary& vocab) {
  std::sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) {
    const auto fa = vocab.frequency(a), fb = vocab.frequency(b);
    return fa != fb ? fa > fb : a < b;
  });
  return ids;
}

}  // namespace

BatchVocab::BatchVocab(std::vector<TokenId> local_to_global) : local_to_global_(std::move(local_to_global)) {
  for (std::size_t i = 0; i < local_to_global_.size(); ++i)
    require(global_to_local_.emplace(local_to_global_[i], static_cast<TokenId>(i)).second,
            "duplicate id " + std::to_string(local_to_global_[i]) + " in batch vocabulary");
}

TokenId BatchVocab::local(TokenId global) const {
  auto it = global_to_local_.find(global);
  require(it != global_to_local_.end(), "token id " + std::to_string(global) + " is not in the batch vocabulary");
  return it->second;
}

BatchVocab build_batch_vocab(std::span<const std::vector<TokenId>> sequences, const Vocabulary& full_vocab,
                             std::size_t size) {
  if (size < kNumSpecials)
    throw ConfigError("batch vocabulary size " + std::to_string(size) + " cannot hold the 4 special tokens");

  std::set<TokenId> seen;
  for (const auto& seq : sequences)
    for (TokenId id : seq) {
      require(full_vocab.contains(id), "token id " + std::to_string(id) + " outside the full vocabulary");
      if (!is_special(id)) seen.insert(id);
    }
  auto batch_ids = by_frequency({seen.begin(), seen.end()}, full_vocab);

  std::vector<TokenId> ids;
  ids.reserve(std::min(size, full_vocab.size()));
  for (std::size_t i = 0; i < kNumSpecials; ++i) ids.push_back(static_cast<TokenId>(i));

  const std::size_t room = size - kNumSpecials;
  const bool truncated = batch_ids.size() > room;
  if (truncated) batch_ids.resize(room);
  ids.insert(ids.end(), batch_ids.begin(), batch_ids.end());

  std::size_t fill = 0;
  if (ids.size() < size) {
    std::vector<TokenId> rest;
    for (std::size_t g = kNumSpecials; g < full_vocab.size(); ++g)
      if (!seen.count(static_cast<TokenId>(g))) rest.push_back(static_cast<TokenId>(g));
    rest = by_frequency(std::move(rest), full_vocab);
    for (TokenId g : rest) {
      if (ids.size() >= size) break;
      ids.push_back(g);
      ++fill;
    }
  }

  BatchVocab bv(std::move(ids));
  bv.batch_types = batch_ids.size();
  bv.fill_count = fill;
  bv.truncated = truncated;
  return bv;
}

BatchVocab build_batch_vocab(std::span<const Document> batch, const Vocabulary& full_vocab, std::size_t size,
                             LvtSource source) {
  std::vector<std::vector<TokenId>> seqs;
  for (const auto& doc : batch) {
    seqs.push_back(full_vocab.encode(doc.source_tokens));
    if (source == LvtSource::Union) seqs.push_back(full_vocab.encode(doc.target_tokens));
  }
  return build_batch_vocab(seqs, full_vocab, size);
}

std::vector<TokenId> remap_targets(std::span<const TokenId> targets, const BatchVocab& bv) {
  std::vector<TokenId> out;
  out.reserve(targets.size());
  for (TokenId t : targets) out.push_back(bv.local(t));
  return out;
}

Matrix gather_rows(const Matrix& weights, const BatchVocab& bv) {
  Matrix out(bv.size(), weights.cols());
  for (std::size_t i = 0; i < bv.size(); ++i) {
    const auto g = static_cast<std::size_t>(bv.local_to_global()[i]);
    require(g < weights.rows(), "gather_rows: id " + std::to_string(g) + " outside weight matrix with " +
                                    std::to_string(weights.rows()) + " rows");
    std::copy_n(weights.row(g).data(), weights.cols(), out.row(i).data());
  }
  return out;
}

void scatter_row_gradients(Matrix& sink, const Matrix& local_grads, const BatchVocab& bv) {
  require(local_grads.rows() == bv.size() && local_grads.cols() == sink.cols(),
          "scatter_row_gradients: local gradient shape does not match the batch vocabulary");
  for (std::size_t i = 0; i < bv.size(); ++i) {
    const auto g = static_cast<std::size_t>(bv.local_to_global()[i]);
    require(g < sink.rows(), "scatter_row_gradients: id outside the gradient sink");
    auto dst = sink.row(g);
    auto src = local_grads.row(i);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
}

}  // namespace tsum
