#include "tsum/pipeline/data.hpp"

#include <fstream>
#include <numeric>
#include <random>

#include "tsum/errors.hpp"

namespace tsum {

TextCodec TextCodec::words(Vocabulary vocab) {
  TextCodec c;
  c.vocab_ = std::move(vocab);
  return c;
}

TextCodec TextCodec::words_with_features(Vocabulary vocab, CorpusStats stats) {
  TextCodec c;
  c.vocab_ = std::move(vocab);
  c.stats_ = std::move(stats);
  return c;
}

TextCodec TextCodec::bpe(BpeModel model) {
  TextCodec c;
  c.bpe_ = std::move(model);
  return c;
}

std::vector<TokenId> TextCodec::encode(std::span<const std::string> tokens) const {
  return bpe_ ? bpe_encode(tokens, *bpe_) : vocab_.encode(tokens);
}

std::vector<std::string> TextCodec::decode(std::span<const TokenId> ids) const {
  if (bpe_) return bpe_decode(ids, *bpe_);
  std::vector<std::string> out;
  for (TokenId id : ids) {
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    if (!vocab_.contains(id)) throw DataError("decoded id " + std::to_string(id) + " outside the vocabulary");
    out.push_back(vocab_.token(id));
  }
  return out;
}

void TextCodec::annotate(Document& doc) const {
  require(stats_.has_value(), "annotate: codec has no corpus statistics");
  if (!doc.annotated()) tsum::annotate(doc, *stats_, tagger_);
}

Example TextCodec::to_example(const Document& doc, std::size_t max_positions) const {
  const auto target = encode(doc.target_tokens);
  if (!stats_) return make_example(encode(doc.source_tokens), {}, target, max_positions);

  Document d = doc;
  annotate(d);
  std::vector<TokenFeatures> features;
  features.reserve(d.source_tokens.size());
  for (std::size_t i = 0; i < d.source_tokens.size(); ++i)
    features.push_back({static_cast<std::size_t>(d.pos_tags[i]), d.tf_bins[i], d.idf_bins[i]});
  return make_example(encode(d.source_tokens), std::move(features), target, max_positions);
}

nlohmann::json TextCodec::to_json() const {
  nlohmann::json j;
  if (bpe_) {
    j["kind"] = "bpe";
    j["merges"] = bpe_->serialize_merges();
    j["vocab"] = bpe_->vocab().serialize();
  } else {
    j["kind"] = "words";
    j["vocab"] = vocab_.serialize();
  }
  if (stats_) j["stats"] = stats_to_json(*stats_);
  return j;
}

TextCodec TextCodec::from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    TextCodec c;
    if (kind == "bpe")
      c.bpe_ = BpeModel::deserialize(j.at("merges").get<std::string>(), j.at("vocab").get<std::string>());
    else if (kind == "words")
      c.vocab_ = Vocabulary::deserialize(j.at("vocab").get<std::string>());
    else
      throw DataError("unknown codec kind '" + kind + "'");
    if (j.contains("stats")) c.stats_ = stats_from_json(j.at("stats").get<std::string>(), "embedded corpus stats");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("embedded codec: ") + e.what());
  }
}

std::vector<Document> load_split(const std::filesystem::path& annotated, const std::string& split_name) {
  std::ifstream in(annotated);
  if (!in) throw DataError("cannot open " + annotated.string() + " (run preprocess first)");
  auto result = ingest(in);
  if (!result.errors.empty())
    throw DataError(annotated.string() + " line " + std::to_string(result.errors.front().line) + ": " +
                    result.errors.front().message);
  std::vector<Document> out;
  for (auto& d : result.documents)
    if (d.split == split_name) out.push_back(std::move(d));
  return out;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n_docs, std::size_t batch_size, std::uint64_t seed,
                                                    std::size_t epoch) {
  require(batch_size > 0, "batch_size must be positive");
  std::vector<std::size_t> order(n_docs);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ (0xA24BAED4963EE407ull * (epoch + 1)));
  for (std::size_t i = n_docs; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n_docs; i += batch_size)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n_docs, i + batch_size)));
  return batches;
}

}  // namespace tsum
