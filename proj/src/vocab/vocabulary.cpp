#include "tsum/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tsum/errors.hpp"

namespace tsum {

Vocabulary::Vocabulary() {
  for (auto tok : {kPadToken, kUnkToken, kBosToken, kEosToken}) push(std::string(tok), 0);
}

void Vocabulary::push(std::string token, std::size_t freq) {
  token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
  id_to_token_.push_back(std::move(token));
  frequency_.push_back(freq);
}

Vocabulary Vocabulary::from_counts(const std::map<std::string, std::size_t>& counts, std::size_t max_size,
                                   std::size_t min_freq) {
  if (max_size < kNumSpecials)
    throw ConfigError("vocabulary max_size " + std::to_string(max_size) + " cannot hold the 4 special tokens");
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (const auto& [tok, n] : counts) {
    if (n < min_freq) continue;
    if (tok == kPadToken || tok == kUnkToken || tok == kBosToken || tok == kEosToken) continue;
    entries.emplace_back(tok, n);
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (entries.size() > max_size - kNumSpecials) entries.resize(max_size - kNumSpecials);
  Vocabulary v;
  for (auto& [tok, n] : entries) v.push(std::move(tok), n);
  return v;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const { return find(token).value_or(kUnkId); }

const std::string& Vocabulary::token(TokenId id) const {
  require(contains(id), "token id " + std::to_string(id) + " out of range for vocabulary of size " +
                            std::to_string(size()));
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < size(); ++i) out += id_to_token_[i] + '\t' + std::to_string(frequency_[i]) + '\n';
  return out;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
  Vocabulary v;
  v.id_to_token_.clear();
  v.frequency_.clear();
  v.token_to_id_.clear();
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0)
      throw DataError("vocabulary line " + std::to_string(line_no) + ": expected 'token<TAB>frequency'");
    std::size_t freq = 0;
    try {
      freq = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": bad frequency");
    }
    std::string tok = line.substr(0, tab);
    if (v.token_to_id_.count(tok)) throw DataError("vocabulary line " + std::to_string(line_no) + ": duplicate token");
    v.push(std::move(tok), freq);
  }
  const std::string_view specials[] = {kPadToken, kUnkToken, kBosToken, kEosToken};
  for (std::size_t i = 0; i < kNumSpecials; ++i)
    if (v.size() <= i || v.id_to_token_[i] != specials[i])
      throw DataError("vocabulary must start with <pad> <unk> <s> </s>");
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize();
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

Vocabulary build_word_vocab(std::span<const Document> train, std::size_t max_size, std::size_t min_freq) {
  if (train.empty()) throw ConfigError("cannot build a vocabulary from an empty training set");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : train) {
    for (const auto& t : doc.source_tokens) ++counts[t];
    for (const auto& t : doc.target_tokens) ++counts[t];
  }
  return Vocabulary::from_counts(counts, max_size, min_freq);
}

}  // namespace tsum
