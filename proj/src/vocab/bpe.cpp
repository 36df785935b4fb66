#include "tsum/bpe.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "tsum/errors.hpp"

namespace tsum {

namespace {

constexpr std::string_view kMergesHeader = "#tsum-bpe v1";

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray continuation byte: treat as its own symbol
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Count-descending, then pair-ascending; the first element is the next merge.
struct ByCountThenPair {
  bool operator()(const std::pair<long, SymbolPair>& a, const std::pair<long, SymbolPair>& b) const {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  }
};

class PairCounts {
 public:
  void add(const SymbolPair& p, long delta) {
    if (delta == 0) return;
    long& c = counts_[p];
    if (c > 0) order_.erase({c, p});
    c += delta;
    if (c > 0)
      order_.insert({c, p});
    else
      counts_.erase(p);
  }
  bool empty() const { return order_.empty(); }
  const SymbolPair& best() const { return order_.begin()->second; }

 private:
  std::map<SymbolPair, long> counts_;
  std::set<std::pair<long, SymbolPair>, ByCountThenPair> order_;
};

void merge_in_place(std::vector<std::string>& symbols, const SymbolPair& pair) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == pair.first && symbols[i + 1] == pair.second) {
      out.push_back(pair.first + pair.second);
      ++i;
    } else {
      out.push_back(std::move(symbols[i]));
    }
  }
  symbols = std::move(out);
}

}  // namespace

std::vector<std::string> initial_symbols(std::string_view word, std::string_view marker) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size();) {
    const std::size_t n = std::min(utf8_length(static_cast<unsigned char>(word[i])), word.size() - i);
    out.emplace_back(word.substr(i, n));
    i += n;
  }
  if (!out.empty()) out.back() += marker;
  return out;
}

std::vector<std::string> apply_merges(std::vector<std::string> symbols, std::span<const SymbolPair> merges) {
  for (const auto& m : merges) merge_in_place(symbols, m);
  return symbols;
}

BpeModel::BpeModel(std::vector<SymbolPair> merges, Vocabulary subword_vocab, std::string marker)
    : merges_(std::move(merges)), vocab_(std::move(subword_vocab)), marker_(std::move(marker)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    if (!ranks_.emplace(merges_[i], i).second)
      throw DataError("duplicate BPE merge '" + merges_[i].first + " " + merges_[i].second + "'");
  }
}

std::size_t BpeModel::rank(const SymbolPair& pair) const {
  auto it = ranks_.find(pair);
  return it == ranks_.end() ? merges_.size() : it->second;
}

std::vector<std::string> BpeModel::segment(std::string_view word) const {
  auto symbols = initial_symbols(word, marker_);
  // Merging the lowest-ranked adjacent pair each round is equivalent to
  // applying the table in order: a merge can only create pairs whose own
  // rank is higher than its own.
  while (symbols.size() > 1) {
    std::size_t best_rank = merges_.size();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
      best_rank = std::min(best_rank, rank({symbols[i], symbols[i + 1]}));
    if (best_rank == merges_.size()) break;
    merge_in_place(symbols, merges_[best_rank]);
  }
  return symbols;
}

BpeModel bpe_learn(const std::map<std::string, std::size_t>& word_counts, std::size_t num_merges) {
  std::vector<std::vector<std::string>> words;
  std::vector<long> freq;
  for (const auto& [w, n] : word_counts) {
    if (w.empty() || n == 0) continue;
    words.push_back(initial_symbols(w));
    freq.push_back(static_cast<long>(n));
  }

  PairCounts counts;
  std::map<SymbolPair, std::set<std::size_t>> where;
  auto account = [&](std::size_t wi, long sign) {
    const auto& s = words[wi];
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      SymbolPair p{s[i], s[i + 1]};
      counts.add(p, sign * freq[wi]);
      if (sign > 0) where[p].insert(wi);
    }
  };
  for (std::size_t wi = 0; wi < words.size(); ++wi) account(wi, +1);

  std::vector<SymbolPair> merges;
  while (merges.size() < num_merges && !counts.empty()) {
    const SymbolPair best = counts.best();
    merges.push_back(best);
    const auto affected = where[best];
    for (std::size_t wi : affected) {
      account(wi, -1);
      merge_in_place(words[wi], best);
      account(wi, +1);
    }
    where.erase(best);
  }

  // Subword vocabulary: every base character in both forms (so any word
  // over the training charset round-trips), every merged symbol and the
  // bare marker, counted over the final segmentation.
  std::map<std::string, std::size_t> units;
  for (const auto& [w, n] : word_counts)
    for (auto s : initial_symbols(w)) {
      if (ends_with(s, kEndOfWord)) s.resize(s.size() - std::string_view(kEndOfWord).size());
      units.emplace(s, 0);
      units.emplace(s + std::string(kEndOfWord), 0);
    }
  for (const auto& m : merges) units.emplace(m.first + m.second, 0);
  units.emplace(std::string(kEndOfWord), 0);
  for (std::size_t wi = 0; wi < words.size(); ++wi)
    for (const auto& s : words[wi]) units[s] += static_cast<std::size_t>(freq[wi]);

  auto vocab = Vocabulary::from_counts(units, units.size() + kNumSpecials, 0);
  return BpeModel(std::move(merges), std::move(vocab));
}

BpeModel bpe_learn(std::span<const std::vector<std::string>> token_stream, std::size_t num_merges) {
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : token_stream)
    for (const auto& t : seq) ++counts[t];
  return bpe_learn(counts, num_merges);
}

std::vector<TokenId> bpe_encode(std::span<const std::string> tokens, const BpeModel& model) {
  std::vector<TokenId> ids;
  const auto& vocab = model.vocab();
  const TokenId bare_marker = vocab.id(model.marker());
  for (const auto& word : tokens) {
    for (const auto& unit : model.segment(word)) {
      if (auto id = vocab.find(unit)) {
        ids.push_back(*id);
      } else {
        ids.push_back(kUnkId);
        if (ends_with(unit, model.marker())) ids.push_back(bare_marker);
      }
    }
  }
  return ids;
}

std::vector<std::string> bpe_decode(std::span<const TokenId> ids, const BpeModel& model) {
  std::vector<std::string> words;
  std::string cur;
  bool open = false;
  const auto& marker = model.marker();
  for (TokenId id : ids) {
    if (!model.vocab().contains(id))
      throw DataError("subword id " + std::to_string(id) + " out of range for vocabulary of size " +
                      std::to_string(model.vocab().size()));
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    const std::string& unit = model.vocab().token(id);
    if (ends_with(unit, marker)) {
      cur.append(unit, 0, unit.size() - marker.size());
      words.push_back(std::move(cur));
      cur.clear();
      open = false;
    } else {
      cur += unit;
      open = true;
    }
  }
  if (open) words.push_back(std::move(cur));
  return words;
}

std::string BpeModel::serialize_merges() const {
  std::string out = std::string(kMergesHeader) + '\n';
  out += "num_merges " + std::to_string(merges_.size()) + '\n';
  out += "marker " + marker_ + '\n';
  for (const auto& [l, r] : merges_) out += l + ' ' + r + '\n';
  return out;
}

BpeModel BpeModel::deserialize(std::string_view merges_text, std::string_view vocab_text) {
  std::istringstream in{std::string(merges_text)};
  std::string line;
  if (!std::getline(in, line) || line != kMergesHeader) throw DataError("BPE file: missing '#tsum-bpe v1' header");
  std::size_t expected = 0;
  std::string marker;
  if (!std::getline(in, line) || line.rfind("num_merges ", 0) != 0) throw DataError("BPE file: missing num_merges");
  expected = std::stoull(line.substr(11));
  if (!std::getline(in, line) || line.rfind("marker ", 0) != 0) throw DataError("BPE file: missing marker");
  marker = line.substr(7);
  std::vector<SymbolPair> merges;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 == line.size() || line.find(' ', sp + 1) != std::string::npos)
      throw DataError("BPE file: bad merge line '" + line + "'");
    merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  if (merges.size() != expected)
    throw DataError("BPE file: header says " + std::to_string(expected) + " merges, found " +
                    std::to_string(merges.size()));
  return BpeModel(std::move(merges), Vocabulary::deserialize(vocab_text), marker);
}

void BpeModel::save(const std::filesystem::path& merges_path, const std::filesystem::path& vocab_path) const {
  std::ofstream out(merges_path);
  if (!out) throw DataError("cannot write " + merges_path.string());
  out << serialize_merges();
  vocab_.save(vocab_path);
}

BpeModel BpeModel::load(const std::filesystem::path& merges_path, const std::filesystem::path& vocab_path) {
  std::ifstream in(merges_path);
  if (!in) throw DataError("cannot open BPE merges " + merges_path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto vocab = Vocabulary::load(vocab_path);
  return deserialize(ss.str(), vocab.serialize());
}

}  // namespace tsum
