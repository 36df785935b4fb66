#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsum/corpus.hpp"

namespace tsum {

// Maps a token sequence to tags. A nullopt entry means the tagger could
// not decide for that token.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<std::optional<PosTag>> tag(std::span<const std::string> tokens) const = 0;
};

// Closed-class lexicon, number/punctuation shapes, then suffix rules.
class LexiconTagger : public PosTagger {
 public:
  // Bundled English lexicon with suffix rules enabled.
  LexiconTagger();
  LexiconTagger(std::unordered_map<std::string, PosTag> lexicon, bool suffix_rules);

  std::vector<std::optional<PosTag>> tag(std::span<const std::string> tokens) const override;
  std::optional<PosTag> tag_token(const std::string& token) const;

 private:
  std::unordered_map<std::string, PosTag> lexicon_;
  bool suffix_rules_ = true;
};

// Tags every token; undecided tokens become X. The result always has the
// input's length (a tagger that returns the wrong length is a contract
// violation).
std::vector<PosTag> annotate_pos(std::span<const std::string> tokens, const PosTagger& tagger);

}  // namespace tsum
