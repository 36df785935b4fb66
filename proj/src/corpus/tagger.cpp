#include "tsum/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <initializer_list>
#include <string_view>
#include <utility>

#include "tsum/errors.hpp"

namespace tsum {

namespace {

void add_all(std::unordered_map<std::string, PosTag>& lex, PosTag tag, std::initializer_list<const char*> words) {
  for (const char* w : words) lex.emplace(w, tag);
}

std::unordered_map<std::string, PosTag> bundled_lexicon() {
  std::unordered_map<std::string, PosTag> lex;
  add_all(lex, PosTag::DET, {"the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any",
                             "no", "all", "both", "either", "neither", "another", "such"});
  add_all(lex, PosTag::ADP, {"of",      "in",      "on",    "at",      "by",     "for",   "with",  "from",
                             "to",      "into",    "onto",  "over",    "under",  "about", "after", "before",
                             "between", "through", "during", "without", "against", "among", "across", "along",
                             "around",  "behind",  "near",  "since",   "until",  "upon",  "within", "despite",
                             "toward",  "towards", "amid",  "via",     "per",    "than",  "off",   "beyond"});
  add_all(lex, PosTag::CONJ, {"and", "or", "but", "nor", "yet", "so", "because", "although", "though", "while",
                              "whereas", "if", "unless", "whether"});
  add_all(lex, PosTag::PRON, {"i",    "you",  "he",   "she",   "it",     "we",     "they",   "me",    "him",
                              "her",  "us",   "them", "my",    "your",   "his",    "its",    "our",   "their",
                              "who",  "whom", "whose", "which", "what",  "myself", "itself", "themselves",
                              "himself", "herself", "ourselves", "yourself", "someone", "anyone", "everyone",
                              "nobody", "something", "anything", "everything", "nothing"});
  add_all(lex, PosTag::PRT, {"not", "n't", "'s", "up", "out", "down", "away", "back"});
  add_all(lex, PosTag::VERB, {"is",    "are",   "was",   "were",   "be",    "been",   "being",  "am",
                              "has",   "have",  "had",   "having", "do",    "does",   "did",    "will",
                              "would", "shall", "should", "can",   "could", "may",    "might",  "must",
                              "say",   "says",  "said",  "make",   "made",  "take",   "took",   "taken",
                              "get",   "got",   "go",    "goes",   "went",  "gone",   "see",    "saw",
                              "seen",  "give",  "gave",  "given",  "come",  "came",   "know",   "knew",
                              "think", "thought", "tell", "told",  "find",  "found",  "win",    "won",
                              "lose",  "lost",  "hit",   "put",    "set",   "run",    "ran",    "sits",
                              "sit",   "sat",   "runs",  "meet",   "met",   "hold",   "held",   "keep",
                              "kept",  "leave", "left",  "begin",  "began", "seek",   "sought", "rise",
                              "rose",  "fall",  "fell",  "cut",    "buy",   "bought", "sell",   "sold",
                              "send",  "sent",  "vow",   "vows",   "urge",  "urges",  "kill",   "kills"});
  add_all(lex, PosTag::ADV, {"very",  "also",   "just",  "now",     "then",   "still",   "already", "again",
                             "never", "always", "often", "soon",    "here",   "there",   "too",     "only",
                             "even",  "almost", "quite", "rather",  "today",  "tomorrow", "yesterday", "later",
                             "ago",   "ever",   "once",  "perhaps", "nearly", "however"});
  add_all(lex, PosTag::ADJ, {"new",   "good",  "old",   "big",    "small",  "high",  "low",    "large",
                             "great", "major", "top",   "last",   "first",  "next",  "early",  "late",
                             "long",  "few",   "many",  "much",   "more",   "most",  "other",  "former",
                             "key",   "main",  "local", "foreign", "chinese", "american", "british", "french",
                             "german", "russian", "japanese", "european", "military", "public", "strong"});
  add_all(lex, PosTag::NOUN, {"cat",   "dog",    "man",   "woman",  "people", "year",   "day",    "week",
                              "month", "government", "president", "minister", "official", "officials",
                              "police", "country", "city",  "state",  "world",  "time",   "company", "market",
                              "percent", "talks", "war",   "peace",  "group",  "team",   "game",   "report",
                              "study", "patients", "river", "flood",  "floods", "soldiers", "nato", "union",
                              "bank",  "price",  "prices", "oil",   "election", "party",  "leader", "troops"});
  return lex;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_number(std::string_view s) {
  bool digit = false;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isdigit(c))
      digit = true;
    else if (ch != ',' && ch != '.' && ch != '-' && ch != '#')
      return false;
  }
  return digit;
}

bool is_punctuation(std::string_view s) {
  if (s == "-lrb-" || s == "-rrb-" || s == "-lsb-" || s == "-rsb-") return true;
  return std::all_of(s.begin(), s.end(), [](char ch) { return std::ispunct(static_cast<unsigned char>(ch)); });
}

std::optional<PosTag> by_suffix(std::string_view w) {
  static const std::pair<std::string_view, PosTag> rules[] = {
      {"ly", PosTag::ADV},    {"ing", PosTag::VERB},  {"ed", PosTag::VERB},   {"ize", PosTag::VERB},
      {"ise", PosTag::VERB},  {"ate", PosTag::VERB},  {"ify", PosTag::VERB},  {"ous", PosTag::ADJ},
      {"ful", PosTag::ADJ},   {"able", PosTag::ADJ},  {"ible", PosTag::ADJ},  {"ive", PosTag::ADJ},
      {"ical", PosTag::ADJ},  {"less", PosTag::ADJ},  {"ish", PosTag::ADJ},   {"ese", PosTag::ADJ},
      {"ian", PosTag::ADJ},   {"tion", PosTag::NOUN}, {"sion", PosTag::NOUN}, {"ment", PosTag::NOUN},
      {"ness", PosTag::NOUN}, {"ity", PosTag::NOUN},  {"ship", PosTag::NOUN}, {"ism", PosTag::NOUN},
      {"ist", PosTag::NOUN},  {"er", PosTag::NOUN},   {"or", PosTag::NOUN},   {"al", PosTag::ADJ},
  };
  for (const auto& [suffix, tag] : rules)
    if (ends_with(w, suffix)) return tag;
  return std::nullopt;
}

}  // namespace

LexiconTagger::LexiconTagger() : lexicon_(bundled_lexicon()), suffix_rules_(true) {}

LexiconTagger::LexiconTagger(std::unordered_map<std::string, PosTag> lexicon, bool suffix_rules)
    : lexicon_(std::move(lexicon)), suffix_rules_(suffix_rules) {}

std::optional<PosTag> LexiconTagger::tag_token(const std::string& token) const {
  if (auto it = lexicon_.find(token); it != lexicon_.end()) return it->second;
  if (is_number(token)) return PosTag::NUM;
  if (is_punctuation(token)) return PosTag::PUNC;
  if (suffix_rules_) return by_suffix(token);
  return std::nullopt;
}

std::vector<std::optional<PosTag>> LexiconTagger::tag(std::span<const std::string> tokens) const {
  std::vector<std::optional<PosTag>> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(tag_token(t));
  return out;
}

std::vector<PosTag> annotate_pos(std::span<const std::string> tokens, const PosTagger& tagger) {
  if (tokens.empty()) return {};
  auto raw = tagger.tag(tokens);
  require(raw.size() == tokens.size(), "POS tagger returned " + std::to_string(raw.size()) + " tags for " +
                                           std::to_string(tokens.size()) + " tokens");
  std::vector<PosTag> out;
  out.reserve(raw.size());
  for (const auto& t : raw) out.push_back(t.value_or(PosTag::X));
  return out;
}

}  // namespace tsum
