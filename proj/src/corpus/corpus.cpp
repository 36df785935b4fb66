#include "tsum/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "tsum/errors.hpp"

namespace tsum {

namespace {

constexpr std::array<std::string_view, kNumPosTags> kTagNames = {
    "ADJ", "ADP", "ADV", "CONJ", "DET", "NOUN", "NUM", "PRON", "PRT", "VERB", "PUNC", "X"};

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string record_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

}  // namespace

std::string_view to_string(PosTag tag) { return kTagNames[static_cast<std::size_t>(tag)]; }

std::optional<PosTag> parse_pos_tag(std::string_view name) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i)
    if (kTagNames[i] == name) return static_cast<PosTag>(i);
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::optional<Document> parse_record(std::string_view line, std::size_t line_no, std::string id) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(record_error(line_no, std::string("invalid JSON: ") + e.what()));
  }
  if (!j.is_object()) throw DataError(record_error(line_no, "record is not an object"));
  for (const char* key : {"source", "target"})
    if (!j.contains(key) || !j[key].is_string())
      throw DataError(record_error(line_no, std::string("missing string field '") + key + "'"));

  Document doc;
  doc.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : std::move(id);
  doc.source_tokens = tokenize(j["source"].get<std::string>());
  doc.target_tokens = tokenize(j["target"].get<std::string>());
  if (doc.source_tokens.empty() || doc.target_tokens.empty()) return std::nullopt;

  if (j.contains("pos")) {
    const auto& pos = j["pos"];
    if (!pos.is_array() || pos.size() != doc.source_tokens.size())
      throw DataError(record_error(line_no, "'pos' must be a list aligned with the source tokens"));
    for (const auto& t : pos) {
      auto tag = t.is_string() ? parse_pos_tag(t.get<std::string>()) : std::nullopt;
      if (!tag) throw DataError(record_error(line_no, "unknown POS tag " + t.dump()));
      doc.pos_tags.push_back(*tag);
    }
  }
  for (auto [key, dest] : {std::pair{"tf_bin", &doc.tf_bins}, std::pair{"idf_bin", &doc.idf_bins}}) {
    if (!j.contains(key)) continue;
    const auto& bins = j[key];
    if (!bins.is_array() || bins.size() != doc.source_tokens.size())
      throw DataError(record_error(line_no, std::string("'") + key + "' must be aligned with the source tokens"));
    for (const auto& b : bins) {
      if (!b.is_number_unsigned()) throw DataError(record_error(line_no, std::string("bad bin in '") + key + "'"));
      dest->push_back(b.get<std::size_t>());
    }
  }
  if (j.contains("split") && j["split"].is_string()) doc.split = j["split"].get<std::string>();
  return doc;
}

CorpusReader::CorpusReader(std::istream& in, std::string id_prefix) : in_(in), id_prefix_(std::move(id_prefix)) {}

std::optional<Document> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto doc = parse_record(line, line_no_, id_prefix_ + std::to_string(line_no_));
      if (doc) return doc;
      ++skipped_empty_;
    } catch (const DataError& e) {
      errors_.push_back({line_no_, e.what()});
    }
  }
  return std::nullopt;
}

IngestResult ingest(std::istream& in) {
  CorpusReader reader(in);
  IngestResult result;
  while (auto doc = reader.next()) result.documents.push_back(std::move(*doc));
  result.skipped_empty = reader.skipped_empty();
  result.errors = reader.errors();
  return result;
}

IngestResult ingest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  return ingest(in);
}

std::vector<Document> deduplicate(std::vector<Document> docs) {
  std::unordered_set<std::string> seen;
  std::vector<Document> out;
  out.reserve(docs.size());
  for (auto& doc : docs) {
    // '\t' never occurs inside a token, so the key is unambiguous.
    std::string key = join(doc.source_tokens) + '\t' + join(doc.target_tokens);
    if (seen.insert(std::move(key)).second) out.push_back(std::move(doc));
  }
  return out;
}

Split split(std::vector<Document> docs, std::size_t n_valid, std::uint64_t seed) {
  if (n_valid > docs.size())
    throw ConfigError("n_valid (" + std::to_string(n_valid) + ") exceeds the number of documents (" +
                      std::to_string(docs.size()) + ")");
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  // Explicit Fisher-Yates so the permutation does not depend on the
  // standard library's shuffle.
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  std::vector<char> is_valid(docs.size(), 0);
  for (std::size_t i = 0; i < n_valid; ++i) is_valid[order[i]] = 1;
  Split out;
  out.valid.reserve(n_valid);
  out.train.reserve(docs.size() - n_valid);
  for (std::size_t i = 0; i < docs.size(); ++i)
    (is_valid[i] ? out.valid : out.train).push_back(std::move(docs[i]));
  return out;
}

void write_annotated(std::ostream& out, const Document& doc, std::string_view split_name) {
  nlohmann::json j;
  j["id"] = doc.id;
  j["source"] = join(doc.source_tokens);
  j["target"] = join(doc.target_tokens);
  if (!doc.pos_tags.empty()) {
    auto& pos = j["pos"] = nlohmann::json::array();
    for (auto t : doc.pos_tags) pos.push_back(std::string(to_string(t)));
  }
  if (!doc.tf_bins.empty()) j["tf_bin"] = doc.tf_bins;
  if (!doc.idf_bins.empty()) j["idf_bin"] = doc.idf_bins;
  if (!split_name.empty()) j["split"] = std::string(split_name);
  out << j.dump() << '\n';
}

}  // namespace tsum
