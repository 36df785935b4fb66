#include "tsum/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "tsum/errors.hpp"

namespace tsum {

namespace {

constexpr const char* kStatsFormat = "tsum-corpus-stats";
constexpr int kStatsVersion = 1;

// Sorted by term so the order of tf values does not depend on hashing.
std::map<std::string, std::size_t> term_counts(const std::vector<std::string>& tokens) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tokens) ++counts[t];
  return counts;
}

}  // namespace

double term_frequency(std::size_t count, std::size_t doc_length) {
  require(doc_length > 0, "term_frequency of an empty document");
  return static_cast<double>(count) / static_cast<double>(doc_length);
}

double inverse_document_frequency(std::size_t num_documents, std::size_t document_frequency) {
  return 1.0 + std::log(static_cast<double>(num_documents) / (1.0 + static_cast<double>(document_frequency)));
}

std::vector<double> quantile_boundaries(std::vector<double> values, std::size_t n_bins) {
  std::vector<double> cuts;
  if (values.empty() || n_bins < 2) return cuts;
  std::sort(values.begin(), values.end());
  for (std::size_t k = 1; k < n_bins; ++k) {
    const double cut = values[k * values.size() / n_bins];
    if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
  }
  return cuts;
}

std::size_t bin_index(std::span<const double> boundaries, double value) {
  return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), value) - boundaries.begin());
}

double CorpusStats::idf(const std::string& term) const {
  auto it = document_frequency.find(term);
  return inverse_document_frequency(num_documents, it == document_frequency.end() ? 0 : it->second);
}

std::size_t CorpusStats::tf_bin(double tf) const {
  return std::min(bin_index(tf_bin_boundaries, tf), n_tf_bins - 1);
}

std::size_t CorpusStats::idf_bin(double idf) const {
  return std::min(bin_index(idf_bin_boundaries, idf), n_idf_bins - 1);
}

void StatsAccumulator::add(const Document& doc) {
  ++num_documents_;
  const auto counts = term_counts(doc.source_tokens);
  for (const auto& [term, count] : counts) {
    ++df_[term];
    occurrences_[term] += count;
    const double tf = term_frequency(count, doc.source_tokens.size());
    tf_values_.insert(tf_values_.end(), count, tf);
  }
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  num_documents_ += other.num_documents_;
  for (const auto& [term, n] : other.df_) df_[term] += n;
  for (const auto& [term, n] : other.occurrences_) occurrences_[term] += n;
  tf_values_.insert(tf_values_.end(), other.tf_values_.begin(), other.tf_values_.end());
}

CorpusStats StatsAccumulator::finish(std::size_t n_tf_bins, std::size_t n_idf_bins) const {
  if (num_documents_ == 0) throw ConfigError("corpus statistics need a non-empty training set");
  if (n_tf_bins == 0 || n_idf_bins == 0) throw ConfigError("bin counts must be positive");
  CorpusStats stats;
  stats.num_documents = num_documents_;
  stats.n_tf_bins = n_tf_bins;
  stats.n_idf_bins = n_idf_bins;
  stats.document_frequency = df_;
  stats.tf_bin_boundaries = quantile_boundaries(tf_values_, n_tf_bins);

  // One idf value per source token occurrence, matching how tf is sampled.
  std::vector<double> idf_values;
  for (const auto& [term, n] : occurrences_)
    idf_values.insert(idf_values.end(), n, inverse_document_frequency(num_documents_, df_.at(term)));
  stats.idf_bin_boundaries = quantile_boundaries(std::move(idf_values), n_idf_bins);
  return stats;
}

CorpusStats compute_corpus_stats(std::span<const Document> train, std::size_t n_tf_bins, std::size_t n_idf_bins,
                                 std::size_t shards) {
  if (train.empty()) throw ConfigError("corpus statistics need a non-empty training set");
  shards = std::clamp<std::size_t>(shards, 1, train.size());
  std::vector<StatsAccumulator> parts(shards);
  const auto n_shards = static_cast<std::ptrdiff_t>(shards);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < n_shards; ++s) {
    const std::size_t begin = train.size() * static_cast<std::size_t>(s) / shards;
    const std::size_t end = train.size() * static_cast<std::size_t>(s + 1) / shards;
    for (std::size_t i = begin; i < end; ++i) parts[static_cast<std::size_t>(s)].add(train[i]);
  }
  for (std::size_t s = 1; s < shards; ++s) parts[0].merge(parts[s]);
  return parts[0].finish(n_tf_bins, n_idf_bins);
}

void annotate(Document& doc, const CorpusStats& stats, const PosTagger& tagger) {
  if (doc.pos_tags.size() != doc.source_tokens.size()) doc.pos_tags = annotate_pos(doc.source_tokens, tagger);
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : doc.source_tokens) ++counts[t];
  doc.tf_bins.clear();
  doc.idf_bins.clear();
  for (const auto& t : doc.source_tokens) {
    doc.tf_bins.push_back(stats.tf_bin(term_frequency(counts[t], doc.source_tokens.size())));
    doc.idf_bins.push_back(stats.idf_bin(stats.idf(t)));
  }
}

std::string stats_to_json(const CorpusStats& stats) {
  nlohmann::json j;
  j["format"] = kStatsFormat;
  j["version"] = kStatsVersion;
  j["num_documents"] = stats.num_documents;
  j["n_tf_bins"] = stats.n_tf_bins;
  j["n_idf_bins"] = stats.n_idf_bins;
  j["tf_bin_boundaries"] = stats.tf_bin_boundaries;
  j["idf_bin_boundaries"] = stats.idf_bin_boundaries;
  j["document_frequency"] = stats.document_frequency;
  return j.dump(1);
}

CorpusStats stats_from_json(std::string_view text, const std::string& origin) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != kStatsFormat) throw DataError(origin + " is not a corpus stats file");
    if (j.at("version") != kStatsVersion)
      throw DataError(origin + ": unsupported stats version " + j.at("version").dump());
    CorpusStats stats;
    stats.num_documents = j.at("num_documents").get<std::size_t>();
    stats.n_tf_bins = j.at("n_tf_bins").get<std::size_t>();
    stats.n_idf_bins = j.at("n_idf_bins").get<std::size_t>();
    stats.tf_bin_boundaries = j.at("tf_bin_boundaries").get<std::vector<double>>();
    stats.idf_bin_boundaries = j.at("idf_bin_boundaries").get<std::vector<double>>();
    stats.document_frequency = j.at("document_frequency").get<std::map<std::string, std::size_t>>();
    if (stats.n_tf_bins == 0 || stats.n_idf_bins == 0) throw DataError(origin + ": zero bin count");
    return stats;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(origin + ": " + e.what());
  }
}

void save_stats(const CorpusStats& stats, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << stats_to_json(stats) << '\n';
}

CorpusStats load_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus stats " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return stats_from_json(buf.str(), path.string());
}

}  // namespace tsum
