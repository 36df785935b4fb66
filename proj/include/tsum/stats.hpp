#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsum/corpus.hpp"
#include "tsum/tagger.hpp"

namespace tsum {

// tf(t, d) = count(t, d) / len(d)
double term_frequency(std::size_t count, std::size_t doc_length);
// idf(t) = 1 + ln(N / (1 + df(t)))
double inverse_document_frequency(std::size_t num_documents, std::size_t document_frequency);

// Equal-frequency cut points of `values` for n_bins bins, deduplicated so
// the list is strictly increasing. May hold fewer than n_bins - 1 entries.
std::vector<double> quantile_boundaries(std::vector<double> values, std::size_t n_bins);
// Number of boundaries <= value, i.e. a bin in [0, boundaries.size()].
std::size_t bin_index(std::span<const double> boundaries, double value);

struct CorpusStats {
  std::size_t num_documents = 0;
  std::size_t n_tf_bins = 0;
  std::size_t n_idf_bins = 0;
  // Counts over source texts of the training split.
  std::map<std::string, std::size_t> document_frequency;
  std::vector<double> tf_bin_boundaries;
  std::vector<double> idf_bin_boundaries;

  double idf(const std::string& term) const;
  // Values outside the observed range clamp to the first or last bin.
  std::size_t tf_bin(double tf) const;
  std::size_t idf_bin(double idf) const;

  bool operator==(const CorpusStats&) const = default;
};

// Partial statistics over a shard of documents. Merging is commutative;
// quantiles are only taken in finish(), after every shard is merged.
class StatsAccumulator {
 public:
  void add(const Document& doc);
  void merge(const StatsAccumulator& other);
  CorpusStats finish(std::size_t n_tf_bins, std::size_t n_idf_bins) const;

 private:
  std::size_t num_documents_ = 0;
  std::map<std::string, std::size_t> df_;
  std::map<std::string, std::size_t> occurrences_;
  std::vector<double> tf_values_;
};

// Throws ConfigError on an empty training set or zero bins.
// `shards` > 1 splits the documents across threads; the result is identical.
CorpusStats compute_corpus_stats(std::span<const Document> train, std::size_t n_tf_bins, std::size_t n_idf_bins,
                                 std::size_t shards = 1);

// Fills pos_tags (unless already supplied), tf_bins and idf_bins.
void annotate(Document& doc, const CorpusStats& stats, const PosTagger& tagger);

std::string stats_to_json(const CorpusStats& stats);
// Throws DataError on malformed input; `origin` names the source in messages.
CorpusStats stats_from_json(std::string_view text, const std::string& origin = "corpus stats");
void save_stats(const CorpusStats& stats, const std::filesystem::path& path);
CorpusStats load_stats(const std::filesystem::path& path);

}  // namespace tsum
