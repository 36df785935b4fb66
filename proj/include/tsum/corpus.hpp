#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsum {

// Coarse universal part-of-speech tag set.
enum class PosTag : std::uint8_t { ADJ, ADP, ADV, CONJ, DET, NOUN, NUM, PRON, PRT, VERB, PUNC, X };
inline constexpr std::size_t kNumPosTags = 12;

std::string_view to_string(PosTag tag);
std::optional<PosTag> parse_pos_tag(std::string_view name);

struct Document {
  std::string id;
  std::vector<std::string> source_tokens;
  std::vector<std::string> target_tokens;
  // Filled by annotation; aligned with source_tokens once annotated.
  std::vector<PosTag> pos_tags;
  std::vector<std::size_t> tf_bins;
  std::vector<std::size_t> idf_bins;
  // "train" / "valid" once split and written out; empty for raw input.
  std::string split;

  bool annotated() const {
    return pos_tags.size() == source_tokens.size() && tf_bins.size() == source_tokens.size() &&
           idf_bins.size() == source_tokens.size();
  }
};

// Lowercase, then split on whitespace.
std::vector<std::string> tokenize(std::string_view text);

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

// Reads line-delimited JSON records {"source": ..., "target": ..., "pos": [...]}.
// Annotated files written by write_annotated() are accepted as well.
class CorpusReader {
 public:
  CorpusReader(std::istream& in, std::string id_prefix = {});

  // Next well-formed, non-empty record. Malformed lines are recorded in
  // errors() and skipped; records with an empty source or target bump
  // skipped_empty().
  std::optional<Document> next();

  const std::vector<RecordError>& errors() const { return errors_; }
  std::size_t skipped_empty() const { return skipped_empty_; }
  std::size_t lines_read() const { return line_no_; }

 private:
  std::istream& in_;
  std::string id_prefix_;
  std::size_t line_no_ = 0;
  std::size_t skipped_empty_ = 0;
  std::vector<RecordError> errors_;
};

struct IngestResult {
  std::vector<Document> documents;
  std::size_t skipped_empty = 0;
  std::vector<RecordError> errors;
};

// Throws DataError when the file cannot be opened.
IngestResult ingest(const std::filesystem::path& path);
IngestResult ingest(std::istream& in);

// Parses one record; throws DataError naming the line on malformed input.
// Returns nullopt for an empty source or target.
std::optional<Document> parse_record(std::string_view line, std::size_t line_no, std::string id);

// Keeps the first occurrence of every (source, target) pair, in order.
std::vector<Document> deduplicate(std::vector<Document> docs);

struct Split {
  std::vector<Document> train;
  std::vector<Document> valid;
};

// Seeded random partition; both halves keep the input order.
// Throws ConfigError when n_valid > docs.size().
Split split(std::vector<Document> docs, std::size_t n_valid, std::uint64_t seed);

// One JSON line per document including pos / tf_bin / idf_bin when present.
void write_annotated(std::ostream& out, const Document& doc, std::string_view split_name = {});

}  // namespace tsum
