#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "tsum/pipeline/experiment.hpp"
#include "tsum/rouge.hpp"

namespace tsum {

// Each command prints one JSON record line followed by a human-readable
// summary on `out`; warnings go to `err`. Failures are thrown as
// ConfigError / DataError / TrainingError.

struct PreprocessReport {
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::size_t skipped_empty = 0;
  std::size_t duplicates = 0;
  std::size_t train = 0;
  std::size_t valid = 0;
};
PreprocessReport cmd_preprocess(const ExperimentConfig& cfg, std::ostream& out);

struct VocabReport {
  std::size_t word_vocab_size = 0;
  std::size_t bpe_vocab_size = 0;
  std::size_t bpe_merges = 0;
};
VocabReport cmd_build_vocab(const ExperimentConfig& cfg, std::ostream& out);

struct TrainReport {
  std::uint64_t first_step = 0;
  std::uint64_t last_step = 0;
  double final_train_loss = 0.0;
  std::filesystem::path checkpoint;
};
// Resumes from `resume` when given; the step counter, optimizer moments and
// batch order continue where the checkpoint stopped.
TrainReport cmd_train(const ExperimentConfig& cfg, std::ostream& out,
                      const std::optional<std::filesystem::path>& resume = std::nullopt);

// Decodes every record of `test` (data.test when not given) with the
// configured decoding options and reports corpus ROUGE.
rouge::RougeScore cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                               const std::optional<std::filesystem::path>& test, std::ostream& out);

// Prints the summary of one text and returns it.
std::string cmd_summarize(const std::filesystem::path& checkpoint, const std::string& text,
                          const DecodeOptions& options, std::ostream& out, std::ostream& err);

}  // namespace tsum
