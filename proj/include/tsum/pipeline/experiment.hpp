#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "tsum/lvt.hpp"
#include "tsum/model/config.hpp"
#include "tsum/model/decode.hpp"
#include "tsum/model/optimizer.hpp"
#include "tsum/stats.hpp"

namespace tsum {

// The five model variants.
enum class Variant { Bpe, Baseline, FreF2h, FreLm2h, FreLvt };

std::string to_string(Variant v);
// Throws ConfigError for an unknown name.
Variant parse_variant(const std::string& name);
bool uses_bpe(Variant v);
bool uses_features(Variant v);

struct DataConfig {
  std::filesystem::path train;            // raw JSONL corpus
  std::optional<std::filesystem::path> valid;  // explicit validation file; otherwise split from train
  std::optional<std::filesystem::path> test;
  std::filesystem::path work_dir = "work";
};

struct CorpusConfig {
  std::size_t n_valid = 0;
  std::uint64_t split_seed = 1;
  std::size_t tf_bins = 10;
  std::size_t idf_bins = 10;
  // "lexicon": tag with the bundled tagger, keeping tags present in the
  // input; "provided": every record must carry tags.
  std::string tag_source = "lexicon";
  std::size_t stats_shards = 1;
};

struct VocabConfig {
  std::size_t word_max_size = 123000;
  std::size_t word_min_freq = 1;
  std::size_t bpe_merges = 32000;
};

struct ModelSection {
  Variant variant = Variant::Baseline;
  std::size_t d_model = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t ffn_dim = 256;
  double dropout = 0.1;
  std::size_t max_positions = 256;
  bool tie_output = false;
  // Word span width for linear-map-to-hidden; 0 means d_model.
  std::size_t fre_word_dim = 0;
  std::size_t lvt_size = 2000;
  LvtSource lvt_source = LvtSource::Union;
  double label_smoothing = 0.0;
};

struct TrainingConfig {
  std::size_t batch_size = 32;
  // Total optimizer steps; when 0, epochs * ceil(train / batch_size).
  std::size_t max_steps = 0;
  std::size_t epochs = 1;
  std::size_t eval_interval = 100;
  std::size_t eval_max_examples = 100;
  std::size_t checkpoint_interval = 0;  // 0: final checkpoint only
  std::uint64_t seed = 1;
  OptimizerConfig optimizer;
  bool log_timing = true;
};

struct ExperimentConfig {
  DataConfig data;
  CorpusConfig corpus;
  VocabConfig vocab;
  ModelSection model;
  TrainingConfig training;
  DecodeOptions decoding;

  // Artifact locations under data.work_dir.
  std::filesystem::path annotated_path() const { return data.work_dir / "annotated.jsonl"; }
  std::filesystem::path stats_path() const { return data.work_dir / "stats.json"; }
  std::filesystem::path word_vocab_path() const { return data.work_dir / "vocab.txt"; }
  std::filesystem::path bpe_merges_path() const { return data.work_dir / "bpe.merges"; }
  std::filesystem::path bpe_vocab_path() const { return data.work_dir / "bpe.vocab"; }
  std::filesystem::path run_dir() const { return data.work_dir / to_string(model.variant); }
  std::filesystem::path train_log_path() const { return run_dir() / "train_log.jsonl"; }
  std::filesystem::path final_checkpoint_path() const { return run_dir() / "model.ckpt"; }

  // Everything that does not depend on files on disk. Throws ConfigError.
  void validate() const;
};

// Parses and validates. Unknown keys are errors, so typos do not silently
// fall back to defaults. Relative paths resolve against `base_dir`.
ExperimentConfig experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Model config for this experiment: vocab size from the built vocabulary,
// feature layout from the corpus stats bin counts.
ModelConfig make_model_config(const ExperimentConfig& cfg, std::size_t vocab_size);

}  // namespace tsum
