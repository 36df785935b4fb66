#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tsum/features.hpp"
#include "tsum/lvt.hpp"
#include "tsum/model/config.hpp"
#include "tsum/model/layers.hpp"
#include "tsum/model/params.hpp"
#include "tsum/vocab.hpp"

namespace tsum {

enum class Mode { Train, Eval };

// One source/target pair in model ids. Trailing PAD entries are allowed in
// every sequence; PAD keys are masked and PAD targets carry no loss.
struct Example {
  std::vector<TokenId> source;
  std::vector<TokenFeatures> source_features;  // FRE variants only, aligned with source
  std::vector<TokenId> decoder_input;          // BOS y1 .. yn
  std::vector<TokenId> decoder_target;         // y1 .. yn EOS
};

struct Batch {
  std::vector<Example> examples;
};

// Builds the shifted decoder sequences. Source and target are cut so every
// sequence fits max_positions.
Example make_example(std::vector<TokenId> source, std::vector<TokenFeatures> features,
                     std::span<const TokenId> target, std::size_t max_positions);

// Pads every example to the longest source and target in the batch.
Batch pad_batch(std::vector<Example> examples);

// Encoder-decoder transformer (pre-layer-norm) and its parameters, Adam
// moments and step counter.
class Model {
 public:
  // Validates the config and initializes every parameter from config.seed.
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }

  bool uses_features() const { return feature_layout(config_.embedding) != nullptr; }

  // Encoder input rows (T x d_model) before positional encoding.
  Matrix embed_source(const Example& ex) const;
  // Encoder output in eval mode.
  Matrix encode(const Example& ex) const;
  // Full-vocabulary log-probabilities of the token following `prefix`
  // (which starts with BOS), eval mode.
  std::vector<double> next_log_probs(const Matrix& memory, std::span<const TokenId> source,
                                     std::span<const TokenId> prefix) const;

  struct Refs {
    std::size_t enc_embed = 0;
    std::size_t dec_embed = 0;
    std::optional<std::size_t> fre_map;
    std::size_t out_weight = 0;
    std::size_t out_bias = 0;
    struct EncoderLayer {
      layers::LayerNormRef ln1, ln2;
      layers::AttentionRef self_attn;
      layers::FfnRef ffn;
    };
    struct DecoderLayer {
      layers::LayerNormRef ln1, ln2, ln3;
      layers::AttentionRef self_attn, cross_attn;
      layers::FfnRef ffn;
    };
    std::vector<EncoderLayer> encoder;
    layers::LayerNormRef enc_final;
    std::vector<DecoderLayer> decoder;
    layers::LayerNormRef dec_final;
  };
  const Refs& refs() const { return refs_; }

 private:
  void build();
  void initialize();

  ModelConfig config_;
  ParameterStore params_;
  Refs refs_;
  std::uint64_t step_ = 0;
};

// Logits for every decoder position (rows) over the output vocabulary:
// the batch vocabulary when `bv` is given, the full vocabulary otherwise.
// `rng` drives dropout and is only used in Train mode.
Matrix forward(const Example& ex, const Model& model, Mode mode, const BatchVocab* bv = nullptr,
               std::mt19937_64* rng = nullptr);

// Mean negative log-likelihood over non-PAD targets. With label smoothing
// the target distribution is (1 - eps) one-hot + eps / V. When `dlogits` is
// given it receives the gradient of the mean. Throws ContractViolation if
// every target is PAD or shapes disagree.
double cross_entropy_loss(const Matrix& logits, std::span<const TokenId> targets, double label_smoothing = 0.0,
                          Matrix* dlogits = nullptr);

struct LossResult {
  double loss = 0.0;
  std::size_t tokens = 0;
};

// Mean cross-entropy over every non-PAD target of the batch, no gradients.
LossResult batch_loss(const Batch& batch, const Model& model, Mode mode = Mode::Eval,
                      const BatchVocab* bv = nullptr);

// Zeroes the gradients, then fills them with d(batch mean loss)/d(param).
// With `bv`, targets are remapped to local ids and only decoder rows in the
// batch vocabulary receive gradient. Throws TrainingError naming the first
// parameter with a non-finite gradient.
LossResult backward(const Batch& batch, Model& model, Mode mode = Mode::Train, const BatchVocab* bv = nullptr,
                    std::mt19937_64* rng = nullptr);

}  // namespace tsum
