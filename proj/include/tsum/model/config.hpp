#pragma once

#include <cstddef>
#include <cstdint>

#include <json.hpp>

#include "tsum/features.hpp"
#include "tsum/lvt.hpp"

namespace tsum {

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t ffn_dim = 256;
  double dropout_rate = 0.1;
  std::size_t max_positions = 256;
  std::size_t vocab_size = 0;
  EmbeddingVariant embedding = SeparateWord{};
  bool tie_output_to_embedding = false;
  bool lvt_enabled = false;
  std::size_t lvt_size = 2000;
  LvtSource lvt_source = LvtSource::Union;
  double label_smoothing = 0.0;
  std::uint64_t seed = 1;

  // Throws ConfigError on inconsistent values.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace tsum
