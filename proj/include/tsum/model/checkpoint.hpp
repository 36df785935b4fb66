#pragma once

#include <filesystem>

#include <json.hpp>

#include "tsum/model/transformer.hpp"

namespace tsum {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Model config, parameter values with their Adam moments, the step counter
// and an opaque `extra` JSON object (vocabulary, stats, ...).
struct Checkpoint {
  Model model;
  nlohmann::json extra;
};

// Layout: "TSUMCKPT", u32 version, u64 header length, JSON header, then the
// value, m and v doubles of every parameter in header order.
void save_checkpoint(const std::filesystem::path& path, const Model& model, const nlohmann::json& extra = {});

// Throws DataError on a truncated or corrupt file or an unknown version,
// and ConfigError when the stored tensors do not fit the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Fails with ConfigError unless `expected` equals the checkpoint's config.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace tsum
