#include "tsum/model/config.hpp"

#include "tsum/errors.hpp"

namespace tsum {

namespace {

nlohmann::json layout_json(const FeatureLayout& l) {
  return {{"word_dim", l.word_dim}, {"pos_dim", l.pos_dim}, {"tf_dim", l.tf_dim}, {"idf_dim", l.idf_dim}};
}

FeatureLayout layout_from(const nlohmann::json& j) {
  FeatureLayout l;
  l.word_dim = j.at("word_dim").get<std::size_t>();
  l.pos_dim = j.at("pos_dim").get<std::size_t>();
  l.tf_dim = j.at("tf_dim").get<std::size_t>();
  l.idf_dim = j.at("idf_dim").get<std::size_t>();
  return l;
}

}  // namespace

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("model config: " + m); };
  if (d_model == 0 || num_heads == 0 || num_layers == 0 || ffn_dim == 0) fail("dimensions must be positive");
  if (d_model % num_heads != 0) fail("d_model must be divisible by num_heads");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) fail("label_smoothing must be in [0, 1)");
  if (max_positions < 2) fail("max_positions must be at least 2");
  if (vocab_size <= kNumSpecials) fail("vocab_size must exceed the 4 special tokens");
  if (lvt_enabled && lvt_size < kNumSpecials) fail("lvt_size must be at least 4");
  if (lvt_enabled && std::holds_alternative<SharedBpe>(embedding))
    fail("LVT restricts decoder rows and cannot be combined with an encoder-shared embedding");
  if (auto* f = std::get_if<FreFitToHidden>(&embedding)) {
    if (f->layout.concat_dim() != d_model) fail("fit-to-hidden layout must have concat_dim == d_model");
    if (f->layout.pos_dim != kNumPosTags) fail("POS span must match the tag set");
  }
  if (auto* f = std::get_if<FreLinearMapToHidden>(&embedding)) {
    if (f->hidden != d_model) fail("linear-map hidden size must equal d_model");
    if (f->layout.word_dim == 0 || f->layout.pos_dim != kNumPosTags) fail("bad linear-map layout");
  }
}

nlohmann::json to_json(const ModelConfig& cfg) {
  nlohmann::json emb;
  emb["kind"] = variant_name(cfg.embedding);
  if (auto* l = feature_layout(cfg.embedding)) emb["layout"] = layout_json(*l);
  return {{"d_model", cfg.d_model},
          {"num_layers", cfg.num_layers},
          {"num_heads", cfg.num_heads},
          {"ffn_dim", cfg.ffn_dim},
          {"dropout_rate", cfg.dropout_rate},
          {"max_positions", cfg.max_positions},
          {"vocab_size", cfg.vocab_size},
          {"embedding", emb},
          {"tie_output_to_embedding", cfg.tie_output_to_embedding},
          {"lvt_enabled", cfg.lvt_enabled},
          {"lvt_size", cfg.lvt_size},
          {"lvt_source", cfg.lvt_source == LvtSource::Union ? "union" : "source"},
          {"label_smoothing", cfg.label_smoothing},
          {"seed", cfg.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig cfg;
    cfg.d_model = j.at("d_model").get<std::size_t>();
    cfg.num_layers = j.at("num_layers").get<std::size_t>();
    cfg.num_heads = j.at("num_heads").get<std::size_t>();
    cfg.ffn_dim = j.at("ffn_dim").get<std::size_t>();
    cfg.dropout_rate = j.at("dropout_rate").get<double>();
    cfg.max_positions = j.at("max_positions").get<std::size_t>();
    cfg.vocab_size = j.at("vocab_size").get<std::size_t>();
    const auto& emb = j.at("embedding");
    const auto kind = emb.at("kind").get<std::string>();
    if (kind == "shared-bpe")
      cfg.embedding = SharedBpe{};
    else if (kind == "separate-word")
      cfg.embedding = SeparateWord{};
    else if (kind == "fre-fit-to-hidden")
      cfg.embedding = FreFitToHidden{layout_from(emb.at("layout"))};
    else if (kind == "fre-linear-map-to-hidden")
      cfg.embedding = FreLinearMapToHidden{layout_from(emb.at("layout")), cfg.d_model};
    else
      throw ConfigError("unknown embedding kind '" + kind + "'");
    cfg.tie_output_to_embedding = j.at("tie_output_to_embedding").get<bool>();
    cfg.lvt_enabled = j.at("lvt_enabled").get<bool>();
    cfg.lvt_size = j.at("lvt_size").get<std::size_t>();
    cfg.lvt_source = j.at("lvt_source").get<std::string>() == "source" ? LvtSource::SourceOnly : LvtSource::Union;
    cfg.label_smoothing = j.at("label_smoothing").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

}  // namespace tsum
