#include "tsum/pipeline/experiment.hpp"

#include <fstream>
#include <set>

#include "tsum/errors.hpp"

namespace tsum {

namespace {

// Reads one config section, remembering which keys were consumed so that
// leftovers can be reported.
class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config: " + name_ + "." + key + " has the wrong type (" + j_.at(key).dump() + ")");
    }
  }

  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    T v{};
    if (!j_.contains(key)) {
      seen_.insert(key);
      return;
    }
    read(key, v);
    out = v;
  }

  bool has(const char* key) const { return j_.contains(key); }
  const nlohmann::json& sub(const char* key) {
    seen_.insert(key);
    static const nlohmann::json empty = nlohmann::json::object();
    return j_.contains(key) ? j_.at(key) : empty;
  }

  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!seen_.count(k)) throw ConfigError("config: unknown key " + name_ + "." + k);
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return (path.is_absolute() || base.empty() ? path : base / path).lexically_normal();
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Bpe: return "bpe";
    case Variant::Baseline: return "baseline";
    case Variant::FreF2h: return "fre-f2h";
    case Variant::FreLm2h: return "fre-lm2h";
    case Variant::FreLvt: return "fre-lvt";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::Bpe, Variant::Baseline, Variant::FreF2h, Variant::FreLm2h, Variant::FreLvt})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown variant '" + name + "' (expected bpe, baseline, fre-f2h, fre-lm2h or fre-lvt)");
}

bool uses_bpe(Variant v) { return v == Variant::Bpe; }
bool uses_features(Variant v) { return v == Variant::FreF2h || v == Variant::FreLm2h || v == Variant::FreLvt; }

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (data.train.empty()) fail("data.train is required");
  if (data.work_dir.empty()) fail("data.work_dir must not be empty");
  if (data.valid && corpus.n_valid != 0) fail("corpus.n_valid must be 0 when data.valid is given");
  if (corpus.tf_bins < 1 || corpus.idf_bins < 1) fail("corpus.tf_bins and corpus.idf_bins must be positive");
  if (corpus.tag_source != "lexicon" && corpus.tag_source != "provided")
    fail("corpus.tag_source must be 'lexicon' or 'provided'");
  if (corpus.stats_shards < 1) fail("corpus.stats_shards must be positive");
  if (vocab.word_max_size < kNumSpecials + 1) fail("vocab.word_max_size must be at least 5");
  if (vocab.word_min_freq < 1) fail("vocab.word_min_freq must be at least 1");
  if (uses_bpe(model.variant) && vocab.bpe_merges < 1) fail("vocab.bpe_merges must be positive");
  if (model.variant == Variant::FreF2h && model.d_model <= kNumPosTags + corpus.tf_bins + corpus.idf_bins)
    fail("model.d_model must exceed the one-hot spans (" +
         std::to_string(kNumPosTags + corpus.tf_bins + corpus.idf_bins) + ") for fre-f2h");
  if (model.variant == Variant::FreLvt && model.lvt_size < kNumSpecials)
    fail("model.lvt_size must be at least 4");
  if (training.batch_size < 1) fail("training.batch_size must be positive");
  if (training.max_steps == 0 && training.epochs == 0) fail("training.max_steps or training.epochs must be positive");
  if (training.eval_interval < 1) fail("training.eval_interval must be positive");
  training.optimizer.validate();
  decoding.validate();
  // Architecture checks share ModelConfig's rules; the vocab size is a
  // placeholder until the vocabulary is built.
  make_model_config(*this, kNumSpecials + 1).validate();
}

ExperimentConfig experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  Section root(j, "config");

  {
    Section s(root.sub("data"), "data");
    std::string train, work_dir = cfg.data.work_dir.string();
    std::optional<std::string> valid, test;
    s.read("train", train);
    s.read("valid", valid);
    s.read("test", test);
    s.read("work_dir", work_dir);
    s.finish();
    if (!train.empty()) cfg.data.train = resolve(base_dir, train);
    if (valid) cfg.data.valid = resolve(base_dir, *valid);
    if (test) cfg.data.test = resolve(base_dir, *test);
    cfg.data.work_dir = resolve(base_dir, work_dir);
  }
  {
    Section s(root.sub("corpus"), "corpus");
    s.read("n_valid", cfg.corpus.n_valid);
    s.read("split_seed", cfg.corpus.split_seed);
    s.read("tf_bins", cfg.corpus.tf_bins);
    s.read("idf_bins", cfg.corpus.idf_bins);
    s.read("tag_source", cfg.corpus.tag_source);
    s.read("stats_shards", cfg.corpus.stats_shards);
    s.finish();
  }
  {
    Section s(root.sub("vocab"), "vocab");
    s.read("word_max_size", cfg.vocab.word_max_size);
    s.read("word_min_freq", cfg.vocab.word_min_freq);
    s.read("bpe_merges", cfg.vocab.bpe_merges);
    s.finish();
  }
  {
    Section s(root.sub("model"), "model");
    std::string variant = to_string(cfg.model.variant), lvt_source = "union";
    s.read("variant", variant);
    cfg.model.variant = parse_variant(variant);
    s.read("d_model", cfg.model.d_model);
    s.read("num_layers", cfg.model.num_layers);
    s.read("num_heads", cfg.model.num_heads);
    s.read("ffn_dim", cfg.model.ffn_dim);
    s.read("dropout", cfg.model.dropout);
    s.read("max_positions", cfg.model.max_positions);
    s.read("tie_output", cfg.model.tie_output);
    s.read("fre_word_dim", cfg.model.fre_word_dim);
    s.read("lvt_size", cfg.model.lvt_size);
    s.read("lvt_source", lvt_source);
    if (lvt_source == "union")
      cfg.model.lvt_source = LvtSource::Union;
    else if (lvt_source == "source")
      cfg.model.lvt_source = LvtSource::SourceOnly;
    else
      throw ConfigError("config: model.lvt_source must be 'union' or 'source'");
    s.read("label_smoothing", cfg.model.label_smoothing);
    s.finish();
  }
  {
    Section s(root.sub("training"), "training");
    auto& t = cfg.training;
    s.read("batch_size", t.batch_size);
    s.read("max_steps", t.max_steps);
    s.read("epochs", t.epochs);
    s.read("eval_interval", t.eval_interval);
    s.read("eval_max_examples", t.eval_max_examples);
    s.read("checkpoint_interval", t.checkpoint_interval);
    s.read("seed", t.seed);
    s.read("learning_rate", t.optimizer.learning_rate);
    s.read("warmup_steps", t.optimizer.warmup_steps);
    s.read("beta1", t.optimizer.beta1);
    s.read("beta2", t.optimizer.beta2);
    s.read("epsilon", t.optimizer.epsilon);
    s.read("log_timing", t.log_timing);
    s.finish();
  }
  {
    Section s(root.sub("decoding"), "decoding");
    std::string strategy = "beam";
    s.read("strategy", strategy);
    cfg.decoding.strategy = parse_strategy(strategy);
    s.read("beam_width", cfg.decoding.beam_width);
    s.read("max_len", cfg.decoding.max_len);
    s.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return experiment_from_json(j, path.parent_path());
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json data{{"train", cfg.data.train.string()}, {"work_dir", cfg.data.work_dir.string()}};
  if (cfg.data.valid) data["valid"] = cfg.data.valid->string();
  if (cfg.data.test) data["test"] = cfg.data.test->string();
  const auto& m = cfg.model;
  const auto& t = cfg.training;
  return {{"data", data},
          {"corpus",
           {{"n_valid", cfg.corpus.n_valid},
            {"split_seed", cfg.corpus.split_seed},
            {"tf_bins", cfg.corpus.tf_bins},
            {"idf_bins", cfg.corpus.idf_bins},
            {"tag_source", cfg.corpus.tag_source},
            {"stats_shards", cfg.corpus.stats_shards}}},
          {"vocab",
           {{"word_max_size", cfg.vocab.word_max_size},
            {"word_min_freq", cfg.vocab.word_min_freq},
            {"bpe_merges", cfg.vocab.bpe_merges}}},
          {"model",
           {{"variant", to_string(m.variant)},
            {"d_model", m.d_model},
            {"num_layers", m.num_layers},
            {"num_heads", m.num_heads},
            {"ffn_dim", m.ffn_dim},
            {"dropout", m.dropout},
            {"max_positions", m.max_positions},
            {"tie_output", m.tie_output},
            {"fre_word_dim", m.fre_word_dim},
            {"lvt_size", m.lvt_size},
            {"lvt_source", m.lvt_source == LvtSource::Union ? "union" : "source"},
            {"label_smoothing", m.label_smoothing}}},
          {"training",
           {{"batch_size", t.batch_size},
            {"max_steps", t.max_steps},
            {"epochs", t.epochs},
            {"eval_interval", t.eval_interval},
            {"eval_max_examples", t.eval_max_examples},
            {"checkpoint_interval", t.checkpoint_interval},
            {"seed", t.seed},
            {"learning_rate", t.optimizer.learning_rate},
            {"warmup_steps", t.optimizer.warmup_steps},
            {"beta1", t.optimizer.beta1},
            {"beta2", t.optimizer.beta2},
            {"epsilon", t.optimizer.epsilon},
            {"log_timing", t.log_timing}}},
          {"decoding",
           {{"strategy", cfg.decoding.strategy == DecodeStrategy::Greedy ? "greedy" : "beam"},
            {"beam_width", cfg.decoding.beam_width},
            {"max_len", cfg.decoding.max_len}}}};
}

ModelConfig make_model_config(const ExperimentConfig& cfg, std::size_t vocab_size) {
  const auto& m = cfg.model;
  ModelConfig mc;
  mc.d_model = m.d_model;
  mc.num_layers = m.num_layers;
  mc.num_heads = m.num_heads;
  mc.ffn_dim = m.ffn_dim;
  mc.dropout_rate = m.dropout;
  mc.max_positions = m.max_positions;
  mc.vocab_size = vocab_size;
  mc.tie_output_to_embedding = m.tie_output;
  mc.label_smoothing = m.label_smoothing;
  mc.seed = cfg.training.seed;
  mc.lvt_size = m.lvt_size;
  mc.lvt_source = m.lvt_source;
  const std::size_t word_dim = m.fre_word_dim ? m.fre_word_dim : m.d_model;
  switch (m.variant) {
    case Variant::Bpe:
      mc.embedding = SharedBpe{};
      break;
    case Variant::Baseline:
      mc.embedding = SeparateWord{};
      break;
    case Variant::FreF2h:
      mc.embedding = FreFitToHidden{FeatureLayout::fit_to_hidden(m.d_model, cfg.corpus.tf_bins, cfg.corpus.idf_bins)};
      break;
    case Variant::FreLm2h:
    case Variant::FreLvt:
      mc.embedding =
          FreLinearMapToHidden{FeatureLayout::with_word_dim(word_dim, cfg.corpus.tf_bins, cfg.corpus.idf_bins), m.d_model};
      mc.lvt_enabled = m.variant == Variant::FreLvt;
      break;
  }
  return mc;
}

}  // namespace tsum
