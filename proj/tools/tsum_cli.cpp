// tsum: preprocess | build-vocab | train | evaluate | summarize
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsum/errors.hpp"
#include "tsum/pipeline/commands.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kData = 2, kTraining = 3, kInternal = 4 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::string> work_dir;
  std::optional<std::string> strategy;
  std::optional<std::size_t> beam_width;
  std::optional<std::size_t> max_len;
  std::optional<std::size_t> max_steps;
};

nlohmann::json read_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tsum::ConfigError("cannot open config " + path);
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw tsum::ConfigError("config " + path + ": " + e.what());
  }
}

// Flags land in the JSON before validation, so they are checked like
// any other key.
tsum::ExperimentConfig resolve_config(const Overrides& o) {
  auto j = o.config.empty() ? nlohmann::json::object() : read_config_json(o.config);
  auto section = [&](const char* name) -> nlohmann::json& {
    if (!j.contains(name)) j[name] = nlohmann::json::object();
    return j[name];
  };
  if (o.seed) section("training")["seed"] = *o.seed;
  if (o.max_steps) section("training")["max_steps"] = *o.max_steps;
  if (o.variant) section("model")["variant"] = *o.variant;
  if (o.work_dir) section("data")["work_dir"] = *o.work_dir;
  if (o.strategy) section("decoding")["strategy"] = *o.strategy;
  if (o.beam_width) section("decoding")["beam_width"] = *o.beam_width;
  if (o.max_len) section("decoding")["max_len"] = *o.max_len;
  const auto base = o.config.empty() ? std::filesystem::path{} : std::filesystem::path(o.config).parent_path();
  return tsum::experiment_from_json(j, base);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformer headline summarization lab"};
  app.require_subcommand(1);

  Overrides o;
  std::string checkpoint, test, text;
  bool resume = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("-c,--config", o.config, "experiment config (JSON)");
    if (config_required) opt->required();
    sub->add_option("--seed", o.seed, "override training.seed");
    sub->add_option("--variant", o.variant, "override model.variant (bpe, baseline, fre-f2h, fre-lm2h, fre-lvt)");
    sub->add_option("--work-dir", o.work_dir, "override data.work_dir");
  };
  auto add_decoding = [&](CLI::App* sub) {
    sub->add_option("--strategy", o.strategy, "greedy or beam");
    sub->add_option("--beam-width", o.beam_width, "beam width");
    sub->add_option("--max-len", o.max_len, "maximum summary length in model tokens");
  };

  auto* pre = app.add_subcommand("preprocess", "split, tag and bin the raw corpus");
  add_common(pre, true);
  auto* voc = app.add_subcommand("build-vocab", "word vocabulary (and BPE for the bpe variant)");
  add_common(voc, true);
  auto* trn = app.add_subcommand("train", "train the selected variant");
  add_common(trn, true);
  trn->add_option("--max-steps", o.max_steps, "override training.max_steps");
  trn->add_option("--checkpoint", checkpoint, "checkpoint to resume from");
  trn->add_flag("--resume", resume, "resume from the run's last checkpoint");
  auto* evl = app.add_subcommand("evaluate", "ROUGE of a checkpoint on a test set");
  add_common(evl, true);
  add_decoding(evl);
  evl->add_option("--checkpoint", checkpoint, "checkpoint (default: the run's model.ckpt)");
  evl->add_option("--test", test, "test JSONL (default: data.test)");
  auto* sum = app.add_subcommand("summarize", "summarize one text");
  add_common(sum, false);
  add_decoding(sum);
  sum->add_option("--checkpoint", checkpoint, "checkpoint")->required();
  sum->add_option("--text", text, "input text (default: read standard input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*pre) {
      tsum::cmd_preprocess(resolve_config(o), std::cout);
    } else if (*voc) {
      tsum::cmd_build_vocab(resolve_config(o), std::cout);
    } else if (*trn) {
      const auto cfg = resolve_config(o);
      std::optional<std::filesystem::path> from;
      if (!checkpoint.empty()) from = checkpoint;
      if (resume && !from) from = cfg.final_checkpoint_path();
      tsum::cmd_train(cfg, std::cout, from);
    } else if (*evl) {
      const auto cfg = resolve_config(o);
      const std::filesystem::path ck = checkpoint.empty() ? cfg.final_checkpoint_path() : std::filesystem::path(checkpoint);
      std::optional<std::filesystem::path> t;
      if (!test.empty()) t = test;
      tsum::cmd_evaluate(cfg, ck, t, std::cout);
    } else if (*sum) {
      tsum::DecodeOptions opts;
      if (!o.config.empty()) opts = resolve_config(o).decoding;
      if (o.strategy) opts.strategy = tsum::parse_strategy(*o.strategy);
      if (o.beam_width) opts.beam_width = *o.beam_width;
      if (o.max_len) opts.max_len = *o.max_len;
      if (text.empty()) text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
      tsum::cmd_summarize(checkpoint, text, opts, std::cout, std::cerr);
    }
  } catch (const tsum::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const tsum::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const tsum::TrainingError& e) {
    std::cerr << "training failed: " << e.what() << '\n';
    return kTraining;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
