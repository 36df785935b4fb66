#include "tsum/pipeline/commands.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>

#include <json.hpp>

#include "tsum/errors.hpp"
#include "tsum/model/checkpoint.hpp"
#include "tsum/pipeline/data.hpp"

namespace tsum {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double pct(double x) { return std::round(x * 10000.0) / 100.0; }

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

IngestResult read_corpus(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw DataError(what + " " + path.string() + " does not exist");
  auto result = ingest(path);
  if (!result.errors.empty()) {
    const auto& first = result.errors.front();
    throw DataError(path.string() + ": " + std::to_string(result.errors.size()) + " malformed record(s), " +
                    std::to_string(result.documents.size()) + " well-formed; first: line " + std::to_string(first.line) +
                    ": " + first.message);
  }
  return result;
}

void require_file(const fs::path& p, const std::string& what, const std::string& producer) {
  if (!fs::exists(p)) throw ConfigError("missing " + what + " " + p.string() + " (run " + producer + " first)");
}

// Codec for the configured variant from the artifacts in work_dir.
TextCodec load_codec(const ExperimentConfig& cfg) {
  if (uses_bpe(cfg.model.variant)) {
    require_file(cfg.bpe_merges_path(), "BPE merges", "build-vocab with the bpe variant");
    require_file(cfg.bpe_vocab_path(), "BPE vocabulary", "build-vocab with the bpe variant");
    return TextCodec::bpe(BpeModel::load(cfg.bpe_merges_path(), cfg.bpe_vocab_path()));
  }
  require_file(cfg.word_vocab_path(), "word vocabulary", "build-vocab");
  auto vocab = Vocabulary::load(cfg.word_vocab_path());
  if (!uses_features(cfg.model.variant)) return TextCodec::words(std::move(vocab));
  require_file(cfg.stats_path(), "corpus stats (needed by " + to_string(cfg.model.variant) + ")", "preprocess");
  auto stats = load_stats(cfg.stats_path());
  if (stats.n_tf_bins != cfg.corpus.tf_bins || stats.n_idf_bins != cfg.corpus.idf_bins)
    throw ConfigError("corpus stats were computed with " + std::to_string(stats.n_tf_bins) + "/" +
                      std::to_string(stats.n_idf_bins) + " tf/idf bins but the config asks for " +
                      std::to_string(cfg.corpus.tf_bins) + "/" + std::to_string(cfg.corpus.idf_bins) +
                      " (rerun preprocess)");
  return TextCodec::words_with_features(std::move(vocab), std::move(stats));
}

std::vector<Example> to_examples(const std::vector<Document>& docs, const TextCodec& codec, std::size_t max_pos) {
  std::vector<Example> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(codec.to_example(d, max_pos));
  return out;
}

// Decodes each example independently; the model is read-only here.
std::vector<std::vector<std::string>> decode_all(const std::vector<Example>& examples, const Model& model,
                                                 const TextCodec& codec, const DecodeOptions& opts) {
  std::vector<std::vector<std::string>> out(examples.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(examples.size()); ++i) {
    try {
      const auto h = decode(examples[static_cast<std::size_t>(i)], model, opts);
      out[static_cast<std::size_t>(i)] = codec.decode(h.tokens);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

rouge::RougeScore score(const std::vector<std::vector<std::string>>& hyps, const std::vector<Document>& refs) {
  std::vector<std::pair<rouge::Tokens, rouge::Tokens>> pairs;
  pairs.reserve(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) pairs.emplace_back(hyps[i], refs[i].target_tokens);
  return rouge::evaluate_corpus(pairs);
}

// Token-weighted mean loss in eval mode over the full vocabulary.
double corpus_loss(const std::vector<Example>& examples, const Model& model, std::size_t batch_size) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < examples.size(); i += batch_size) {
    std::vector<Example> chunk(examples.begin() + static_cast<std::ptrdiff_t>(i),
                               examples.begin() + static_cast<std::ptrdiff_t>(std::min(examples.size(), i + batch_size)));
    const auto r = batch_loss(pad_batch(std::move(chunk)), model, Mode::Eval);
    total += r.loss * static_cast<double>(r.tokens);
    tokens += r.tokens;
  }
  return tokens ? total / static_cast<double>(tokens) : 0.0;
}

struct LoadedModel {
  Model model;
  TextCodec codec;
  std::string variant;
};

LoadedModel load_model(const fs::path& checkpoint) {
  auto ck = load_checkpoint(checkpoint);
  if (!ck.extra.contains("codec")) throw DataError(checkpoint.string() + " carries no vocabulary");
  auto codec = TextCodec::from_json(ck.extra.at("codec"));
  if (codec.vocab_size() != ck.model.config().vocab_size)
    throw DataError(checkpoint.string() + ": embedded vocabulary size " + std::to_string(codec.vocab_size()) +
                    " does not match the model's " + std::to_string(ck.model.config().vocab_size));
  return {std::move(ck.model), std::move(codec), ck.extra.value("variant", std::string{})};
}

}  // namespace

PreprocessReport cmd_preprocess(const ExperimentConfig& cfg, std::ostream& out) {
  PreprocessReport rep;
  auto raw = read_corpus(cfg.data.train, "training corpus");
  rep.records = raw.documents.size();
  rep.skipped_empty = raw.skipped_empty;
  auto docs = deduplicate(std::move(raw.documents));
  rep.duplicates = rep.records - docs.size();

  Split parts;
  if (cfg.data.valid) {
    auto v = read_corpus(*cfg.data.valid, "validation corpus");
    parts.train = std::move(docs);
    parts.valid = deduplicate(std::move(v.documents));
  } else {
    if (cfg.corpus.n_valid > docs.size())
      throw ConfigError("corpus.n_valid (" + std::to_string(cfg.corpus.n_valid) + ") exceeds the " +
                        std::to_string(docs.size()) + " usable records of " + cfg.data.train.string());
    parts = split(std::move(docs), cfg.corpus.n_valid, cfg.corpus.split_seed);
  }
  if (parts.train.empty()) throw ConfigError("no training records left after the validation split");

  if (cfg.corpus.tag_source == "provided") {
    for (const auto* set : {&parts.train, &parts.valid})
      for (const auto& d : *set)
        if (d.pos_tags.size() != d.source_tokens.size())
          throw DataError("record " + d.id + " has no 'pos' tags but corpus.tag_source is 'provided'");
  }

  const auto stats =
      compute_corpus_stats(parts.train, cfg.corpus.tf_bins, cfg.corpus.idf_bins, cfg.corpus.stats_shards);
  const LexiconTagger tagger;
  for (auto* set : {&parts.train, &parts.valid})
    for (auto& d : *set) {
      // Bins always come from the fresh statistics.
      d.tf_bins.clear();
      d.idf_bins.clear();
      annotate(d, stats, tagger);
    }

  fs::create_directories(cfg.data.work_dir);
  {
    std::ofstream f(cfg.annotated_path(), std::ios::trunc);
    if (!f) throw DataError("cannot write " + cfg.annotated_path().string());
    for (const auto& d : parts.train) write_annotated(f, d, "train");
    for (const auto& d : parts.valid) write_annotated(f, d, "valid");
    if (!f) throw DataError("failed writing " + cfg.annotated_path().string());
  }
  save_stats(stats, cfg.stats_path());
  rep.train = parts.train.size();
  rep.valid = parts.valid.size();

  out << json{{"command", "preprocess"},
              {"records", rep.records},
              {"skipped_empty", rep.skipped_empty},
              {"duplicates", rep.duplicates},
              {"train", rep.train},
              {"valid", rep.valid},
              {"n_valid", cfg.corpus.n_valid},
              {"outputs", {cfg.annotated_path().string(), cfg.stats_path().string()}}}
             .dump()
      << '\n';
  out << "preprocess: " << rep.records << " records, " << rep.duplicates << " duplicates, " << rep.skipped_empty
      << " empty skipped\n"
      << "  train " << rep.train << ", valid " << rep.valid << "\n"
      << "  wrote " << cfg.annotated_path().string() << "\n"
      << "  wrote " << cfg.stats_path().string() << "\n";
  return rep;
}

VocabReport cmd_build_vocab(const ExperimentConfig& cfg, std::ostream& out) {
  require_file(cfg.annotated_path(), "annotated corpus", "preprocess");
  const auto train = load_split(cfg.annotated_path(), "train");
  if (train.empty()) throw DataError(cfg.annotated_path().string() + " has no training records");

  VocabReport rep;
  const auto vocab = build_word_vocab(train, cfg.vocab.word_max_size, cfg.vocab.word_min_freq);
  vocab.save(cfg.word_vocab_path());
  rep.word_vocab_size = vocab.size();
  json record{{"command", "build-vocab"}, {"word_vocab_size", rep.word_vocab_size}};
  if (uses_bpe(cfg.model.variant)) {
    std::vector<std::vector<std::string>> stream;
    for (const auto& d : train) {
      stream.push_back(d.source_tokens);
      stream.push_back(d.target_tokens);
    }
    const auto bpe = bpe_learn(stream, cfg.vocab.bpe_merges);
    bpe.save(cfg.bpe_merges_path(), cfg.bpe_vocab_path());
    rep.bpe_merges = bpe.merges().size();
    rep.bpe_vocab_size = bpe.vocab().size();
    record["bpe_merges"] = rep.bpe_merges;
    record["bpe_vocab_size"] = rep.bpe_vocab_size;
  }
  out << record.dump() << '\n';
  out << "build-vocab: " << rep.word_vocab_size << " word types -> " << cfg.word_vocab_path().string() << "\n";
  if (uses_bpe(cfg.model.variant))
    out << "  bpe: " << rep.bpe_merges << " merges, " << rep.bpe_vocab_size << " subword units -> "
        << cfg.bpe_merges_path().string() << "\n";
  return rep;
}

TrainReport cmd_train(const ExperimentConfig& cfg, std::ostream& out, const std::optional<fs::path>& resume) {
  // Every artifact is checked before any training work starts.
  require_file(cfg.annotated_path(), "annotated corpus", "preprocess");
  const TextCodec codec = load_codec(cfg);
  const ModelConfig mc = make_model_config(cfg, codec.vocab_size());
  mc.validate();
  if (resume) require_file(*resume, "checkpoint", "train");

  const auto train_docs = load_split(cfg.annotated_path(), "train");
  const auto valid_docs = load_split(cfg.annotated_path(), "valid");
  if (train_docs.empty()) throw DataError(cfg.annotated_path().string() + " has no training records");

  Model model = resume ? load_checkpoint(*resume, mc).model : Model(mc);
  const auto train_ex = to_examples(train_docs, codec, mc.max_positions);
  std::vector<Document> eval_docs = valid_docs;
  if (cfg.training.eval_max_examples && eval_docs.size() > cfg.training.eval_max_examples)
    eval_docs.resize(cfg.training.eval_max_examples);
  const auto valid_ex = to_examples(valid_docs, codec, mc.max_positions);
  const auto eval_ex = to_examples(eval_docs, codec, mc.max_positions);

  const std::size_t bs = cfg.training.batch_size;
  const std::size_t per_epoch = (train_docs.size() + bs - 1) / bs;
  const std::uint64_t total = cfg.training.max_steps ? cfg.training.max_steps : cfg.training.epochs * per_epoch;

  fs::create_directories(cfg.run_dir());
  std::ofstream log(cfg.train_log_path(), resume ? std::ios::app : std::ios::trunc);
  if (!log) throw DataError("cannot write " + cfg.train_log_path().string());
  const json extra{{"variant", to_string(cfg.model.variant)}, {"codec", codec.to_json()}};

  TrainReport rep;
  rep.first_step = model.step() + 1;
  std::size_t cached_epoch = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> batches;
  const bool lvt = mc.lvt_enabled;

  while (model.step() < total) {
    const std::uint64_t step = model.step() + 1;
    const std::size_t epoch = static_cast<std::size_t>((step - 1) / per_epoch);
    if (epoch != cached_epoch) {
      batches = epoch_batches(train_docs.size(), bs, cfg.training.seed, epoch);
      cached_epoch = epoch;
    }
    const auto& idx = batches[static_cast<std::size_t>((step - 1) % per_epoch)];
    std::vector<Example> exs;
    std::vector<Document> docs;
    for (std::size_t i : idx) {
      exs.push_back(train_ex[i]);
      if (lvt) docs.push_back(train_docs[i]);
    }
    const Batch batch = pad_batch(std::move(exs));

    const auto t0 = std::chrono::steady_clock::now();
    json row{{"step", step}};
    StepResult r;
    if (lvt) {
      const auto bv = build_batch_vocab(docs, codec.vocab(), mc.lvt_size, mc.lvt_source);
      std::size_t covered = 0, targets = 0;
      for (const auto& ex : batch.examples)
        for (TokenId t : ex.decoder_target)
          if (t != kPadId) {
            ++targets;
            covered += bv.contains(t);
          }
      r = train_step(batch, model, cfg.training.optimizer, &bv);
      row["lvt_size"] = bv.size();
      row["lvt_batch_types"] = bv.batch_types;
      row["lvt_fill"] = bv.fill_count;
      row["lvt_truncated"] = bv.truncated;
      row["lvt_target_coverage"] = targets ? static_cast<double>(covered) / static_cast<double>(targets) : 1.0;
    } else {
      r = train_step(batch, model, cfg.training.optimizer);
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    row["train_loss"] = r.loss;
    row["tokens"] = r.tokens;
    row["learning_rate"] = r.learning_rate;
    if (cfg.training.log_timing) row["wall_ms"] = std::round(ms * 1000.0) / 1000.0;
    log << row.dump() << '\n';
    rep.final_train_loss = r.loss;

    if (!valid_ex.empty() && (step % cfg.training.eval_interval == 0 || step == total)) {
      const double vloss = corpus_loss(valid_ex, model, bs);
      const auto s = score(decode_all(eval_ex, model, codec, cfg.decoding), eval_docs);
      const json eval_row{{"step", step},
                          {"valid_loss", vloss},
                          {"rouge1", pct(s.rouge1.f1)},
                          {"rouge2", pct(s.rouge2.f1)},
                          {"rougeL", pct(s.rougeL.f1)}};
      log << eval_row.dump() << '\n';
      out << "step " << step << ": train_loss " << r.loss << ", valid_loss " << vloss << ", rouge-1/2/L f1 "
          << pct(s.rouge1.f1) << "/" << pct(s.rouge2.f1) << "/" << pct(s.rougeL.f1) << "\n";
    }
    log.flush();
    if (cfg.training.checkpoint_interval && step % cfg.training.checkpoint_interval == 0)
      save_checkpoint(cfg.run_dir() / ("step-" + std::to_string(step) + ".ckpt"), model, extra);
  }
  save_checkpoint(cfg.final_checkpoint_path(), model, extra);
  rep.last_step = model.step();
  rep.checkpoint = cfg.final_checkpoint_path();

  out << json{{"command", "train"},
              {"variant", to_string(cfg.model.variant)},
              {"first_step", rep.first_step},
              {"last_step", rep.last_step},
              {"final_train_loss", rep.final_train_loss},
              {"parameters", model.params().scalar_count()},
              {"checkpoint", rep.checkpoint.string()},
              {"log", cfg.train_log_path().string()}}
             .dump()
      << '\n';
  out << "train: " << to_string(cfg.model.variant) << " steps " << rep.first_step << ".." << rep.last_step
      << ", final loss " << rep.final_train_loss << "\n  checkpoint " << rep.checkpoint.string() << "\n";
  return rep;
}

rouge::RougeScore cmd_evaluate(const ExperimentConfig& cfg, const fs::path& checkpoint,
                               const std::optional<fs::path>& test, std::ostream& out) {
  const auto test_path = test ? test : cfg.data.test;
  if (!test_path) throw ConfigError("no test set: pass one or set data.test");
  auto loaded = load_model(checkpoint);
  const auto& mc = loaded.model.config();

  if (loaded.variant != to_string(cfg.model.variant))
    throw ConfigError("checkpoint holds variant '" + loaded.variant + "' but the config selects '" +
                      to_string(cfg.model.variant) + "'");
  auto expected = make_model_config(cfg, loaded.codec.vocab_size());
  expected.seed = mc.seed;
  if (!(expected == mc))
    throw ConfigError("checkpoint architecture does not match the model section of the config:\n  checkpoint " +
                      to_json(mc).dump() + "\n  config     " + to_json(expected).dump());
  if (!loaded.codec.is_bpe() && fs::exists(cfg.word_vocab_path()) &&
      !(Vocabulary::load(cfg.word_vocab_path()) == loaded.codec.vocab()))
    throw ConfigError(cfg.word_vocab_path().string() + " differs from the vocabulary the checkpoint was trained with");

  auto docs = read_corpus(*test_path, "test set").documents;
  if (docs.empty()) throw DataError("test set " + test_path->string() + " has no usable records");
  const auto examples = to_examples(docs, loaded.codec, mc.max_positions);
  const auto hyps = decode_all(examples, loaded.model, loaded.codec, cfg.decoding);
  const auto s = score(hyps, docs);

  auto record = json::parse(rouge::report_json(s));
  record["command"] = "evaluate";
  record["examples"] = docs.size();
  record["variant"] = loaded.variant;
  out << record.dump() << '\n' << rouge::report_text(s);
  return s;
}

std::string cmd_summarize(const fs::path& checkpoint, const std::string& text, const DecodeOptions& options,
                          std::ostream& out, std::ostream& err) {
  options.validate();
  Document doc;
  doc.source_tokens = tokenize(text);
  if (doc.source_tokens.empty()) throw ConfigError("input text is empty");
  const auto loaded = load_model(checkpoint);
  const auto max_pos = loaded.model.config().max_positions;
  const auto n = loaded.codec.encode(doc.source_tokens).size();
  if (n > max_pos)
    err << "warning: input truncated from " << n << " to " << max_pos << " model tokens\n";
  const auto ex = loaded.codec.to_example(doc, max_pos);
  const auto h = decode(ex, loaded.model, options);
  const auto summary = join(loaded.codec.decode(h.tokens));
  out << summary << '\n';
  return summary;
}

}  // namespace tsum
