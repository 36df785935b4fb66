// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "support/oracles.hpp"
#include "support/testing.hpp"
#include "tsum/bpe.hpp"
#include "tsum/errors.hpp"
#include "tsum/model/decode.hpp"
#include "tsum/model/optimizer.hpp"
#include "tsum/pipeline/commands.hpp"
#include "tsum/pipeline/data.hpp"
#include "tsum/rouge.hpp"

using namespace tsum;
using namespace tsum::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const Variant kVariants[] = {Variant::Bpe, Variant::Baseline, Variant::FreF2h, Variant::FreLm2h, Variant::FreLvt};

ExperimentConfig config_for(const fs::path& work, Variant v, const fs::path& train = {}) {
  auto j = nlohmann::json::parse(slurp(source_dir() / "configs" / "fixture.json"));
  j["data"]["work_dir"] = work.string();
  j["model"]["variant"] = to_string(v);
  if (!train.empty()) {
    j["data"]["train"] = train.string();
    j["data"].erase("test");
    j["corpus"]["n_valid"] = 0;
  }
  return experiment_from_json(j, source_dir() / "configs");
}

void prepare(const ExperimentConfig& cfg) {
  std::ostringstream sink;
  cmd_preprocess(cfg, sink);
  cmd_build_vocab(cfg, sink);
}

// Same artifacts train/evaluate read, built through the public API.
TextCodec codec_for(const ExperimentConfig& cfg) {
  if (uses_bpe(cfg.model.variant)) return TextCodec::bpe(BpeModel::load(cfg.bpe_merges_path(), cfg.bpe_vocab_path()));
  auto vocab = Vocabulary::load(cfg.word_vocab_path());
  if (!uses_features(cfg.model.variant)) return TextCodec::words(std::move(vocab));
  return TextCodec::words_with_features(std::move(vocab), load_stats(cfg.stats_path()));
}

// 1. Every analytic gradient against central differences.
Outcome gradient_fidelity() {
  Outcome o{true, ""};
  for (Kind kind : kAllKinds) {
    Timer t;
    const std::size_t d = kind == Kind::FreF2h ? 24 : 8;
    const std::size_t v = 16;
    auto cfg = tiny_config(kind, v, d);
    Model m(cfg);
    std::mt19937_64 rng(2024);
    auto b = pad_batch({random_example(rng, v, m.uses_features(), 5, 4), random_example(rng, v, m.uses_features(), 3, 5)});
    BatchVocab bv;
    const BatchVocab* pbv = nullptr;
    if (cfg.lvt_enabled) {
      std::vector<std::vector<TokenId>> seqs;
      for (const auto& ex : b.examples) {
        seqs.push_back(ex.source);
        seqs.push_back(ex.decoder_target);
      }
      bv = build_batch_vocab(seqs, ranked_vocab(v - kNumSpecials), 12);
      pbv = &bv;
    }
    const auto r = gradient_check(m, b, pbv);
    const bool ok = r.worst < 1e-4 && t.seconds() < 120.0;
    o.pass = o.pass && ok;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + kind_name(kind) + " d=" + std::to_string(d) +
                " worst " + fmt("%.2e", r.worst) + " over " + std::to_string(r.checked) + " scalars in " +
                fmt("%.1fs", t.seconds());
  }
  return o;
}

// 2. LVT row freeze and L == |V| equivalence.
Outcome lvt_row_freeze() {
  const std::size_t words = 50, v = words + kNumSpecials;
  const auto vocab = ranked_vocab(words);
  auto cfg = tiny_config(Kind::FreLvt, v);
  cfg.lvt_size = 10;
  Model m(cfg);
  const Model init = m;
  OptimizerConfig opt;
  opt.warmup_steps = 20;
  std::mt19937_64 rng(7);
  std::set<TokenId> touched;
  std::uniform_int_distribution<std::size_t> len(2, 5);
  for (int step = 0; step < 100; ++step) {
    // Ids drawn from the first 30 words so some rows never enter a batch.
    std::vector<Example> exs;
    for (int i = 0; i < 2; ++i) exs.push_back(random_example(rng, 34, true, len(rng), len(rng)));
    auto b = pad_batch(std::move(exs));
    std::vector<std::vector<TokenId>> seqs;
    for (const auto& ex : b.examples) {
      seqs.push_back(ex.source);
      seqs.push_back(ex.decoder_target);
    }
    const auto bv = build_batch_vocab(seqs, vocab, cfg.lvt_size);
    for (auto g : bv.local_to_global()) touched.insert(g);
    train_step(b, m, opt, &bv);
  }
  std::size_t frozen_rows = 0, changed = 0;
  const std::size_t frozen_ids = v - touched.size();
  for (std::size_t pi = 0; pi < m.params().size(); ++pi) {
    const auto& p = m.params()[pi];
    if (!p.vocab_rows) continue;
    for (std::size_t r = 0; r < p.value.rows(); ++r) {
      if (touched.count(static_cast<TokenId>(r))) continue;
      ++frozen_rows;
      for (std::size_t c = 0; c < p.value.cols(); ++c)
        if (p.value(r, c) != init.params()[pi].value(r, c)) ++changed;
    }
  }

  // L == |V| against the same model trained without LVT.
  auto dense_cfg = tiny_config(Kind::FreLm2h, v);
  auto full_cfg = tiny_config(Kind::FreLvt, v);
  Model dense(dense_cfg), full(full_cfg);
  double worst = 0.0;
  std::mt19937_64 rng2(8);
  for (int step = 0; step < 50; ++step) {
    auto b = pad_batch({random_example(rng2, v, true, 4, 3), random_example(rng2, v, true, 3, 4)});
    std::vector<std::vector<TokenId>> seqs;
    for (const auto& ex : b.examples) {
      seqs.push_back(ex.source);
      seqs.push_back(ex.decoder_target);
    }
    const auto bv = build_batch_vocab(seqs, vocab, v);
    const double a = train_step(b, dense, opt).loss;
    const double c = train_step(b, full, opt, &bv).loss;
    worst = std::max(worst, std::fabs(a - c) / std::fabs(a));
  }
  Outcome o;
  o.pass = changed == 0 && frozen_rows > 0 && worst < 1e-6;
  o.detail = std::to_string(frozen_ids) + " never-selected ids (" + std::to_string(frozen_rows) + " rows), " + std::to_string(changed) +
             " changed scalars after 100 steps (L=10, |V|=" + std::to_string(v) + "); L=|V| worst loss rel diff " +
             fmt("%.1e", worst) + " over 50 steps";
  return o;
}

// 3. BPE merges against the brute-force oracle, and round trips.
Outcome bpe_correctness() {
  const std::map<std::string, std::size_t> fixture{{"low", 5}, {"lower", 2}, {"newest", 6}, {"widest", 3}};
  const auto model = bpe_learn(fixture, 10);
  const auto oracle = oracle::bpe_merges(fixture, 10);
  bool merges_ok = model.merges().size() == oracle.size();
  for (std::size_t i = 0; merges_ok && i < oracle.size(); ++i)
    merges_ok = model.merges()[i].first == oracle[i].first && model.merges()[i].second == oracle[i].second;

  std::set<char> chars;
  for (const auto& [w, n] : fixture) chars.insert(w.begin(), w.end());
  const std::string charset(chars.begin(), chars.end());
  std::mt19937_64 rng(3);
  std::size_t failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> x(1 + rng() % 6);
    for (auto& w : x)
      for (std::size_t k = 1 + rng() % 10; k > 0; --k) w += charset[rng() % charset.size()];
    if (bpe_decode(bpe_encode(x, model), model) != x) ++failures;
  }
  Outcome o;
  o.pass = merges_ok && oracle.size() == 10 && failures == 0;
  o.detail = std::string("first 10 merges ") + (merges_ok ? "match" : "differ from") + " the oracle; " +
             std::to_string(1000 - failures) + "/1000 round trips over charset '" + charset + "'";
  return o;
}

// 4. ROUGE against exhaustive oracles on every short sequence pair.
Outcome rouge_oracle() {
  Timer t;
  const auto seqs = oracle::all_sequences(3, 6);
  const auto n = static_cast<std::ptrdiff_t>(seqs.size());
  std::size_t mismatches = 0;
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : mismatches)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& a = seqs[static_cast<std::size_t>(i)];
    for (const auto& b : seqs) {
      for (std::size_t k : {1u, 2u}) {
        const auto got = rouge::rouge_n<int>(a, b, k);
        const auto want = oracle::scores(oracle::ngram_overlap(a, b, k), rouge::ngram_count(a.size(), k),
                                         rouge::ngram_count(b.size(), k));
        if (got.recall != want.recall || got.precision != want.precision || got.f1 != want.f1) ++mismatches;
      }
      const auto got = rouge::rouge_l<int>(a, b);
      const auto want = oracle::scores(oracle::lcs(a, b), a.size(), b.size());
      if (got.recall != want.recall || got.precision != want.precision || got.f1 != want.f1) ++mismatches;
    }
  }
  const double secs = t.seconds();
  Outcome o;
  o.pass = mismatches == 0 && secs < 60.0;
  o.detail = std::to_string(seqs.size() * seqs.size()) + " pairs, " + std::to_string(mismatches) +
             " mismatches, " + fmt("%.1fs", secs);
  return o;
}

// 5. FRE input structure for both FRE variants on fixture documents.
Outcome fre_structure(const fs::path& work) {
  auto span_ok = [](std::span<const double> row, std::size_t begin, std::size_t size) {
    std::size_t ones = 0;
    for (std::size_t k = begin; k < begin + size; ++k) {
      if (row[k] == 1.0) ++ones;
      else if (row[k] != 0.0) return false;
    }
    return ones == 1;
  };
  std::size_t rows = 0, bad_spans = 0;
  bool f2h_ok = true, lm2h_ok = true;
  double linearity = 0.0, projection = 0.0;

  for (Variant v : {Variant::FreF2h, Variant::FreLm2h}) {
    const auto cfg = config_for(work, v);
    const auto codec = codec_for(cfg);
    const Model model(make_model_config(cfg, codec.vocab_size()));
    const auto* layout = feature_layout(model.config().embedding);
    const auto docs = load_split(cfg.annotated_path(), "train");
    const auto& word_table = model.params().get("embed.encoder").value;
    for (std::size_t di = 0; di < 40 && di < docs.size(); ++di) {
      const auto ex = codec.to_example(docs[di], model.config().max_positions);
      const auto embedded = model.embed_source(ex);
      for (std::size_t t = 0; t < ex.source.size(); ++t) {
        const auto concat = assemble_fre_vector(word_table.row(static_cast<std::size_t>(ex.source[t])),
                                                ex.source_features[t], *layout);
        ++rows;
        for (auto [b, s] : {std::pair{layout->pos_offset(), layout->pos_dim},
                            std::pair{layout->tf_offset(), layout->tf_dim},
                            std::pair{layout->idf_offset(), layout->idf_dim}})
          if (!span_ok(concat, b, s)) ++bad_spans;
        if (v == Variant::FreF2h) {
          // The encoder input is the concatenation itself.
          f2h_ok = f2h_ok && embedded.cols() == model.config().d_model && concat.size() == model.config().d_model;
          for (std::size_t c = 0; c < concat.size(); ++c) f2h_ok = f2h_ok && embedded(t, c) == concat[c];
        } else {
          const auto& map = model.params().get("embed.fre_map").value;
          const auto& variant = std::get<FreLinearMapToHidden>(model.config().embedding);
          const auto projected = project_to_hidden(concat, variant, map);
          for (std::size_t c = 0; c < projected.size(); ++c)
            projection = std::max(projection, std::fabs(projected[c] - embedded(t, c)));
        }
      }
    }
    std::set<std::string> names;
    for (const auto& p : model.params()) names.insert(p.name);
    if (v == Variant::FreF2h) {
      for (const auto& n : names) f2h_ok = f2h_ok && n.find("fre_map") == std::string::npos;
    } else {
      std::size_t map_params = 0;
      for (const auto& n : names) map_params += n.find("fre_map") != std::string::npos;
      const auto& map = model.params().get("embed.fre_map").value;
      lm2h_ok = map_params == 1 && map.rows() == layout->concat_dim() && map.cols() == model.config().d_model;
      // Linearity: P(a x + b y) == a P(x) + b P(y).
      const auto& variant = std::get<FreLinearMapToHidden>(model.config().embedding);
      std::mt19937_64 rng(5);
      std::normal_distribution<double> g;
      for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(layout->concat_dim()), y(layout->concat_dim()), mix(layout->concat_dim());
        const double a = g(rng), b = g(rng);
        for (std::size_t k = 0; k < x.size(); ++k) {
          x[k] = g(rng);
          y[k] = g(rng);
          mix[k] = a * x[k] + b * y[k];
        }
        const auto px = project_to_hidden(x, variant, map), py = project_to_hidden(y, variant, map);
        const auto pm = project_to_hidden(mix, variant, map);
        for (std::size_t k = 0; k < pm.size(); ++k)
          linearity = std::max(linearity, std::fabs(pm[k] - (a * px[k] + b * py[k])));
      }
    }
  }
  Outcome o;
  o.pass = bad_spans == 0 && rows > 0 && f2h_ok && lm2h_ok && linearity < 1e-9 && projection < 1e-9;
  o.detail = std::to_string(rows) + " token rows, " + std::to_string(bad_spans) + " bad one-hot spans; f2h " +
             (f2h_ok ? "width == d_model, no projection" : "FAILED") + "; lm2h " +
             (lm2h_ok ? "bias-free map" : "FAILED") + ", linearity err " + fmt("%.1e", linearity);
  return o;
}

// 6. Each variant memorizes the 10-pair corpus.
Outcome overfit(const fs::path& work) {
  Outcome o{true, ""};
  const auto corpus = data_file("overfit_10.jsonl");
  for (Variant v : kVariants) {
    Timer t;
    auto cfg = config_for(work, v, corpus);
    cfg.model.dropout = 0.0;
    cfg.model.lvt_size = 60;
    cfg.training.optimizer.warmup_steps = 100;
    prepare(cfg);
    const auto codec = codec_for(cfg);
    Model model(make_model_config(cfg, codec.vocab_size()));
    const auto docs = load_split(cfg.annotated_path(), "train");
    std::vector<Example> exs;
    for (const auto& d : docs) exs.push_back(codec.to_example(d, model.config().max_positions));
    // Two fixed minibatches of five.
    std::vector<Batch> batches;
    std::vector<BatchVocab> vocabs;
    bool truncated = false;
    for (std::size_t i = 0; i < exs.size(); i += 5) {
      const auto end = std::min(exs.size(), i + 5);
      batches.push_back(pad_batch({exs.begin() + static_cast<std::ptrdiff_t>(i), exs.begin() + static_cast<std::ptrdiff_t>(end)}));
      if (v == Variant::FreLvt) {
        std::span<const Document> part(docs.data() + i, end - i);
        vocabs.push_back(build_batch_vocab(part, codec.vocab(), cfg.model.lvt_size));
        truncated = truncated || vocabs.back().truncated;
      }
    }
    std::size_t step = 0, reproduced = 0;
    double epoch_loss = 1e9;
    bool done = false;
    while (step < 2000 && !done) {
      double sum = 0.0;
      for (std::size_t bi = 0; bi < batches.size(); ++bi) {
        sum += train_step(batches[bi], model, cfg.training.optimizer, vocabs.empty() ? nullptr : &vocabs[bi]).loss;
        ++step;
      }
      epoch_loss = sum / static_cast<double>(batches.size());
      if (epoch_loss < 0.1) {
        reproduced = 0;
        for (std::size_t i = 0; i < exs.size(); ++i) {
          const auto h = greedy_decode(exs[i], model, docs[i].target_tokens.size() + 10);
          reproduced += codec.decode(h.tokens) == docs[i].target_tokens;
        }
        done = reproduced >= 9;
      }
    }
    const bool ok = done && t.seconds() < 600.0;
    o.pass = o.pass && ok;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + to_string(v) + ": loss " + fmt("%.3f", epoch_loss) +
                " at step " + std::to_string(step) + ", " + std::to_string(reproduced) + "/10 greedy" +
                (truncated ? " (batch vocab truncated)" : "") + " " + fmt("%.1fs", t.seconds());
  }
  return o;
}

// 7. Initial loss with near-zero output weights: ln|V| over the full
// vocabulary, ln L in LVT training mode.
Outcome uniform_loss(const fs::path& work) {
  auto base_cfg = config_for(work, Variant::Baseline);
  base_cfg.model.dropout = 0.0;
  auto lvt_cfg = config_for(work, Variant::FreLvt);
  lvt_cfg.model.dropout = 0.0;
  const auto docs = load_split(base_cfg.annotated_path(), "train");
  std::vector<Document> batch_docs(docs.begin(), docs.begin() + 16);

  auto loss_of = [&](const ExperimentConfig& cfg, bool lvt, std::size_t& size) {
    const auto codec = codec_for(cfg);
    Model model(make_model_config(cfg, codec.vocab_size()));
    model.params().get("output.weight").value *= 1e-4;
    std::vector<Example> exs;
    for (const auto& d : batch_docs) exs.push_back(codec.to_example(d, model.config().max_positions));
    const auto batch = pad_batch(std::move(exs));
    if (!lvt) {
      size = codec.vocab_size();
      return batch_loss(batch, model, Mode::Train).loss;
    }
    const auto bv = build_batch_vocab(batch_docs, codec.vocab(), cfg.model.lvt_size);
    size = bv.size();
    return batch_loss(batch, model, Mode::Train, &bv).loss;
  };
  std::size_t v = 0, l = 0;
  const double full = loss_of(base_cfg, false, v);
  const double lvt = loss_of(lvt_cfg, true, l);
  const double rv = full / std::log(static_cast<double>(v)), rl = lvt / std::log(static_cast<double>(l));
  Outcome o;
  o.pass = std::fabs(rv - 1.0) < 0.1 && std::fabs(rl - 1.0) < 0.1;
  o.detail = "baseline " + fmt("%.4f", full) + " vs ln " + std::to_string(v) + " = " +
             fmt("%.4f", std::log(static_cast<double>(v))) + "; lvt " + fmt("%.4f", lvt) + " vs ln " +
             std::to_string(l) + " = " + fmt("%.4f", std::log(static_cast<double>(l)));
  return o;
}

std::string strip_timing(const std::string& log) {
  std::istringstream in(log);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::json::parse(line);
    j.erase("wall_ms");
    out += j.dump() + '\n';
  }
  return out;
}

// 8. Two identical fixture runs produce identical artifacts and reports.
Outcome determinism(const fs::path& root) {
  std::map<std::string, std::string> runs[2];
  for (int r = 0; r < 2; ++r) {
    const auto work = root / ("run" + std::to_string(r));
    for (Variant v : kVariants) {
      const auto cfg = config_for(work, v);
      std::ostringstream out;
      if (v == Variant::Bpe) {
        cmd_preprocess(cfg, out);
        for (const auto& p : {cfg.annotated_path(), cfg.stats_path()}) runs[r][p.filename().string()] = slurp(p);
      }
      cmd_build_vocab(cfg, out);
      cmd_train(cfg, out);
      std::ostringstream report;
      cmd_evaluate(cfg, cfg.final_checkpoint_path(), std::nullopt, report);
      const auto name = to_string(v);
      runs[r][name + "/train_log"] = strip_timing(slurp(cfg.train_log_path()));
      runs[r][name + "/checkpoint"] = slurp(cfg.final_checkpoint_path());
      runs[r][name + "/report"] = report.str();
      for (const auto& p : {cfg.word_vocab_path(), cfg.bpe_merges_path(), cfg.bpe_vocab_path()})
        if (fs::exists(p)) runs[r][name + "/" + p.filename().string()] = slurp(p);
    }
  }
  std::vector<std::string> differing;
  for (const auto& [k, v] : runs[0])
    if (!runs[1].count(k) || runs[1].at(k) != v) differing.push_back(k);
  Outcome o;
  o.pass = differing.empty() && runs[0].size() == runs[1].size();
  o.detail = std::to_string(runs[0].size()) + " artifacts compared over 5 variants x 200 steps";
  for (const auto& d : differing) o.detail += ", differs: " + d;
  return o;
}

}  // namespace

int main() {
  const auto root = scratch_dir("acceptance");
  const auto fixture_work = root / "fixture";
  prepare(config_for(fixture_work, Variant::Baseline));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient fidelity", gradient_fidelity},
      {"LVT row freeze", lvt_row_freeze},
      {"BPE correctness", bpe_correctness},
      {"ROUGE oracle equivalence", rouge_oracle},
      {"FRE structure", [&] { return fre_structure(fixture_work); }},
      {"overfit sanity", [&] { return overfit(root / "overfit"); }},
      {"uniform-loss law", [&] { return uniform_loss(fixture_work); }},
      {"pipeline determinism", [&] { return determinism(root / "determinism"); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << ": " << criteria[i].first << " - "
              << o.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
  return failed ? 1 : 0;
}
