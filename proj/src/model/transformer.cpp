#include "tsum/model/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>

#include "tsum/errors.hpp"
#include "tsum/kernels.hpp"

namespace tsum {

using namespace layers;

namespace {

double uniform(std::mt19937_64& rng, double bound) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * bound;
}

std::vector<std::uint8_t> valid_flags(std::span<const TokenId> ids) {
  std::vector<std::uint8_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = ids[i] != kPadId;
  return out;
}

// Under LVT, ids outside the batch vocabulary fall back to UNK so no
// frozen row is read or written.
std::vector<TokenId> restrict_ids(std::span<const TokenId> ids, const BatchVocab* bv) {
  std::vector<TokenId> out(ids.begin(), ids.end());
  if (bv)
    for (auto& id : out)
      if (!bv->contains(id)) id = kUnkId;
  return out;
}

Matrix lookup_rows(const Matrix& table, std::span<const TokenId> ids) {
  Matrix out(ids.size(), table.cols());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    require(ids[t] >= 0 && static_cast<std::size_t>(ids[t]) < table.rows(),
            "token id " + std::to_string(ids[t]) + " out of range for embedding table with " +
                std::to_string(table.rows()) + " rows");
    std::copy_n(table.row(static_cast<std::size_t>(ids[t])).data(), table.cols(), out.row(t).data());
  }
  return out;
}

// grad[ids[t]] += d[t], first `width` columns of d.
void scatter_rows(Matrix& grad, std::span<const TokenId> ids, const Matrix& d) {
  for (std::size_t t = 0; t < ids.size(); ++t) {
    auto dst = grad.row(static_cast<std::size_t>(ids[t]));
    auto src = d.row(t);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
}

struct EncoderLayerCache {
  LayerNormCache ln1, ln2;
  AttentionCache attn;
  FfnCache ffn;
  DropoutMask drop_attn, drop_ffn;
};

struct DecoderLayerCache {
  LayerNormCache ln1, ln2, ln3;
  AttentionCache self_attn, cross_attn;
  FfnCache ffn;
  DropoutMask drop_self, drop_cross, drop_ffn;
};

struct PassCache {
  std::vector<TokenId> source;
  std::vector<TokenId> decoder_input;
  Matrix src_concat;  // FRE encoder input before the optional map
  DropoutMask enc_drop, dec_drop;
  std::vector<EncoderLayerCache> enc;
  LayerNormCache enc_final;
  std::vector<DecoderLayerCache> dec;
  LayerNormCache dec_final;
  Matrix memory;
  Matrix dec_out;
  Matrix out_weight;  // rows actually used by the output projection
  Matrix out_bias;
};

DropoutMask dropout_for(const Matrix& x, const Model& model, Mode mode, std::mt19937_64* rng) {
  if (mode != Mode::Train || model.config().dropout_rate <= 0.0) return {};
  require(rng != nullptr, "train-mode dropout needs a random generator");
  return make_dropout(x.size(), model.config().dropout_rate, *rng);
}

Matrix embed_source_impl(const Example& ex, const Model& model, PassCache* cache) {
  const auto& ps = model.params();
  const auto& refs = model.refs();
  if (const FeatureLayout* layout = feature_layout(model.config().embedding)) {
    require(ex.source_features.size() == ex.source.size(),
            "feature-rich encoder needs one feature tuple per source token");
    Matrix word = lookup_rows(ps[refs.enc_embed].value, ex.source);
    Matrix concat = assemble_fre_rows(word, ex.source_features, *layout);
    Matrix x = refs.fre_map ? kernels::matmul(concat, ps[*refs.fre_map].value) : concat;
    if (cache) cache->src_concat = std::move(concat);
    return x;
  }
  return lookup_rows(ps[refs.enc_embed].value, ex.source);
}

Matrix run_encoder(const Example& ex, const Model& model, Mode mode, std::mt19937_64* rng, PassCache* cache) {
  const auto& cfg = model.config();
  const auto& ps = model.params();
  const auto& refs = model.refs();
  Matrix x = embed_source_impl(ex, model, cache);
  x += positional_encoding(x.rows(), cfg.d_model, cfg.max_positions);
  DropoutMask drop = dropout_for(x, model, mode, rng);
  drop.apply(x);

  const auto src_valid = valid_flags(ex.source);
  const auto mask = AttentionMask::keys(x.rows(), src_valid);
  if (cache) {
    cache->enc_drop = std::move(drop);
    cache->enc.assign(refs.encoder.size(), {});
  }
  for (std::size_t l = 0; l < refs.encoder.size(); ++l) {
    const auto& r = refs.encoder[l];
    EncoderLayerCache* lc = cache ? &cache->enc[l] : nullptr;
    Matrix a = layer_norm_forward(ps, r.ln1, x, lc ? &lc->ln1 : nullptr);
    Matrix att = attention_forward(ps, r.self_attn, a, a, mask, lc ? &lc->attn : nullptr);
    DropoutMask d1 = dropout_for(att, model, mode, rng);
    d1.apply(att);
    x += att;
    Matrix b = layer_norm_forward(ps, r.ln2, x, lc ? &lc->ln2 : nullptr);
    Matrix f = ffn_forward(ps, r.ffn, b, lc ? &lc->ffn : nullptr);
    DropoutMask d2 = dropout_for(f, model, mode, rng);
    d2.apply(f);
    x += f;
    if (lc) {
      lc->drop_attn = std::move(d1);
      lc->drop_ffn = std::move(d2);
    }
  }
  return layer_norm_forward(ps, refs.enc_final, x, cache ? &cache->enc_final : nullptr);
}

Matrix run_decoder(const Matrix& memory, std::span<const TokenId> source, std::span<const TokenId> dec_in,
                   const Model& model, Mode mode, std::mt19937_64* rng, PassCache* cache) {
  const auto& cfg = model.config();
  const auto& ps = model.params();
  const auto& refs = model.refs();
  Matrix y = lookup_rows(ps[refs.dec_embed].value, dec_in);
  y += positional_encoding(y.rows(), cfg.d_model, cfg.max_positions);
  DropoutMask drop = dropout_for(y, model, mode, rng);
  drop.apply(y);

  const auto self_mask = AttentionMask::causal(valid_flags(dec_in));
  const auto cross_mask = AttentionMask::keys(y.rows(), valid_flags(source));
  if (cache) {
    cache->dec_drop = std::move(drop);
    cache->dec.assign(refs.decoder.size(), {});
  }
  for (std::size_t l = 0; l < refs.decoder.size(); ++l) {
    const auto& r = refs.decoder[l];
    DecoderLayerCache* lc = cache ? &cache->dec[l] : nullptr;
    Matrix a = layer_norm_forward(ps, r.ln1, y, lc ? &lc->ln1 : nullptr);
    Matrix s = attention_forward(ps, r.self_attn, a, a, self_mask, lc ? &lc->self_attn : nullptr);
    DropoutMask d1 = dropout_for(s, model, mode, rng);
    d1.apply(s);
    y += s;
    Matrix b = layer_norm_forward(ps, r.ln2, y, lc ? &lc->ln2 : nullptr);
    Matrix c = attention_forward(ps, r.cross_attn, b, memory, cross_mask, lc ? &lc->cross_attn : nullptr);
    DropoutMask d2 = dropout_for(c, model, mode, rng);
    d2.apply(c);
    y += c;
    Matrix e = layer_norm_forward(ps, r.ln3, y, lc ? &lc->ln3 : nullptr);
    Matrix f = ffn_forward(ps, r.ffn, e, lc ? &lc->ffn : nullptr);
    DropoutMask d3 = dropout_for(f, model, mode, rng);
    d3.apply(f);
    y += f;
    if (lc) {
      lc->drop_self = std::move(d1);
      lc->drop_cross = std::move(d2);
      lc->drop_ffn = std::move(d3);
    }
  }
  return layer_norm_forward(ps, refs.dec_final, y, cache ? &cache->dec_final : nullptr);
}

Matrix project_output(const Matrix& h, const Model& model, const BatchVocab* bv, PassCache* cache) {
  const auto& ps = model.params();
  const auto& refs = model.refs();
  Matrix w = bv ? gather_rows(ps[refs.out_weight].value, *bv) : ps[refs.out_weight].value;
  Matrix b = bv ? gather_rows(ps[refs.out_bias].value, *bv) : ps[refs.out_bias].value;
  Matrix logits(h.rows(), w.rows());
  for (std::size_t t = 0; t < logits.rows(); ++t)
    for (std::size_t j = 0; j < logits.cols(); ++j) logits(t, j) = b(j, 0);
  kernels::gemm_nt(h, w, logits, /*accumulate=*/true);
  if (cache) {
    cache->out_weight = std::move(w);
    cache->out_bias = std::move(b);
  }
  return logits;
}

Matrix run_forward(const Example& ex, const Model& model, Mode mode, const BatchVocab* bv, std::mt19937_64* rng,
                   PassCache* cache) {
  Example local;
  const Example* use = &ex;
  if (bv) {
    local = ex;
    local.decoder_input = restrict_ids(ex.decoder_input, bv);
    use = &local;
  }
  Matrix memory = run_encoder(*use, model, mode, rng, cache);
  Matrix h = run_decoder(memory, use->source, use->decoder_input, model, mode, rng, cache);
  Matrix logits = project_output(h, model, bv, cache);
  if (cache) {
    cache->source = use->source;
    cache->decoder_input = use->decoder_input;
    cache->memory = std::move(memory);
    cache->dec_out = std::move(h);
  }
  return logits;
}

void backprop(Model& model, PassCache& c, const Matrix& dlogits, const BatchVocab* bv) {
  auto& ps = model.params();
  const auto& refs = model.refs();

  // Output projection.
  Matrix dw = kernels::matmul_tn(dlogits, c.dec_out);
  Matrix db(dlogits.cols(), 1);
  for (std::size_t t = 0; t < dlogits.rows(); ++t)
    for (std::size_t j = 0; j < dlogits.cols(); ++j) db(j, 0) += dlogits(t, j);
  if (bv) {
    scatter_row_gradients(ps[refs.out_weight].grad, dw, *bv);
    scatter_row_gradients(ps[refs.out_bias].grad, db, *bv);
  } else {
    ps[refs.out_weight].grad += dw;
    ps[refs.out_bias].grad += db;
  }
  Matrix dy = layer_norm_backward(ps, refs.dec_final, c.dec_final, kernels::matmul(dlogits, c.out_weight));

  Matrix dmemory(c.memory.rows(), c.memory.cols());
  for (std::size_t li = refs.decoder.size(); li-- > 0;) {
    const auto& r = refs.decoder[li];
    auto& lc = c.dec[li];
    Matrix g = dy;
    lc.drop_ffn.apply(g);
    dy += layer_norm_backward(ps, r.ln3, lc.ln3, ffn_backward(ps, r.ffn, lc.ffn, g));

    g = dy;
    lc.drop_cross.apply(g);
    Matrix dq, dkv;
    attention_backward(ps, r.cross_attn, lc.cross_attn, g, dq, dkv);
    dmemory += dkv;
    dy += layer_norm_backward(ps, r.ln2, lc.ln2, dq);

    g = dy;
    lc.drop_self.apply(g);
    attention_backward(ps, r.self_attn, lc.self_attn, g, dq, dkv);
    dq += dkv;
    dy += layer_norm_backward(ps, r.ln1, lc.ln1, dq);
  }
  c.dec_drop.apply(dy);
  scatter_rows(ps[refs.dec_embed].grad, c.decoder_input, dy);

  Matrix dx = layer_norm_backward(ps, refs.enc_final, c.enc_final, dmemory);
  for (std::size_t li = refs.encoder.size(); li-- > 0;) {
    const auto& r = refs.encoder[li];
    auto& lc = c.enc[li];
    Matrix g = dx;
    lc.drop_ffn.apply(g);
    dx += layer_norm_backward(ps, r.ln2, lc.ln2, ffn_backward(ps, r.ffn, lc.ffn, g));

    g = dx;
    lc.drop_attn.apply(g);
    Matrix dq, dkv;
    attention_backward(ps, r.self_attn, lc.attn, g, dq, dkv);
    dq += dkv;
    dx += layer_norm_backward(ps, r.ln1, lc.ln1, dq);
  }
  c.enc_drop.apply(dx);

  if (const FeatureLayout* layout = feature_layout(model.config().embedding)) {
    Matrix dconcat;
    if (refs.fre_map) {
      kernels::gemm_tn(c.src_concat, dx, ps[*refs.fre_map].grad, /*accumulate=*/true);
      dconcat = kernels::matmul_nt(dx, ps[*refs.fre_map].value);
    } else {
      dconcat = std::move(dx);
    }
    // The one-hot spans are constants; only the word span has parameters.
    scatter_rows(ps[refs.enc_embed].grad, c.source, dconcat.columns(0, layout->word_dim));
  } else {
    scatter_rows(ps[refs.enc_embed].grad, c.source, dx);
  }
}

// Sum of per-position losses and their count; gradient rows scaled by `scale`.
std::pair<double, std::size_t> cross_entropy_sum(const Matrix& logits, std::span<const TokenId> targets,
                                                 double eps, Matrix* dlogits, double scale) {
  require(logits.rows() == targets.size(), "cross_entropy: " + std::to_string(logits.rows()) + " logit rows for " +
                                               std::to_string(targets.size()) + " targets");
  const std::size_t v = logits.cols();
  if (dlogits) *dlogits = Matrix(logits.rows(), v);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] == kPadId) continue;
    require(targets[t] >= 0 && static_cast<std::size_t>(targets[t]) < v,
            "target id " + std::to_string(targets[t]) + " outside the output vocabulary");
    auto row = logits.row(t);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double z : row) sum += std::exp(z - mx);
    const double lse = mx + std::log(sum);
    const auto tgt = static_cast<std::size_t>(targets[t]);
    double loss = lse - row[tgt];
    if (eps > 0.0) {
      double mean_z = 0.0;
      for (double z : row) mean_z += z;
      mean_z /= static_cast<double>(v);
      loss = (1.0 - eps) * loss + eps * (lse - mean_z);
    }
    total += loss;
    ++count;
    if (dlogits) {
      auto d = dlogits->row(t);
      for (std::size_t j = 0; j < v; ++j) {
        const double q = (j == tgt ? 1.0 - eps : 0.0) + eps / static_cast<double>(v);
        d[j] = (std::exp(row[j] - lse) - q) * scale;
      }
    }
  }
  return {total, count};
}

std::size_t count_targets(const Batch& batch) {
  std::size_t n = 0;
  for (const auto& ex : batch.examples)
    n += static_cast<std::size_t>(std::count_if(ex.decoder_target.begin(), ex.decoder_target.end(),
                                                [](TokenId t) { return t != kPadId; }));
  return n;
}

std::vector<TokenId> local_targets(const Example& ex, const BatchVocab* bv) {
  if (!bv) return ex.decoder_target;
  std::vector<TokenId> out;
  out.reserve(ex.decoder_target.size());
  for (TokenId t : ex.decoder_target) out.push_back(bv->contains(t) ? bv->local(t) : bv->local(kUnkId));
  return out;
}

}  // namespace

Example make_example(std::vector<TokenId> source, std::vector<TokenFeatures> features,
                     std::span<const TokenId> target, std::size_t max_positions) {
  require(max_positions >= 2, "max_positions must be at least 2");
  Example ex;
  if (source.size() > max_positions) source.resize(max_positions);
  if (features.size() > max_positions) features.resize(max_positions);
  ex.source = std::move(source);
  ex.source_features = std::move(features);
  const std::size_t n = std::min(target.size(), max_positions - 1);
  ex.decoder_input.push_back(kBosId);
  ex.decoder_input.insert(ex.decoder_input.end(), target.begin(), target.begin() + static_cast<std::ptrdiff_t>(n));
  ex.decoder_target.assign(target.begin(), target.begin() + static_cast<std::ptrdiff_t>(n));
  ex.decoder_target.push_back(kEosId);
  return ex;
}

Batch pad_batch(std::vector<Example> examples) {
  std::size_t src_len = 0, tgt_len = 0;
  for (const auto& ex : examples) {
    src_len = std::max(src_len, ex.source.size());
    tgt_len = std::max(tgt_len, ex.decoder_input.size());
  }
  for (auto& ex : examples) {
    const bool features = !ex.source_features.empty();
    ex.source.resize(src_len, kPadId);
    if (features) ex.source_features.resize(src_len);
    ex.decoder_input.resize(tgt_len, kPadId);
    ex.decoder_target.resize(tgt_len, kPadId);
  }
  return Batch{std::move(examples)};
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  build();
  initialize();
}

void Model::build() {
  const std::size_t d = config_.d_model;
  const std::size_t v = config_.vocab_size;
  auto& ps = params_;

  std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, SharedBpe>) {
          refs_.enc_embed = refs_.dec_embed = ps.add("embed.shared", v, d, /*vocab_rows=*/true);
        } else {
          if constexpr (std::is_same_v<E, SeparateWord>)
            refs_.enc_embed = ps.add("embed.encoder", v, d);
          else
            refs_.enc_embed = ps.add("embed.encoder", v, e.layout.word_dim);
          if constexpr (std::is_same_v<E, FreLinearMapToHidden>)
            refs_.fre_map = ps.add("embed.fre_map", e.layout.concat_dim(), d);
          refs_.dec_embed = ps.add("embed.decoder", v, d, /*vocab_rows=*/true);
        }
      },
      config_.embedding);

  auto linear = [&](const std::string& name, std::size_t in, std::size_t out) {
    return layers::LinearRef{ps.add(name + ".weight", in, out), ps.add(name + ".bias", 1, out)};
  };
  auto norm = [&](const std::string& name) {
    return layers::LayerNormRef{ps.add(name + ".gamma", 1, d), ps.add(name + ".beta", 1, d)};
  };
  auto attention = [&](const std::string& name) {
    return layers::AttentionRef{linear(name + ".query", d, d), linear(name + ".key", d, d),
                                linear(name + ".value", d, d), linear(name + ".out", d, d), config_.num_heads};
  };
  auto ffn = [&](const std::string& name) {
    return layers::FfnRef{linear(name + ".in", d, config_.ffn_dim), linear(name + ".out", config_.ffn_dim, d)};
  };

  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l);
    Refs::EncoderLayer layer;
    layer.ln1 = norm(p + ".ln1");
    layer.self_attn = attention(p + ".self_attn");
    layer.ln2 = norm(p + ".ln2");
    layer.ffn = ffn(p + ".ffn");
    refs_.encoder.push_back(layer);
  }
  refs_.enc_final = norm("encoder.final_ln");
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string p = "decoder." + std::to_string(l);
    Refs::DecoderLayer layer;
    layer.ln1 = norm(p + ".ln1");
    layer.self_attn = attention(p + ".self_attn");
    layer.ln2 = norm(p + ".ln2");
    layer.cross_attn = attention(p + ".cross_attn");
    layer.ln3 = norm(p + ".ln3");
    layer.ffn = ffn(p + ".ffn");
    refs_.decoder.push_back(layer);
  }
  refs_.dec_final = norm("decoder.final_ln");
  refs_.out_weight =
      config_.tie_output_to_embedding ? refs_.dec_embed : ps.add("output.weight", v, d, /*vocab_rows=*/true);
  refs_.out_bias = ps.add("output.bias", v, 1, /*vocab_rows=*/true);
}

void Model::initialize() {
  // Uniform in +-1/sqrt(fan_in); embedding tables have fan-in 1. Norm
  // scales start at 1, offsets and biases at 0.
  std::mt19937_64 rng(config_.seed);
  for (auto& p : params_) {
    const std::string& n = p.name;
    auto ends = [&](std::string_view s) { return n.size() >= s.size() && n.compare(n.size() - s.size(), s.size(), s) == 0; };
    if (ends(".gamma")) {
      p.value.fill(1.0);
    } else if (ends(".beta") || ends(".bias")) {
      p.value.fill(0.0);
    } else {
      double bound = 1.0;
      if (n.rfind("embed.", 0) == 0 && n != "embed.fre_map")
        bound = 1.0;
      else if (n == "output.weight")
        bound = 1.0 / std::sqrt(static_cast<double>(p.value.cols()));
      else
        bound = 1.0 / std::sqrt(static_cast<double>(p.value.rows()));
      for (double& x : p.value.flat()) x = uniform(rng, bound);
    }
  }
}

Matrix Model::embed_source(const Example& ex) const { return embed_source_impl(ex, *this, nullptr); }

Matrix Model::encode(const Example& ex) const { return run_encoder(ex, *this, Mode::Eval, nullptr, nullptr); }

std::vector<double> Model::next_log_probs(const Matrix& memory, std::span<const TokenId> source,
                                          std::span<const TokenId> prefix) const {
  require(!prefix.empty(), "decoder prefix must start with BOS");
  Matrix h = run_decoder(memory, source, prefix, *this, Mode::Eval, nullptr, nullptr);
  Matrix last(1, h.cols());
  std::copy_n(h.row(h.rows() - 1).data(), h.cols(), last.data());
  Matrix logits = project_output(last, *this, nullptr, nullptr);
  auto row = logits.row(0);
  const double mx = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double z : row) sum += std::exp(z - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] - lse;
  return out;
}

Matrix forward(const Example& ex, const Model& model, Mode mode, const BatchVocab* bv, std::mt19937_64* rng) {
  return run_forward(ex, model, mode, bv, rng, nullptr);
}

double cross_entropy_loss(const Matrix& logits, std::span<const TokenId> targets, double label_smoothing,
                          Matrix* dlogits) {
  auto [sum, count] = cross_entropy_sum(logits, targets, label_smoothing, nullptr, 1.0);
  require(count > 0, "cross_entropy_loss: every target position is padding");
  if (dlogits) cross_entropy_sum(logits, targets, label_smoothing, dlogits, 1.0 / static_cast<double>(count));
  return sum / static_cast<double>(count);
}

LossResult batch_loss(const Batch& batch, const Model& model, Mode mode, const BatchVocab* bv) {
  const std::size_t tokens = count_targets(batch);
  require(tokens > 0, "batch has no non-padding targets");
  std::mt19937_64 rng(model.config().seed ^ (model.step() * 0x9E3779B97F4A7C15ULL));
  double total = 0.0;
  for (const auto& ex : batch.examples) {
    Matrix logits = run_forward(ex, model, mode, bv, &rng, nullptr);
    total += cross_entropy_sum(logits, local_targets(ex, bv), model.config().label_smoothing, nullptr, 1.0).first;
  }
  return {total / static_cast<double>(tokens), tokens};
}

LossResult backward(const Batch& batch, Model& model, Mode mode, const BatchVocab* bv, std::mt19937_64* rng) {
  const std::size_t tokens = count_targets(batch);
  require(tokens > 0, "batch has no non-padding targets");
  model.params().zero_grad();
  const double scale = 1.0 / static_cast<double>(tokens);
  double total = 0.0;
  for (const auto& ex : batch.examples) {
    PassCache cache;
    Matrix logits = run_forward(ex, model, mode, bv, rng, &cache);
    Matrix dlogits;
    total += cross_entropy_sum(logits, local_targets(ex, bv), model.config().label_smoothing, &dlogits, scale).first;
    backprop(model, cache, dlogits, bv);
  }
  for (const auto& p : model.params())
    for (double g : p.grad.flat())
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient in parameter " + p.name);
  return {total / static_cast<double>(tokens), tokens};
}

}  // namespace tsum
