#include "tsum/model/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsum/errors.hpp"
#include "tsum/kernels.hpp"

namespace tsum::layers {

AttentionMask AttentionMask::keys(std::size_t q_len, std::span<const std::uint8_t> key_valid) {
  AttentionMask m{q_len, key_valid.size(), std::vector<std::uint8_t>(q_len * key_valid.size())};
  for (std::size_t q = 0; q < q_len; ++q)
    std::copy(key_valid.begin(), key_valid.end(), m.allowed.begin() + static_cast<std::ptrdiff_t>(q * m.k_len));
  return m;
}

AttentionMask AttentionMask::causal(std::span<const std::uint8_t> key_valid) {
  const std::size_t n = key_valid.size();
  AttentionMask m{n, n, std::vector<std::uint8_t>(n * n, 0)};
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t k = 0; k <= q; ++k) m.allowed[q * n + k] = key_valid[k];
  return m;
}

Matrix scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v, const AttentionMask& mask,
                            Matrix* probs) {
  require(q.cols() == k.cols() && k.rows() == v.rows(), "scaled_dot_attention: inner dimensions disagree");
  require(mask.q_len == q.rows() && mask.k_len == k.rows(), "scaled_dot_attention: mask shape mismatch");
  Matrix p = kernels::matmul_nt(q, k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto row = p.row(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < row.size(); ++j)
      if (mask(i, j)) mx = std::max(mx, row[j] * scale);
    if (mx == -std::numeric_limits<double>::infinity()) {
      std::fill(row.begin(), row.end(), 0.0);
      continue;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = mask(i, j) ? std::exp(row[j] * scale - mx) : 0.0;
      sum += row[j];
    }
    for (double& x : row) x /= sum;
  }
  Matrix out = kernels::matmul(p, v);
  if (probs) *probs = std::move(p);
  return out;
}

void scaled_dot_attention_backward(const Matrix& q, const Matrix& k, const Matrix& v, const Matrix& probs,
                                   const Matrix& dout, Matrix& dq, Matrix& dk, Matrix& dv) {
  dv = kernels::matmul_tn(probs, dout);
  Matrix dp = kernels::matmul_nt(dout, v);
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  // Softmax backward, row by row: ds = p * (dp - <dp, p>).
  for (std::size_t i = 0; i < dp.rows(); ++i) {
    auto d = dp.row(i);
    auto p = probs.row(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) dot += d[j] * p[j];
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = p[j] * (d[j] - dot) * scale;
  }
  dq = kernels::matmul(dp, k);
  dk = kernels::matmul_tn(dp, q);
}

Matrix linear_forward(const ParameterStore& ps, const LinearRef& ref, const Matrix& x) {
  const Matrix& w = ps[ref.weight].value;
  const Matrix& b = ps[ref.bias].value;
  Matrix y(x.rows(), w.cols());
  for (std::size_t r = 0; r < y.rows(); ++r) std::copy_n(b.data(), b.cols(), y.row(r).data());
  kernels::gemm_nn(x, w, y, /*accumulate=*/true);
  return y;
}

Matrix linear_backward(ParameterStore& ps, const LinearRef& ref, const Matrix& x, const Matrix& dy) {
  kernels::gemm_tn(x, dy, ps[ref.weight].grad, /*accumulate=*/true);
  Matrix& db = ps[ref.bias].grad;
  for (std::size_t r = 0; r < dy.rows(); ++r)
    for (std::size_t c = 0; c < dy.cols(); ++c) db(0, c) += dy(r, c);
  return kernels::matmul_nt(dy, ps[ref.weight].value);
}

Matrix layer_norm_forward(const ParameterStore& ps, const LayerNormRef& ref, const Matrix& x,
                          LayerNormCache* cache) {
  const Matrix& gamma = ps[ref.gamma].value;
  const Matrix& beta = ps[ref.beta].value;
  const std::size_t n = x.cols();
  Matrix y(x.rows(), n);
  Matrix xhat(x.rows(), n);
  std::vector<double> inv_std(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std[r] = is;
    for (std::size_t c = 0; c < n; ++c) {
      xhat(r, c) = (row[c] - mean) * is;
      y(r, c) = gamma(0, c) * xhat(r, c) + beta(0, c);
    }
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix layer_norm_backward(ParameterStore& ps, const LayerNormRef& ref, const LayerNormCache& cache,
                           const Matrix& dy) {
  const Matrix& gamma = ps[ref.gamma].value;
  Matrix& dgamma = ps[ref.gamma].grad;
  Matrix& dbeta = ps[ref.beta].grad;
  const std::size_t n = dy.cols();
  Matrix dx(dy.rows(), n);
  std::vector<double> dxhat(n);
  for (std::size_t r = 0; r < dy.rows(); ++r) {
    double mean_d = 0.0, mean_dx = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      dgamma(0, c) += dy(r, c) * cache.xhat(r, c);
      dbeta(0, c) += dy(r, c);
      dxhat[c] = dy(r, c) * gamma(0, c);
      mean_d += dxhat[c];
      mean_dx += dxhat[c] * cache.xhat(r, c);
    }
    mean_d /= static_cast<double>(n);
    mean_dx /= static_cast<double>(n);
    for (std::size_t c = 0; c < n; ++c)
      dx(r, c) = cache.inv_std[r] * (dxhat[c] - mean_d - cache.xhat(r, c) * mean_dx);
  }
  return dx;
}

Matrix attention_forward(const ParameterStore& ps, const AttentionRef& ref, const Matrix& xq, const Matrix& xkv,
                         const AttentionMask& mask, AttentionCache* cache) {
  Matrix q = linear_forward(ps, ref.q, xq);
  Matrix k = linear_forward(ps, ref.k, xkv);
  Matrix v = linear_forward(ps, ref.v, xkv);
  const std::size_t d = q.cols();
  const std::size_t dk = d / ref.heads;
  Matrix concat(xq.rows(), d);
  std::vector<Matrix> probs(ref.heads);
  for (std::size_t h = 0; h < ref.heads; ++h) {
    Matrix oh = scaled_dot_attention(q.columns(h * dk, dk), k.columns(h * dk, dk), v.columns(h * dk, dk), mask,
                                     &probs[h]);
    concat.set_columns(h * dk, oh);
  }
  Matrix out = linear_forward(ps, ref.o, concat);
  if (cache) {
    cache->xq = xq;
    cache->xkv = xkv;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->concat = std::move(concat);
    cache->probs = std::move(probs);
  }
  return out;
}

void attention_backward(ParameterStore& ps, const AttentionRef& ref, const AttentionCache& cache,
                        const Matrix& dout, Matrix& dxq, Matrix& dxkv) {
  Matrix dconcat = linear_backward(ps, ref.o, cache.concat, dout);
  const std::size_t d = cache.q.cols();
  const std::size_t dk = d / ref.heads;
  Matrix dq(cache.q.rows(), d), dk_all(cache.k.rows(), d), dv_all(cache.v.rows(), d);
  for (std::size_t h = 0; h < ref.heads; ++h) {
    Matrix dqh, dkh, dvh;
    scaled_dot_attention_backward(cache.q.columns(h * dk, dk), cache.k.columns(h * dk, dk),
                                  cache.v.columns(h * dk, dk), cache.probs[h], dconcat.columns(h * dk, dk), dqh,
                                  dkh, dvh);
    dq.set_columns(h * dk, dqh);
    dk_all.set_columns(h * dk, dkh);
    dv_all.set_columns(h * dk, dvh);
  }
  dxq = linear_backward(ps, ref.q, cache.xq, dq);
  dxkv = linear_backward(ps, ref.k, cache.xkv, dk_all);
  dxkv += linear_backward(ps, ref.v, cache.xkv, dv_all);
}

Matrix ffn_forward(const ParameterStore& ps, const FfnRef& ref, const Matrix& x, FfnCache* cache) {
  Matrix hidden = linear_forward(ps, ref.in, x);
  for (double& v : hidden.flat()) v = v > 0.0 ? v : 0.0;
  Matrix y = linear_forward(ps, ref.out, hidden);
  if (cache) {
    cache->x = x;
    cache->hidden = std::move(hidden);
  }
  return y;
}

Matrix ffn_backward(ParameterStore& ps, const FfnRef& ref, const FfnCache& cache, const Matrix& dy) {
  Matrix dh = linear_backward(ps, ref.out, cache.hidden, dy);
  auto h = cache.hidden.flat();
  auto g = dh.flat();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (h[i] <= 0.0) g[i] = 0.0;
  return linear_backward(ps, ref.in, cache.x, dh);
}

void DropoutMask::apply(Matrix& x) const {
  if (scale.empty()) return;
  require(scale.size() == x.size(), "dropout mask size mismatch");
  auto f = x.flat();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= scale[i];
}

DropoutMask make_dropout(std::size_t n, double rate, std::mt19937_64& rng) {
  DropoutMask m;
  if (rate <= 0.0) return m;
  const double keep = 1.0 / (1.0 - rate);
  m.scale.resize(n);
  for (auto& s : m.scale) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    s = u < rate ? 0.0 : keep;
  }
  return m;
}

Matrix positional_encoding(std::size_t length, std::size_t d_model, std::size_t max_positions) {
  require(length <= max_positions, "sequence length " + std::to_string(length) + " exceeds max_positions " +
                                       std::to_string(max_positions));
  Matrix pe(length, d_model);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; 2 * i < d_model; ++i) {
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d_model));
      pe(pos, 2 * i) = std::sin(angle);
      if (2 * i + 1 < d_model) pe(pos, 2 * i + 1) = std::cos(angle);
    }
  }
  return pe;
}

}  // namespace tsum::layers
