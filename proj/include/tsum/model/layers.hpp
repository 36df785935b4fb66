#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tsum/model/params.hpp"
#include "tsum/tensor.hpp"

// Building blocks of the transformer. Every forward optionally fills a
// cache; the matching backward consumes it, accumulates parameter
// gradients into ParameterStore::grad and returns input gradients.
namespace tsum::layers {

// Allowed (query, key) pairs for attention, row-major q_len x k_len.
struct AttentionMask {
  std::size_t q_len = 0;
  std::size_t k_len = 0;
  std::vector<std::uint8_t> allowed;

  bool operator()(std::size_t q, std::size_t k) const { return allowed[q * k_len + k] != 0; }

  // Every query may see every key whose flag is set.
  static AttentionMask keys(std::size_t q_len, std::span<const std::uint8_t> key_valid);
  // Query i may see keys j <= i whose flag is set.
  static AttentionMask causal(std::span<const std::uint8_t> key_valid);
};

// softmax(Q K^T / sqrt(d_k) + mask) V. A row with no allowed key yields
// zeros. `probs`, when given, receives the attention weights.
Matrix scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v, const AttentionMask& mask,
                            Matrix* probs = nullptr);

// Gradients of scaled_dot_attention given its weights; dq/dk/dv are overwritten.
void scaled_dot_attention_backward(const Matrix& q, const Matrix& k, const Matrix& v, const Matrix& probs,
                                   const Matrix& dout, Matrix& dq, Matrix& dk, Matrix& dv);

struct LinearRef {
  std::size_t weight = 0;  // in x out
  std::size_t bias = 0;    // 1 x out
};

Matrix linear_forward(const ParameterStore& ps, const LinearRef& ref, const Matrix& x);
// Returns dx.
Matrix linear_backward(ParameterStore& ps, const LinearRef& ref, const Matrix& x, const Matrix& dy);

struct LayerNormRef {
  std::size_t gamma = 0;
  std::size_t beta = 0;
};

struct LayerNormCache {
  Matrix xhat;
  std::vector<double> inv_std;
};

inline constexpr double kLayerNormEps = 1e-6;

Matrix layer_norm_forward(const ParameterStore& ps, const LayerNormRef& ref, const Matrix& x,
                          LayerNormCache* cache);
Matrix layer_norm_backward(ParameterStore& ps, const LayerNormRef& ref, const LayerNormCache& cache,
                           const Matrix& dy);

struct AttentionRef {
  LinearRef q, k, v, o;
  std::size_t heads = 1;
};

struct AttentionCache {
  Matrix xq, xkv;
  Matrix q, k, v;
  Matrix concat;
  std::vector<Matrix> probs;  // one per head
};

Matrix attention_forward(const ParameterStore& ps, const AttentionRef& ref, const Matrix& xq, const Matrix& xkv,
                         const AttentionMask& mask, AttentionCache* cache);
// Overwrites dxq and dxkv; for self-attention the caller adds them.
void attention_backward(ParameterStore& ps, const AttentionRef& ref, const AttentionCache& cache,
                        const Matrix& dout, Matrix& dxq, Matrix& dxkv);

struct FfnRef {
  LinearRef in, out;
};

struct FfnCache {
  Matrix x;
  Matrix hidden;  // after ReLU
};

Matrix ffn_forward(const ParameterStore& ps, const FfnRef& ref, const Matrix& x, FfnCache* cache);
Matrix ffn_backward(ParameterStore& ps, const FfnRef& ref, const FfnCache& cache, const Matrix& dy);

// Inverted dropout. An empty mask means "no dropout".
struct DropoutMask {
  std::vector<double> scale;
  void apply(Matrix& x) const;
};
DropoutMask make_dropout(std::size_t n, double rate, std::mt19937_64& rng);

// Sinusoidal encoding, length x d_model. Throws ContractViolation when
// length > max_positions.
Matrix positional_encoding(std::size_t length, std::size_t d_model, std::size_t max_positions);

}  // namespace tsum::layers
