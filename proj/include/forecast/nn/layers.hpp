#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "forecast/nn/tensor.hpp"

namespace forecast::nn {

double sigmoid(double x);

// ---------------------------------------------------------------------------
// Dense: y = W x + b, W is [n_out x n_in].

void add_dense(ParamSet& params, const std::string& prefix, std::size_t n_in, std::size_t n_out);

Vec dense_forward(std::span<const double> x, const Tensor& W, const Tensor& b);

// Accumulates into dW and db and returns dL/dx.
Vec dense_backward(std::span<const double> x, const Tensor& W, std::span<const double> dy,
                   Tensor& dW, Tensor& db);

// ---------------------------------------------------------------------------
// 3x3 convolution (cross-correlation), stride 1, zero padding 1.

struct FeatureMap {
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;  // channel-major

  FeatureMap() = default;
  FeatureMap(std::size_t c, std::size_t r, std::size_t w, double fill = 0.0)
      : channels(c), rows(r), cols(w), data(c * r * w, fill) {}

  std::size_t plane() const { return rows * cols; }
  double& at(std::size_t c, std::size_t r, std::size_t w) { return data[(c * rows + r) * cols + w]; }
  double at(std::size_t c, std::size_t r, std::size_t w) const { return data[(c * rows + r) * cols + w]; }
};

// K is [C_out x C_in x 3 x 3], b is [C_out].
void add_conv3x3(ParamSet& params, const std::string& prefix, std::size_t c_in, std::size_t c_out);

FeatureMap conv3x3_forward(const FeatureMap& x, const Tensor& K, const Tensor& b);

// Accumulates into dK and db. Returns dL/dx when `want_input_grad`, else an
// empty map.
FeatureMap conv3x3_backward(const FeatureMap& x, const Tensor& K, const FeatureMap& dy, Tensor& dK,
                            Tensor& db, bool want_input_grad = true);

// ---------------------------------------------------------------------------
// GRU cell:
//   z  = sigmoid(Wz x + Uz h + bz)
//   r  = sigmoid(Wr x + Ur h + br)
//   n  = tanh(Wn x + Un (r*h) + bn)
//   h' = (1 - z) * n + z * h

struct GruRef {
  const Tensor& Wz;
  const Tensor& Uz;
  const Tensor& bz;
  const Tensor& Wr;
  const Tensor& Ur;
  const Tensor& br;
  const Tensor& Wn;
  const Tensor& Un;
  const Tensor& bn;

  std::size_t input_size() const { return Wz.dim(1); }
  std::size_t hidden_size() const { return Wz.dim(0); }
};

struct GruGradRef {
  Tensor& Wz;
  Tensor& Uz;
  Tensor& bz;
  Tensor& Wr;
  Tensor& Ur;
  Tensor& br;
  Tensor& Wn;
  Tensor& Un;
  Tensor& bn;
};

struct GruCache {
  Vec x, h, z, r, n, rh;
};

void add_gru(ParamSet& params, const std::string& prefix, std::size_t n_x, std::size_t n_h);
GruRef gru_ref(const ParamSet& params, const std::string& prefix);
GruGradRef gru_grad_ref(ParamSet& params, const std::string& prefix);

Vec gru_step(const GruRef& gru, std::span<const double> x, std::span<const double> h,
             GruCache* cache = nullptr);

struct GruInputGrads {
  Vec dx;
  Vec dh;
};

GruInputGrads gru_step_backward(const GruRef& gru, const GruCache& cache,
                                std::span<const double> dh_next, GruGradRef& grads);

// ---------------------------------------------------------------------------
// Softmax and cross-entropy.

Vec softmax(std::span<const double> logits);

struct SoftmaxXent {
  double loss = 0.0;
  Vec probs;
};

SoftmaxXent softmax_xent(std::span<const double> logits, std::size_t target);

// probs - one_hot(target)
Vec softmax_xent_backward(const SoftmaxXent& forward, std::size_t target);

// ---------------------------------------------------------------------------
// Additive attention:
//   score_i = v . tanh(Wq q + Wk k_i + b)
//   weights = softmax(score), context = sum_i weights_i k_i

struct AttentionRef {
  const Tensor& Wq;  // [n_a x n_q]
  const Tensor& Wk;  // [n_a x n_k]
  const Tensor& b;   // [n_a]
  const Tensor& v;   // [n_a]
};

struct AttentionGradRef {
  Tensor& Wq;
  Tensor& Wk;
  Tensor& b;
  Tensor& v;
};

struct AttentionCache {
  Vec q;
  std::vector<Vec> t;  // tanh activations per key
  Vec weights;
};

struct AttentionResult {
  Vec context;
  Vec weights;
};

void add_attention(ParamSet& params, const std::string& prefix, std::size_t n_q, std::size_t n_k,
                   std::size_t n_a);
AttentionRef attention_ref(const ParamSet& params, const std::string& prefix);
AttentionGradRef attention_grad_ref(ParamSet& params, const std::string& prefix);

AttentionResult additive_attention(const AttentionRef& att, std::span<const double> query,
                                   const std::vector<Vec>& keys, AttentionCache* cache = nullptr);

// Accumulates key gradients into `dkeys` (same shape as keys) and parameter
// gradients into `grads`; returns dL/dquery.
Vec additive_attention_backward(const AttentionRef& att, const AttentionCache& cache,
                                const std::vector<Vec>& keys, std::span<const double> dcontext,
                                std::vector<Vec>& dkeys, AttentionGradRef& grads);

}  // namespace forecast::nn
