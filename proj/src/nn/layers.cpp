#include "forecast/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "forecast/errors.hpp"

namespace forecast::nn {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// y += M x for row-major M [rows x cols].
void matvec_add(const Tensor& M, std::span<const double> x, double* y) {
  const std::size_t rows = M.dim(0);
  const std::size_t cols = M.dim(1);
  const double* m = M.data();
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    const double* row = m + i * cols;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
    y[i] += s;
  }
}

// y += M^T g.
void matvec_t_add(const Tensor& M, std::span<const double> g, double* y) {
  const std::size_t rows = M.dim(0);
  const std::size_t cols = M.dim(1);
  const double* m = M.data();
  for (std::size_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    const double* row = m + i * cols;
    for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * gi;
  }
}

// dM += g x^T.
void outer_add(Tensor& dM, std::span<const double> g, std::span<const double> x) {
  const std::size_t rows = dM.dim(0);
  const std::size_t cols = dM.dim(1);
  double* d = dM.data();
  for (std::size_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    double* row = d + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
  }
}

void check_matrix(const Tensor& M, std::size_t rows, std::size_t cols, const char* what) {
  FORECAST_EXPECT(M.shape().size() == 2 && M.dim(0) == rows && M.dim(1) == cols,
                  std::string(what) + " has shape " + shape_string(M.shape()));
}

void check_vector(const Tensor& v, std::size_t n, const char* what) {
  FORECAST_EXPECT(v.shape().size() == 1 && v.dim(0) == n,
                  std::string(what) + " has shape " + shape_string(v.shape()));
}

}  // namespace

// ---------------------------------------------------------------------------

void add_dense(ParamSet& params, const std::string& prefix, std::size_t n_in, std::size_t n_out) {
  params.add(prefix + ".W", {n_out, n_in}, n_in);
  params.add(prefix + ".b", {n_out}, n_in);
}

Vec dense_forward(std::span<const double> x, const Tensor& W, const Tensor& b) {
  FORECAST_EXPECT(W.shape().size() == 2 && W.dim(1) == x.size(), "dense input size mismatch");
  check_vector(b, W.dim(0), "dense bias");
  Vec y(b.vec());
  matvec_add(W, x, y.data());
  return y;
}

Vec dense_backward(std::span<const double> x, const Tensor& W, std::span<const double> dy,
                   Tensor& dW, Tensor& db) {
  FORECAST_EXPECT(dy.size() == W.dim(0) && x.size() == W.dim(1), "dense backward size mismatch");
  outer_add(dW, dy, x);
  for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i];
  Vec dx(x.size(), 0.0);
  matvec_t_add(W, dy, dx.data());
  return dx;
}

// ---------------------------------------------------------------------------

void add_conv3x3(ParamSet& params, const std::string& prefix, std::size_t c_in, std::size_t c_out) {
  params.add(prefix + ".K", {c_out, c_in, 3, 3}, c_in * 9);
  params.add(prefix + ".b", {c_out}, c_in * 9);
}

namespace {

void check_kernel(const FeatureMap& x, const Tensor& K, const Tensor& b) {
  FORECAST_EXPECT(K.shape().size() == 4 && K.dim(1) == x.channels && K.dim(2) == 3 && K.dim(3) == 3,
                  "conv kernel shape " + shape_string(K.shape()) + " does not match " +
                      std::to_string(x.channels) + " input channels");
  check_vector(b, K.dim(0), "conv bias");
  FORECAST_EXPECT(x.data.size() == x.channels * x.rows * x.cols, "feature map size mismatch");
}

// Valid output column range for horizontal kernel offset dx in {-1,0,1}.
inline std::size_t col_begin(int dx) { return dx < 0 ? 1 : 0; }
inline std::size_t col_end(int dx, std::size_t cols) { return dx > 0 ? cols - 1 : cols; }

}  // namespace

FeatureMap conv3x3_forward(const FeatureMap& x, const Tensor& K, const Tensor& b) {
  check_kernel(x, K, b);
  const std::size_t cout = K.dim(0);
  const std::size_t cin = x.channels;
  const std::size_t rows = x.rows;
  const std::size_t cols = x.cols;
  FeatureMap y(cout, rows, cols);
  for (std::size_t co = 0; co < cout; ++co) {
    double* yp = y.data.data() + co * rows * cols;
    std::fill(yp, yp + rows * cols, b[co]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* xp = x.data.data() + ci * rows * cols;
      const double* k = K.data() + (co * cin + ci) * 9;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double w = k[(dy + 1) * 3 + (dx + 1)];
          if (w == 0.0) continue;
          const std::size_t c0 = col_begin(dx);
          const std::size_t c1 = col_end(dx, cols);
          for (std::size_t r = 0; r < rows; ++r) {
            const long rr = static_cast<long>(r) + dy;
            if (rr < 0 || rr >= static_cast<long>(rows)) continue;
            const double* src = xp + static_cast<std::size_t>(rr) * cols;
            double* dst = yp + r * cols;
            for (std::size_t c = c0; c < c1; ++c) dst[c] += w * src[c + dx];
          }
        }
      }
    }
  }
  return y;
}

FeatureMap conv3x3_backward(const FeatureMap& x, const Tensor& K, const FeatureMap& dy, Tensor& dK,
                            Tensor& db, bool want_input_grad) {
  check_kernel(x, K, db);
  const std::size_t cout = K.dim(0);
  const std::size_t cin = x.channels;
  const std::size_t rows = x.rows;
  const std::size_t cols = x.cols;
  FORECAST_EXPECT(dy.channels == cout && dy.rows == rows && dy.cols == cols,
                  "conv upstream gradient shape mismatch");
  FeatureMap dx;
  if (want_input_grad) dx = FeatureMap(cin, rows, cols);
  for (std::size_t co = 0; co < cout; ++co) {
    const double* gp = dy.data.data() + co * rows * cols;
    double bsum = 0.0;
    for (std::size_t i = 0; i < rows * cols; ++i) bsum += gp[i];
    db[co] += bsum;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* xp = x.data.data() + ci * rows * cols;
      double* dxp = want_input_grad ? dx.data.data() + ci * rows * cols : nullptr;
      const double* k = K.data() + (co * cin + ci) * 9;
      double* dk = dK.data() + (co * cin + ci) * 9;
      for (int ddy = -1; ddy <= 1; ++ddy) {
        for (int ddx = -1; ddx <= 1; ++ddx) {
          const std::size_t kidx = static_cast<std::size_t>((ddy + 1) * 3 + (ddx + 1));
          const double w = k[kidx];
          const std::size_t c0 = col_begin(ddx);
          const std::size_t c1 = col_end(ddx, cols);
          double acc = 0.0;
          for (std::size_t r = 0; r < rows; ++r) {
            const long rr = static_cast<long>(r) + ddy;
            if (rr < 0 || rr >= static_cast<long>(rows)) continue;
            const double* src = xp + static_cast<std::size_t>(rr) * cols;
            const double* g = gp + r * cols;
            for (std::size_t c = c0; c < c1; ++c) acc += g[c] * src[c + ddx];
            if (dxp != nullptr && w != 0.0) {
              double* dst = dxp + static_cast<std::size_t>(rr) * cols;
              for (std::size_t c = c0; c < c1; ++c) dst[c + ddx] += w * g[c];
            }
          }
          dk[kidx] += acc;
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------

void add_gru(ParamSet& params, const std::string& prefix, std::size_t n_x, std::size_t n_h) {
  for (const char* gate : {"z", "r", "n"}) {
    params.add(prefix + ".W" + gate, {n_h, n_x}, n_h);
    params.add(prefix + ".U" + gate, {n_h, n_h}, n_h);
    params.add(prefix + ".b" + gate, {n_h}, n_h);
  }
}

GruRef gru_ref(const ParamSet& p, const std::string& prefix) {
  return GruRef{p.value(prefix + ".Wz"), p.value(prefix + ".Uz"), p.value(prefix + ".bz"),
                p.value(prefix + ".Wr"), p.value(prefix + ".Ur"), p.value(prefix + ".br"),
                p.value(prefix + ".Wn"), p.value(prefix + ".Un"), p.value(prefix + ".bn")};
}

GruGradRef gru_grad_ref(ParamSet& p, const std::string& prefix) {
  return GruGradRef{p.grad(prefix + ".Wz"), p.grad(prefix + ".Uz"), p.grad(prefix + ".bz"),
                    p.grad(prefix + ".Wr"), p.grad(prefix + ".Ur"), p.grad(prefix + ".br"),
                    p.grad(prefix + ".Wn"), p.grad(prefix + ".Un"), p.grad(prefix + ".bn")};
}

Vec gru_step(const GruRef& g, std::span<const double> x, std::span<const double> h, GruCache* cache) {
  const std::size_t nh = g.hidden_size();
  const std::size_t nx = g.input_size();
  FORECAST_EXPECT(x.size() == nx, "GRU input size mismatch");
  FORECAST_EXPECT(h.size() == nh, "GRU hidden size mismatch");
  check_matrix(g.Uz, nh, nh, "GRU Uz");
  check_matrix(g.Wn, nh, nx, "GRU Wn");

  Vec z(g.bz.vec()), r(g.br.vec()), n(g.bn.vec());
  matvec_add(g.Wz, x, z.data());
  matvec_add(g.Uz, h, z.data());
  matvec_add(g.Wr, x, r.data());
  matvec_add(g.Ur, h, r.data());
  for (std::size_t i = 0; i < nh; ++i) {
    z[i] = sigmoid(z[i]);
    r[i] = sigmoid(r[i]);
  }
  Vec rh(nh);
  for (std::size_t i = 0; i < nh; ++i) rh[i] = r[i] * h[i];
  matvec_add(g.Wn, x, n.data());
  matvec_add(g.Un, rh, n.data());
  Vec out(nh);
  for (std::size_t i = 0; i < nh; ++i) {
    n[i] = std::tanh(n[i]);
    out[i] = (1.0 - z[i]) * n[i] + z[i] * h[i];
  }
  if (cache != nullptr) {
    cache->x.assign(x.begin(), x.end());
    cache->h.assign(h.begin(), h.end());
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->n = std::move(n);
    cache->rh = std::move(rh);
  }
  return out;
}

GruInputGrads gru_step_backward(const GruRef& g, const GruCache& c, std::span<const double> dh_next,
                                GruGradRef& grads) {
  const std::size_t nh = g.hidden_size();
  const std::size_t nx = g.input_size();
  FORECAST_EXPECT(dh_next.size() == nh, "GRU upstream gradient size mismatch");
  GruInputGrads out{Vec(nx, 0.0), Vec(nh, 0.0)};
  Vec dan(nh), daz(nh), dar(nh);
  for (std::size_t i = 0; i < nh; ++i) {
    const double dn = dh_next[i] * (1.0 - c.z[i]);
    const double dz = dh_next[i] * (c.h[i] - c.n[i]);
    out.dh[i] = dh_next[i] * c.z[i];
    dan[i] = dn * (1.0 - c.n[i] * c.n[i]);
    daz[i] = dz * c.z[i] * (1.0 - c.z[i]);
  }
  // Candidate gate.
  outer_add(grads.Wn, dan, c.x);
  outer_add(grads.Un, dan, c.rh);
  for (std::size_t i = 0; i < nh; ++i) grads.bn[i] += dan[i];
  matvec_t_add(g.Wn, dan, out.dx.data());
  Vec drh(nh, 0.0);
  matvec_t_add(g.Un, dan, drh.data());
  for (std::size_t i = 0; i < nh; ++i) {
    out.dh[i] += drh[i] * c.r[i];
    const double dr = drh[i] * c.h[i];
    dar[i] = dr * c.r[i] * (1.0 - c.r[i]);
  }
  // Update and reset gates.
  outer_add(grads.Wz, daz, c.x);
  outer_add(grads.Uz, daz, c.h);
  outer_add(grads.Wr, dar, c.x);
  outer_add(grads.Ur, dar, c.h);
  for (std::size_t i = 0; i < nh; ++i) {
    grads.bz[i] += daz[i];
    grads.br[i] += dar[i];
  }
  matvec_t_add(g.Wz, daz, out.dx.data());
  matvec_t_add(g.Uz, daz, out.dh.data());
  matvec_t_add(g.Wr, dar, out.dx.data());
  matvec_t_add(g.Ur, dar, out.dh.data());
  return out;
}

// ---------------------------------------------------------------------------

Vec softmax(std::span<const double> logits) {
  FORECAST_EXPECT(!logits.empty(), "softmax of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

SoftmaxXent softmax_xent(std::span<const double> logits, std::size_t target) {
  FORECAST_EXPECT(target < logits.size(), "cross-entropy target out of range");
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - m);
  SoftmaxXent out;
  out.probs = softmax(logits);
  out.loss = -(logits[target] - m - std::log(sum));
  return out;
}

Vec softmax_xent_backward(const SoftmaxXent& forward, std::size_t target) {
  FORECAST_EXPECT(target < forward.probs.size(), "cross-entropy target out of range");
  Vec g = forward.probs;
  g[target] -= 1.0;
  return g;
}

// ---------------------------------------------------------------------------

void add_attention(ParamSet& params, const std::string& prefix, std::size_t n_q, std::size_t n_k,
                   std::size_t n_a) {
  params.add(prefix + ".Wq", {n_a, n_q}, n_q);
  params.add(prefix + ".Wk", {n_a, n_k}, n_k);
  params.add(prefix + ".b", {n_a}, n_k);
  params.add(prefix + ".v", {n_a}, n_a);
}

AttentionRef attention_ref(const ParamSet& p, const std::string& prefix) {
  return AttentionRef{p.value(prefix + ".Wq"), p.value(prefix + ".Wk"), p.value(prefix + ".b"),
                      p.value(prefix + ".v")};
}

AttentionGradRef attention_grad_ref(ParamSet& p, const std::string& prefix) {
  return AttentionGradRef{p.grad(prefix + ".Wq"), p.grad(prefix + ".Wk"), p.grad(prefix + ".b"),
                          p.grad(prefix + ".v")};
}

AttentionResult additive_attention(const AttentionRef& att, std::span<const double> query,
                                   const std::vector<Vec>& keys, AttentionCache* cache) {
  FORECAST_EXPECT(!keys.empty(), "attention needs at least one key");
  const std::size_t na = att.v.size();
  const std::size_t nk = att.Wk.dim(1);
  FORECAST_EXPECT(query.size() == att.Wq.dim(1), "attention query size mismatch");

  Vec base(att.b.vec());
  matvec_add(att.Wq, query, base.data());
  Vec scores(keys.size());
  std::vector<Vec> t(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    FORECAST_EXPECT(keys[i].size() == nk, "attention key size mismatch");
    Vec a(base);
    matvec_add(att.Wk, keys[i], a.data());
    double s = 0.0;
    for (std::size_t j = 0; j < na; ++j) {
      a[j] = std::tanh(a[j]);
      s += att.v[j] * a[j];
    }
    scores[i] = s;
    t[i] = std::move(a);
  }
  AttentionResult out;
  out.weights = softmax(scores);
  out.context.assign(nk, 0.0);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (std::size_t j = 0; j < nk; ++j) out.context[j] += out.weights[i] * keys[i][j];
  }
  if (cache != nullptr) {
    cache->q.assign(query.begin(), query.end());
    cache->t = std::move(t);
    cache->weights = out.weights;
  }
  return out;
}

Vec additive_attention_backward(const AttentionRef& att, const AttentionCache& cache,
                                const std::vector<Vec>& keys, std::span<const double> dcontext,
                                std::vector<Vec>& dkeys, AttentionGradRef& grads) {
  const std::size_t m = keys.size();
  const std::size_t na = att.v.size();
  const std::size_t nk = att.Wk.dim(1);
  FORECAST_EXPECT(dkeys.size() == m, "attention key-gradient buffer size mismatch");
  FORECAST_EXPECT(dcontext.size() == nk, "attention context gradient size mismatch");

  Vec dw(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nk; ++j) {
      dw[i] += keys[i][j] * dcontext[j];
      dkeys[i][j] += cache.weights[i] * dcontext[j];
    }
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) mean += cache.weights[i] * dw[i];

  Vec da_sum(na, 0.0);
  Vec da(na);
  for (std::size_t i = 0; i < m; ++i) {
    const double ds = cache.weights[i] * (dw[i] - mean);
    if (ds == 0.0) continue;
    for (std::size_t j = 0; j < na; ++j) {
      const double tj = cache.t[i][j];
      grads.v[j] += ds * tj;
      da[j] = ds * att.v[j] * (1.0 - tj * tj);
      da_sum[j] += da[j];
    }
    outer_add(grads.Wk, da, keys[i]);
    matvec_t_add(att.Wk, da, dkeys[i].data());
  }
  for (std::size_t j = 0; j < na; ++j) grads.b[j] += da_sum[j];
  outer_add(grads.Wq, da_sum, cache.q);
  Vec dq(cache.q.size(), 0.0);
  matvec_t_add(att.Wq, da_sum, dq.data());
  return dq;
}

}  // namespace forecast::nn
