// Copyright 2026 The streamlid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Minimal deterministic neural toolkit: dense layers, unidirectional LSTM
// with full backprop-through-time, character embeddings, softmax and
// cross-entropy, inverted dropout, SGD with momentum. Everything is
// templated on the scalar type so production paths run in float while
// gradient checking can run a 64-bit shadow of the same code.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "streamlid/common.hpp"
#include "streamlid/rng.hpp"
#include "streamlid/tensor.hpp"

namespace streamlid {

template <typename S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

template <typename S>
struct DenseParams {
  Tensor2<S> weight;  // out x in
  Tensor2<S> bias;    // out x 1

  DenseParams() = default;
  DenseParams(size_t out, size_t in) : weight(out, in), bias(out, 1) {}

  static DenseParams create(size_t out, size_t in, Rng& rng) {
    DenseParams p(out, in);
    init_glorot(p.weight, in, out, rng);
    return p;
  }

  size_t in_dim() const { return weight.cols; }
  size_t out_dim() const { return weight.rows; }
};

template <typename S>
std::vector<S> dense_forward(const DenseParams<S>& p, const std::vector<S>& x) {
  if (x.size() != p.in_dim())
    throw ShapeError("dense_forward: input has " + std::to_string(x.size()) +
                     " components, layer expects " + std::to_string(p.in_dim()));
  std::vector<S> y(p.out_dim());
  for (size_t r = 0; r < p.out_dim(); ++r) y[r] = p.bias.data[r];
  matvec_acc(p.weight, x.data(), y.data());
  return y;
}

template <typename S>
struct DenseGrads {
  Tensor2<S> weight;
  Tensor2<S> bias;

  explicit DenseGrads(const DenseParams<S>& p)
      : weight(p.weight.rows, p.weight.cols), bias(p.bias.rows, 1) {}
};

// Accumulates into grads; returns grad wrt input.
template <typename S>
std::vector<S> dense_backward(const DenseParams<S>& p, const std::vector<S>& x,
                              const std::vector<S>& grad_y, DenseGrads<S>& grads) {
  if (grad_y.size() != p.out_dim()) throw ShapeError("dense_backward: bad output gradient size");
  std::vector<S> grad_x(p.in_dim(), S(0));
  matvec_backward(p.weight, x.data(), grad_y.data(), grads.weight, grad_x.data());
  for (size_t r = 0; r < p.out_dim(); ++r) grads.bias.data[r] += grad_y[r];
  return grad_x;
}

// ---------------------------------------------------------------------------
// Softmax / cross-entropy
// ---------------------------------------------------------------------------

template <typename S>
std::vector<S> softmax(const std::vector<S>& v) {
  if (v.empty()) throw UsageError("softmax: empty input");
  S mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(static_cast<double>(mx))) throw NumericError("softmax: non-finite logit");
  std::vector<S> out(v.size());
  S sum = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

template <typename S>
S cross_entropy(const std::vector<S>& p, size_t target) {
  if (target >= p.size())
    throw UsageError("cross_entropy: target " + std::to_string(target) + " out of range for " +
                     std::to_string(p.size()) + " classes");
  S q = std::max(p[target], std::numeric_limits<S>::min());
  return -std::log(q);
}

// d(cross_entropy(softmax(z), t))/dz = p - onehot(t).
template <typename S>
std::vector<S> softmax_xent_grad(const std::vector<S>& p, size_t target) {
  if (target >= p.size()) throw UsageError("softmax_xent_grad: target out of range");
  std::vector<S> g(p);
  g[target] -= S(1);
  return g;
}

// ---------------------------------------------------------------------------
// Dropout (inverted scaling: surviving units scaled by 1/(1-rate))
// ---------------------------------------------------------------------------

template <typename S>
std::vector<S> dropout_mask(size_t n, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("dropout: rate must be in [0,1)");
  const S scale = static_cast<S>(1.0 / (1.0 - rate));
  std::vector<S> mask(n);
  for (auto& m : mask) m = rng.uniform() < rate ? S(0) : scale;
  return mask;
}

template <typename S>
std::vector<S> dropout(const std::vector<S>& v, double rate, Rng& rng, bool train_mode) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("dropout: rate must be in [0,1)");
  if (!train_mode || rate == 0.0) return v;
  std::vector<S> mask = dropout_mask<S>(v.size(), rate, rng);
  std::vector<S> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] * mask[i];
  return out;
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

template <typename S>
struct LstmLayerParams {
  size_t input_dim = 0;
  size_t hidden_dim = 0;
  // Per gate: input weights (H x D), recurrent weights (H x H), bias (H x 1).
  Tensor2<S> w_i, u_i, b_i;
  Tensor2<S> w_f, u_f, b_f;
  Tensor2<S> w_g, u_g, b_g;
  Tensor2<S> w_o, u_o, b_o;

  LstmLayerParams() = default;
  LstmLayerParams(size_t in, size_t hid)
      : input_dim(in),
        hidden_dim(hid),
        w_i(hid, in), u_i(hid, hid), b_i(hid, 1),
        w_f(hid, in), u_f(hid, hid), b_f(hid, 1),
        w_g(hid, in), u_g(hid, hid), b_g(hid, 1),
        w_o(hid, in), u_o(hid, hid), b_o(hid, 1) {}

  // Glorot init; forget-gate bias starts at 1.
  static LstmLayerParams create(size_t in, size_t hid, Rng& rng) {
    LstmLayerParams p(in, hid);
    for (Tensor2<S>* w : {&p.w_i, &p.w_f, &p.w_g, &p.w_o}) init_glorot(*w, in, hid, rng);
    for (Tensor2<S>* u : {&p.u_i, &p.u_f, &p.u_g, &p.u_o}) init_glorot(*u, hid, hid, rng);
    p.b_f.fill(S(1));
    return p;
  }
};

template <typename S>
struct LstmState {
  std::vector<S> h;
  std::vector<S> c;

  LstmState() = default;
  explicit LstmState(size_t hidden) : h(hidden, S(0)), c(hidden, S(0)) {}
  bool empty() const { return h.empty(); }
};

template <typename S>
struct LstmStepCache {
  std::vector<S> x, h_prev, c_prev;
  std::vector<S> i, f, g, o;  // post-activation gate values
  std::vector<S> c, tanh_c;
};

template <typename S>
struct LstmCache {
  std::vector<LstmStepCache<S>> steps;
};

// One cell step; x has input_dim entries, state is updated in place.
template <typename S>
void lstm_step(const LstmLayerParams<S>& p, const S* x, LstmState<S>& state,
               LstmStepCache<S>* cache) {
  const size_t h = p.hidden_dim;
  std::vector<S> pre_i(p.b_i.data), pre_f(p.b_f.data), pre_g(p.b_g.data), pre_o(p.b_o.data);
  matvec_acc(p.w_i, x, pre_i.data());
  matvec_acc(p.w_f, x, pre_f.data());
  matvec_acc(p.w_g, x, pre_g.data());
  matvec_acc(p.w_o, x, pre_o.data());
  matvec_acc(p.u_i, state.h.data(), pre_i.data());
  matvec_acc(p.u_f, state.h.data(), pre_f.data());
  matvec_acc(p.u_g, state.h.data(), pre_g.data());
  matvec_acc(p.u_o, state.h.data(), pre_o.data());

  if (cache) {
    cache->x.assign(x, x + p.input_dim);
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->i.resize(h);
    cache->f.resize(h);
    cache->g.resize(h);
    cache->o.resize(h);
    cache->c.resize(h);
    cache->tanh_c.resize(h);
  }
  for (size_t k = 0; k < h; ++k) {
    const S ig = sigmoid(pre_i[k]);
    const S fg = sigmoid(pre_f[k]);
    const S gg = std::tanh(pre_g[k]);
    const S og = sigmoid(pre_o[k]);
    const S cc = fg * state.c[k] + ig * gg;
    const S tc = std::tanh(cc);
    state.c[k] = cc;
    state.h[k] = og * tc;
    if (cache) {
      cache->i[k] = ig;
      cache->f[k] = fg;
      cache->g[k] = gg;
      cache->o[k] = og;
      cache->c[k] = cc;
      cache->tanh_c[k] = tc;
    }
  }
}

// inputs: T x input_dim. Returns T x hidden_dim plus the final state.
// An empty input sequence returns an empty output and the initial state.
template <typename S>
std::pair<Tensor2<S>, LstmState<S>> lstm_forward(const LstmLayerParams<S>& p,
                                                 const Tensor2<S>& inputs,
                                                 LstmState<S> state,
                                                 LstmCache<S>* cache = nullptr) {
  if (inputs.rows > 0 && inputs.cols != p.input_dim)
    throw ShapeError("lstm_forward: input dim " + std::to_string(inputs.cols) + ", layer expects " +
                     std::to_string(p.input_dim));
  if (state.empty()) state = LstmState<S>(p.hidden_dim);
  if (state.h.size() != p.hidden_dim || state.c.size() != p.hidden_dim)
    throw ShapeError("lstm_forward: state dim mismatch");
  Tensor2<S> out(inputs.rows, p.hidden_dim);
  if (cache) cache->steps.resize(inputs.rows);
  for (size_t t = 0; t < inputs.rows; ++t) {
    lstm_step(p, inputs.row(t), state, cache ? &cache->steps[t] : nullptr);
    std::copy(state.h.begin(), state.h.end(), out.row(t));
  }
  return {std::move(out), std::move(state)};
}

template <typename S>
struct LstmGrads {
  LstmLayerParams<S> params;  // gradient storage, shaped like the layer
  Tensor2<S> inputs;          // T x input_dim

  LstmGrads(const LstmLayerParams<S>& p, size_t seq_len)
      : params(p.input_dim, p.hidden_dim), inputs(seq_len, p.input_dim) {}
};

// Full BPTT over a cached forward pass. grad_out is T x hidden_dim (dL/dh_t).
// Gradients accumulate into `grads`.
template <typename S>
void lstm_backward(const LstmLayerParams<S>& p, const LstmCache<S>& cache,
                   const Tensor2<S>& grad_out, LstmGrads<S>& grads) {
  const size_t T = cache.steps.size();
  if (T == 0 && grad_out.rows == 0) return;
  if (cache.steps.empty()) throw UsageError("lstm_backward: missing forward cache");
  if (grad_out.rows != T || grad_out.cols != p.hidden_dim)
    throw ShapeError("lstm_backward: gradient shape mismatch");
  if (grads.inputs.rows != T) throw ShapeError("lstm_backward: grads.inputs shape mismatch");

  const size_t H = p.hidden_dim;
  std::vector<S> dh_next(H, S(0)), dc_next(H, S(0));
  std::vector<S> di(H), df(H), dg(H), dd(H);
  for (size_t tt = T; tt-- > 0;) {
    const LstmStepCache<S>& st = cache.steps[tt];
    for (size_t k = 0; k < H; ++k) {
      const S dh = grad_out.at(tt, k) + dh_next[k];
      const S dout = dh * st.tanh_c[k];
      const S dc = dh * st.o[k] * (S(1) - st.tanh_c[k] * st.tanh_c[k]) + dc_next[k];
      di[k] = dc * st.g[k] * st.i[k] * (S(1) - st.i[k]);
      df[k] = dc * st.c_prev[k] * st.f[k] * (S(1) - st.f[k]);
      dg[k] = dc * st.i[k] * (S(1) - st.g[k] * st.g[k]);
      dd[k] = dout * st.o[k] * (S(1) - st.o[k]);
      dc_next[k] = dc * st.f[k];
    }
    std::fill(dh_next.begin(), dh_next.end(), S(0));
    S* dx = grads.inputs.row(tt);
    matvec_backward(p.w_i, st.x.data(), di.data(), grads.params.w_i, dx);
    matvec_backward(p.w_f, st.x.data(), df.data(), grads.params.w_f, dx);
    matvec_backward(p.w_g, st.x.data(), dg.data(), grads.params.w_g, dx);
    matvec_backward(p.w_o, st.x.data(), dd.data(), grads.params.w_o, dx);
    matvec_backward(p.u_i, st.h_prev.data(), di.data(), grads.params.u_i, dh_next.data());
    matvec_backward(p.u_f, st.h_prev.data(), df.data(), grads.params.u_f, dh_next.data());
    matvec_backward(p.u_g, st.h_prev.data(), dg.data(), grads.params.u_g, dh_next.data());
    matvec_backward(p.u_o, st.h_prev.data(), dd.data(), grads.params.u_o, dh_next.data());
    for (size_t k = 0; k < H; ++k) {
      grads.params.b_i.data[k] += di[k];
      grads.params.b_f.data[k] += df[k];
      grads.params.b_g.data[k] += dg[k];
      grads.params.b_o.data[k] += dd[k];
    }
  }
}

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

template <typename S>
struct EmbeddingParams {
  Tensor2<S> table;  // vocab x dim

  EmbeddingParams() = default;
  EmbeddingParams(size_t vocab, size_t dim) : table(vocab, dim) {}

  static EmbeddingParams create(size_t vocab, size_t dim, Rng& rng) {
    EmbeddingParams p(vocab, dim);
    init_glorot(p.table, vocab, dim, rng);
    return p;
  }
};

template <typename S>
Tensor2<S> embedding_forward(const EmbeddingParams<S>& p, const std::vector<size_t>& ids) {
  Tensor2<S> out(ids.size(), p.table.cols);
  for (size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] >= p.table.rows) throw ShapeError("embedding_forward: id out of range");
    std::copy(p.table.row(ids[t]), p.table.row(ids[t]) + p.table.cols, out.row(t));
  }
  return out;
}

template <typename S>
void embedding_backward(const std::vector<size_t>& ids, const Tensor2<S>& grad_rows,
                        Tensor2<S>& grad_table) {
  if (grad_rows.rows != ids.size()) throw ShapeError("embedding_backward: shape mismatch");
  for (size_t t = 0; t < ids.size(); ++t) {
    S* dst = grad_table.row(ids[t]);
    const S* src = grad_rows.row(t);
    for (size_t c = 0; c < grad_rows.cols; ++c) dst[c] += src[c];
  }
}

// ---------------------------------------------------------------------------
// Parameter bookkeeping and SGD with momentum
// ---------------------------------------------------------------------------

template <typename S>
struct ParamRef {
  std::string name;
  Tensor2<S>* value;
};

template <typename S>
void collect_lstm_params(const std::string& prefix, LstmLayerParams<S>& p,
                         std::vector<ParamRef<S>>& out) {
  out.push_back({prefix + ".w_i", &p.w_i});
  out.push_back({prefix + ".u_i", &p.u_i});
  out.push_back({prefix + ".b_i", &p.b_i});
  out.push_back({prefix + ".w_f", &p.w_f});
  out.push_back({prefix + ".u_f", &p.u_f});
  out.push_back({prefix + ".b_f", &p.b_f});
  out.push_back({prefix + ".w_g", &p.w_g});
  out.push_back({prefix + ".u_g", &p.u_g});
  out.push_back({prefix + ".b_g", &p.b_g});
  out.push_back({prefix + ".w_o", &p.w_o});
  out.push_back({prefix + ".u_o", &p.u_o});
  out.push_back({prefix + ".b_o", &p.b_o});
}

template <typename S>
void collect_dense_params(const std::string& prefix, DenseParams<S>& p,
                          std::vector<ParamRef<S>>& out) {
  out.push_back({prefix + ".weight", &p.weight});
  out.push_back({prefix + ".bias", &p.bias});
}

template <typename S>
struct SgdState {
  std::vector<Tensor2<S>> velocity;

  explicit SgdState(const std::vector<ParamRef<S>>& params) {
    velocity.reserve(params.size());
    for (const auto& p : params) velocity.emplace_back(p.value->rows, p.value->cols);
  }
};

// Optional global-norm clipping, then v = momentum*v + g; p -= lr*v.
// With momentum=0 this is plain p -= lr*g.
template <typename S>
void sgd_step(const std::vector<ParamRef<S>>& params, const std::vector<Tensor2<S>*>& grads,
              double lr, double momentum, SgdState<S>& state, double clip_norm = 0.0) {
  if (params.size() != grads.size() || params.size() != state.velocity.size())
    throw ShapeError("sgd_step: parameter/gradient count mismatch");
  S scale = S(1);
  if (clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto* g : grads)
      for (S v : g->data) sq += static_cast<double>(v) * static_cast<double>(v);
    const double norm = std::sqrt(sq);
    if (norm > clip_norm) scale = static_cast<S>(clip_norm / norm);
  }
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor2<S>& p = *params[i].value;
    const Tensor2<S>& g = *grads[i];
    Tensor2<S>& v = state.velocity[i];
    if (!p.same_shape(g) || !p.same_shape(v))
      throw ShapeError("sgd_step: shape mismatch for " + params[i].name);
    for (size_t k = 0; k < p.data.size(); ++k) {
      v.data[k] = static_cast<S>(momentum) * v.data[k] + scale * g.data[k];
      p.data[k] -= static_cast<S>(lr) * v.data[k];
    }
    if (!p.all_finite()) throw NumericError("sgd_step: non-finite parameter in " + params[i].name);
  }
}

// Single-tensor convenience form.
template <typename S>
void sgd_step(Tensor2<S>& param, const Tensor2<S>& grad, double lr, double momentum,
              Tensor2<S>& velocity) {
  if (!param.same_shape(grad) || !param.same_shape(velocity))
    throw ShapeError("sgd_step: shape mismatch");
  for (size_t k = 0; k < param.data.size(); ++k) {
    velocity.data[k] = static_cast<S>(momentum) * velocity.data[k] + grad.data[k];
    param.data[k] -= static_cast<S>(lr) * velocity.data[k];
  }
}

}  // namespace streamlid
