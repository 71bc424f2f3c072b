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

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "streamlid/common.hpp"
#include "streamlid/rng.hpp"

namespace streamlid {

// Dense row-major matrix. Vectors are stored as rows x 1.
template <typename S>
struct Tensor2 {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<S> data;

  Tensor2() = default;
  Tensor2(size_t r, size_t c, S fill = S(0)) : rows(r), cols(c), data(r * c, fill) {}

  size_t size() const { return rows * cols; }
  S& at(size_t r, size_t c) { return data[r * cols + c]; }
  S at(size_t r, size_t c) const { return data[r * cols + c]; }
  S* row(size_t r) { return data.data() + r * cols; }
  const S* row(size_t r) const { return data.data() + r * cols; }

  void fill(S v) { data.assign(rows * cols, v); }

  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (S v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename T>
  Tensor2<T> cast() const {
    Tensor2<T> out(rows, cols);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
    return out;
  }
};

using Tensor2f = Tensor2<float>;
using Tensor2d = Tensor2<double>;

template <typename S>
void require_shape(const Tensor2<S>& t, size_t rows, size_t cols, const char* what) {
  if (t.rows != rows || t.cols != cols)
    throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                     std::to_string(cols) + ", got " + std::to_string(t.rows) + "x" +
                     std::to_string(t.cols));
}

template <typename S>
void require_finite(const Tensor2<S>& t, const char* what) {
  if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite value");
}

// out += W * x. Four split accumulators keep the reduction order fixed while
// letting the compiler vectorize.
template <typename S>
void matvec_acc(const Tensor2<S>& w, const S* x, S* out) {
  const size_t n = w.cols;
  for (size_t r = 0; r < w.rows; ++r) {
    const S* wr = w.row(r);
    S a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    size_t c = 0;
    for (; c + 4 <= n; c += 4) {
      a0 += wr[c] * x[c];
      a1 += wr[c + 1] * x[c + 1];
      a2 += wr[c + 2] * x[c + 2];
      a3 += wr[c + 3] * x[c + 3];
    }
    S acc = (a0 + a1) + (a2 + a3);
    for (; c < n; ++c) acc += wr[c] * x[c];
    out[r] += acc;
  }
}

// grad_w += g * x^T, grad_x += W^T * g. Shared by every dense-style backward.
template <typename S>
void matvec_backward(const Tensor2<S>& w, const S* x, const S* g, Tensor2<S>& grad_w, S* grad_x) {
  const size_t n = w.cols;
  for (size_t r = 0; r < w.rows; ++r) {
    const S gr = g[r];
    S* gwr = grad_w.row(r);
    const S* wr = w.row(r);
    for (size_t c = 0; c < n; ++c) {
      gwr[c] += gr * x[c];
      if (grad_x) grad_x[c] += wr[c] * gr;
    }
  }
}

// Glorot uniform: r = sqrt(6 / (fan_in + fan_out)).
template <typename S>
void init_glorot(Tensor2<S>& t, size_t fan_in, size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.data) v = static_cast<S>(rng.uniform(-r, r));
}

}  // namespace streamlid
