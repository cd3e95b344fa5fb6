// Copyright 2026 The Persona Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "persona/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "persona/error.h"

namespace persona {
namespace {

void require_finite(const Matrix& x, const char* op) {
  if (!x.all_finite()) {
    throw Error(ErrorKind::kNonFinite, std::string(op) + ": non-finite input");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::kInvalidShape, std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) {
    throw Error(ErrorKind::kInvalidShape,
                "affine: x " + std::to_string(x.rows()) + "x" +
                    std::to_string(x.cols()) + ", W " + std::to_string(w.rows()) +
                    "x" + std::to_string(w.cols()) + ", b " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out(x.rows(), w.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    std::copy(b.flat().begin(), b.flat().end(), out.row(r).begin());
  }
  matmul_acc(x, w, out);
  return out;
}

void affine_backward(const Matrix& x, const Matrix& w, const Matrix& dout,
                     Matrix* dx, Matrix& dw, Matrix& db) {
  if (dout.rows() != x.rows() || dout.cols() != w.cols() || !dw.same_shape(w) ||
      db.rows() != 1 || db.cols() != w.cols()) {
    throw Error(ErrorKind::kInvalidShape, "affine_backward: shape mismatch");
  }
  matmul_at_b_acc(x, dout, dw);
  for (std::size_t r = 0; r < dout.rows(); ++r) {
    auto src = dout.row(r);
    auto dst = db.row(0);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
  }
  if (dx != nullptr) *dx = matmul_a_bt(dout, w);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix activate(Activation kind, const Matrix& x) {
  require_finite(x, "activate");
  Matrix y(x.rows(), x.cols());
  auto in = x.flat();
  auto out = y.flat();
  for (std::size_t i = 0; i < in.size(); ++i) {
    switch (kind) {
      case Activation::kRelu: out[i] = in[i] > 0.0 ? in[i] : 0.0; break;
      case Activation::kSigmoid: out[i] = sigmoid(in[i]); break;
      case Activation::kTanh: out[i] = std::tanh(in[i]); break;
    }
  }
  return y;
}

Matrix activate_backward(Activation kind, const Matrix& input,
                         const Matrix& output, const Matrix& dout) {
  require_same_shape(input, dout, "activate_backward");
  require_same_shape(output, dout, "activate_backward");
  Matrix dx(dout.rows(), dout.cols());
  auto x = input.flat();
  auto y = output.flat();
  auto g = dout.flat();
  auto d = dx.flat();
  for (std::size_t i = 0; i < g.size(); ++i) {
    switch (kind) {
      case Activation::kRelu: d[i] = x[i] > 0.0 ? g[i] : 0.0; break;
      case Activation::kSigmoid: d[i] = g[i] * y[i] * (1.0 - y[i]); break;
      case Activation::kTanh: d[i] = g[i] * (1.0 - y[i] * y[i]); break;
    }
  }
  return dx;
}

Matrix row_softmax(const Matrix& x) {
  require_finite(x, "row_softmax");
  Matrix y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - mx);
      sum += out[c];
    }
    for (double& v : out) v /= sum;
  }
  return y;
}

Matrix row_softmax_backward(const Matrix& y, const Matrix& dy) {
  require_same_shape(y, dy, "row_softmax_backward");
  Matrix dx(y.rows(), y.cols());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto yr = y.row(r);
    auto gr = dy.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
    auto out = dx.row(r);
    for (std::size_t c = 0; c < yr.size(); ++c) out[c] = yr[c] * (gr[c] - dot);
  }
  return dx;
}

CrossEntropy masked_cross_entropy(const Matrix& logits,
                                  std::span<const std::int32_t> targets,
                                  std::span<const std::uint8_t> mask) {
  const std::size_t steps = logits.rows();
  const std::size_t vocab = logits.cols();
  if (targets.size() != steps || mask.size() != steps) {
    throw Error(ErrorKind::kInvalidShape,
                "masked_cross_entropy: targets/mask length must equal logits rows");
  }
  double weight = 0.0;
  for (std::size_t t = 0; t < steps; ++t) weight += mask[t] ? 1.0 : 0.0;
  if (weight == 0.0) {
    throw Error(ErrorKind::kDegenerateMask, "masked_cross_entropy: all-zero mask");
  }

  CrossEntropy result;
  result.weight = weight;
  result.dlogits = Matrix(steps, vocab);
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    if (!mask[t]) continue;
    const std::int32_t target = targets[t];
    if (target < 0 || static_cast<std::size_t>(target) >= vocab) {
      throw Error(ErrorKind::kInvalidId,
                  "masked_cross_entropy: target id " + std::to_string(target) +
                      " out of range");
    }
    auto row = logits.row(t);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    auto grad = result.dlogits.row(t);
    for (std::size_t c = 0; c < vocab; ++c) {
      grad[c] = std::exp(row[c] - mx);
      sum += grad[c];
    }
    const double log_sum = std::log(sum);
    total += log_sum - (row[target] - mx);
    for (std::size_t c = 0; c < vocab; ++c) grad[c] = grad[c] / sum / weight;
    grad[target] -= 1.0 / weight;
  }
  result.loss = total / weight;
  return result;
}

Pooled max_over_time(const Matrix& features) {
  if (features.rows() == 0) {
    throw Error(ErrorKind::kEmptyInput, "max_over_time: no positions");
  }
  Pooled pooled;
  pooled.values = Matrix(1, features.cols());
  pooled.argmax.assign(features.cols(), 0);
  for (std::size_t f = 0; f < features.cols(); ++f) {
    double best = features(0, f);
    std::size_t at = 0;
    for (std::size_t p = 1; p < features.rows(); ++p) {
      if (features(p, f) > best) {
        best = features(p, f);
        at = p;
      }
    }
    pooled.values(0, f) = best;
    pooled.argmax[f] = at;
  }
  return pooled;
}

Matrix max_over_time_backward(const Pooled& pooled, const Matrix& dout,
                              std::size_t positions) {
  if (dout.rows() != 1 || dout.cols() != pooled.argmax.size()) {
    throw Error(ErrorKind::kInvalidShape, "max_over_time_backward: shape mismatch");
  }
  Matrix d(positions, dout.cols());
  for (std::size_t f = 0; f < dout.cols(); ++f) {
    d(pooled.argmax[f], f) += dout(0, f);
  }
  return d;
}

}  // namespace persona
