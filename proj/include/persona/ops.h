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

#ifndef PERSONA_OPS_H_
#define PERSONA_OPS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "persona/matrix.h"

namespace persona {

// out[r][c] = sum_i x[r][i] * w[i][c] + b[0][c]
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b);

// Accumulates dW and db; writes dx when requested.
void affine_backward(const Matrix& x, const Matrix& w, const Matrix& dout,
                     Matrix* dx, Matrix& dw, Matrix& db);

enum class Activation { kRelu, kSigmoid, kTanh };

double sigmoid(double x);

Matrix activate(Activation kind, const Matrix& x);

// `input` and `output` are the forward pass operands; relu differentiates
// through the input, sigmoid and tanh through their outputs.
Matrix activate_backward(Activation kind, const Matrix& input,
                         const Matrix& output, const Matrix& dout);

Matrix row_softmax(const Matrix& x);
Matrix row_softmax_backward(const Matrix& y, const Matrix& dy);

struct CrossEntropy {
  double loss = 0.0;
  Matrix dlogits;  // gradient of the loss w.r.t. the logits
  double weight = 0.0;  // number of unmasked positions
};

// Mean negative log-likelihood over unmasked rows.
CrossEntropy masked_cross_entropy(const Matrix& logits,
                                  std::span<const std::int32_t> targets,
                                  std::span<const std::uint8_t> mask);

struct Pooled {
  Matrix values;                   // 1 x F
  std::vector<std::size_t> argmax; // per feature, lowest index on ties
};

Pooled max_over_time(const Matrix& features);

// Routes each upstream feature gradient to its argmax row.
Matrix max_over_time_backward(const Pooled& pooled, const Matrix& dout,
                              std::size_t positions);

}  // namespace persona

#endif  // PERSONA_OPS_H_
