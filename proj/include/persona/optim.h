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

#ifndef PERSONA_OPTIM_H_
#define PERSONA_OPTIM_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "persona/matrix.h"
#include "persona/rng.h"

namespace persona {

// Trainable tensor with its gradient and Adam moments.
struct Parameter {
  Parameter() = default;
  explicit Parameter(Matrix initial)
      : value(std::move(initial)),
        grad(value.rows(), value.cols()),
        opt_m(value.rows(), value.cols()),
        opt_v(value.rows(), value.cols()) {}

  void zero_grad() { grad.fill(0.0); }

  Matrix value;
  Matrix grad;
  Matrix opt_m;
  Matrix opt_v;
  std::uint64_t step_count = 0;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam update. Leaves `grad` untouched.
void adam_step(Parameter& param, const AdamOptions& options);

// Rescales every gradient so the global L2 norm is at most `max_norm`.
// Returns the applied scale (1 when no clipping happened).
double clip_global_norm(std::span<Parameter* const> params, double max_norm = 5.0);

double global_grad_norm(std::span<Parameter* const> params);

struct NamedParameter {
  std::string name;
  Parameter* param;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Coordinates sampled per parameter; 0 checks every coordinate.
  std::size_t samples_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = true;
};

// Compares the gradients currently stored in `params` against central
// differences of `loss`. `loss` must be a deterministic function of the
// parameter values. Failures are reported, never thrown.
GradCheckReport gradient_check(const std::function<double()>& loss,
                               std::span<const NamedParameter> params,
                               const GradCheckOptions& options = {});

}  // namespace persona

#endif  // PERSONA_OPTIM_H_
