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

#include "persona/optim.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "persona/error.h"

namespace persona {

void adam_step(Parameter& param, const AdamOptions& options) {
  if (!param.grad.all_finite()) {
    throw Error(ErrorKind::kTrainingDivergence, "adam_step: non-finite gradient");
  }
  param.step_count += 1;
  const double t = static_cast<double>(param.step_count);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  auto value = param.value.flat();
  auto grad = param.grad.flat();
  auto m = param.opt_m.flat();
  auto v = param.opt_v.flat();
  for (std::size_t i = 0; i < value.size(); ++i) {
    m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * grad[i];
    v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    value[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
  }
}

double global_grad_norm(std::span<Parameter* const> params) {
  double total = 0.0;
  for (const Parameter* p : params) total += squared_norm(p->grad);
  return std::sqrt(total);
}

double clip_global_norm(std::span<Parameter* const> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (!(norm > max_norm)) return 1.0;
  const double scale = max_norm / norm;
  for (Parameter* p : params) {
    for (double& g : p->grad.flat()) g *= scale;
  }
  return scale;
}

GradCheckReport gradient_check(const std::function<double()>& loss,
                               std::span<const NamedParameter> params,
                               const GradCheckOptions& options) {
  GradCheckReport report;
  Rng rng(options.seed);
  for (const NamedParameter& named : params) {
    Parameter& p = *named.param;
    // Snapshot the analytic gradient; `loss` may overwrite it.
    const Matrix analytic = p.grad;
    const std::size_t n = p.value.size();

    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.samples_per_param != 0 && options.samples_per_param < n) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(options.samples_per_param);
      std::sort(coords.begin(), coords.end());
    }

    GradCheckEntry entry;
    entry.name = named.name;
    auto values = p.value.flat();
    for (std::size_t idx : coords) {
      const double original = values[idx];
      values[idx] = original + options.step;
      const double plus = loss();
      values[idx] = original - options.step;
      const double minus = loss();
      values[idx] = original;

      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = analytic.flat()[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      entry.checked += 1;
      if (rel > entry.max_rel_error || !std::isfinite(rel)) {
        entry.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
        entry.worst_index = idx;
        entry.worst_analytic = a;
        entry.worst_numeric = numeric;
      }
    }
    p.grad = analytic;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace persona
