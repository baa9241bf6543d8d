// src/train/adam.cc

// Copyright 2026  The fdnf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fdnf/train/adam.h"

#include <cmath>

#include "fdnf/base/error.h"

namespace fdnf {

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("learning_rate must be finite and non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("beta2 must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ValidationError("adam_epsilon must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (epochs < 0) throw ValidationError("epochs must be non-negative");
  if (checkpoint_every < 0) throw ValidationError("checkpoint_every must be non-negative");
  if (grad_clip && !(*grad_clip > 0.0)) throw ValidationError("grad_clip must be positive");
}

void AdamState::Reset(std::size_t num_params) {
  step = 0;
  m.assign(num_params, 0.0);
  v.assign(num_params, 0.0);
}

double ClipGlobalNorm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double scale = max_norm / norm;
    for (double &g : grads) g *= scale;
  }
  return norm;
}

void AdamStep(const TrainConfig &config, AdamState *state, std::span<double> params,
              std::span<const double> grads) {
  if (params.size() != grads.size() || state->m.size() != params.size() ||
      state->v.size() != params.size())
    throw DimensionError("Adam state, parameters and gradients must align");
  std::vector<double> g(grads.begin(), grads.end());
  if (config.grad_clip) ClipGlobalNorm(g, *config.grad_clip);

  ++state->step;
  const double t = static_cast<double>(state->step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state->m[i] = config.beta1 * state->m[i] + (1.0 - config.beta1) * g[i];
    state->v[i] = config.beta2 * state->v[i] + (1.0 - config.beta2) * g[i] * g[i];
    double m_hat = state->m[i] / correction1;
    double v_hat = state->v[i] / correction2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
  }
}

}  // namespace fdnf
