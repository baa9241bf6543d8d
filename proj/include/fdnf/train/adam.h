// include/fdnf/train/adam.h

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

#ifndef FDNF_TRAIN_ADAM_H_
#define FDNF_TRAIN_ADAM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fdnf {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 256;
  int epochs = 100;
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // epochs; 0 disables periodic checkpoints
  std::optional<double> grad_clip = 5.0;  // max global L2 norm

  void Validate() const;
};

/// First/second moment accumulators, aligned with the parameter vector.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  void Reset(std::size_t num_params);
};

/// Scales grads in place so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double ClipGlobalNorm(std::span<double> grads, double max_norm);

/// One bias-corrected Adam update, with optional global-norm clipping of a
/// copy of the gradient first.
void AdamStep(const TrainConfig &config, AdamState *state, std::span<double> params,
              std::span<const double> grads);

}  // namespace fdnf

#endif  // FDNF_TRAIN_ADAM_H_
