// include/fdnf/flow/batch-norm-layer.h

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

#ifndef FDNF_FLOW_BATCH_NORM_LAYER_H_
#define FDNF_FLOW_BATCH_NORM_LAYER_H_

#include <span>

#include "fdnf/base/common.h"

namespace fdnf {

/// Intermediate values of one batch-norm pass, kept for Backward().
struct BatchNormCache {
  bool training = false;
  Matrix xhat;       // normalized input, N x D
  Vector mean;       // statistics actually used
  Vector var;
  Vector inv_std;    // 1 / sqrt(var + epsilon)
};

/// Invertible batch normalization, written in the normalizing (data to
/// latent) direction:
///
///   y = gamma * (x - mean) / sqrt(var + epsilon) + beta
///
/// gamma is stored as log_gamma so it stays positive. Parameter layout is
/// [log_gamma(D), beta(D)]. In training mode mean/var are the batch
/// statistics; in inference mode the running statistics are used and the
/// layer is a fixed affine map.
class BatchNormLayer {
 public:
  BatchNormLayer() = default;
  BatchNormLayer(int dim, double momentum, double epsilon);

  int Dim() const { return dim_; }
  int NumParams() const { return 2 * dim_; }
  double momentum() const { return momentum_; }
  double epsilon() const { return epsilon_; }

  const Vector &running_mean() const { return running_mean_; }
  const Vector &running_var() const { return running_var_; }
  bool stats_initialized() const { return stats_initialized_; }
  /// Throws ValidationError unless var + epsilon > 0 everywhere.
  void SetRunningStats(const Vector &mean, const Vector &var);
  void ClearRunningStats();

  /// Blends batch statistics into the running ones with the layer
  /// momentum; the first update copies them.
  void UpdateRunningStats(const Vector &batch_mean, const Vector &batch_var);

  /// Normalizing pass. Returns log|det dy/dx|, which is the same for every
  /// row. `cache` may be null when no backward pass follows.
  double Normalize(const Matrix &x, std::span<const double> params,
                   bool training, Matrix *y, BatchNormCache *cache) const;

  /// Inverse of the inference-mode Normalize().
  Matrix Generate(const Matrix &y, std::span<const double> params) const;

  /// Inference-mode log|det|: sum_d log gamma_d - 0.5 log(var_d + eps).
  double LogDet(std::span<const double> params) const;

  /// Accumulates parameter gradients into grad_params (+=) and writes the
  /// input gradient. grad_log_det is the upstream gradient of the summed
  /// per-row log-determinants.
  void Backward(const BatchNormCache &cache, std::span<const double> params,
                const Matrix &grad_y, double grad_log_det, Matrix *grad_x,
                std::span<double> grad_params) const;

 private:
  int dim_ = 0;
  double momentum_ = 0.1;
  double epsilon_ = 1e-5;
  Vector running_mean_;
  Vector running_var_;
  bool stats_initialized_ = false;
};

}  // namespace fdnf

#endif  // FDNF_FLOW_BATCH_NORM_LAYER_H_
