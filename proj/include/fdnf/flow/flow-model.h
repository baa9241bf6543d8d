// include/fdnf/flow/flow-model.h

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

#ifndef FDNF_FLOW_FLOW_MODEL_H_
#define FDNF_FLOW_FLOW_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fdnf/base/common.h"
#include "fdnf/flow/batch-norm-layer.h"
#include "fdnf/flow/coupling-layer.h"

namespace fdnf {

struct FlowConfig {
  int dim = 0;
  int blocks = 6;
  int hidden = 64;
  double scale_bound = 2.0;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;

  void Validate() const;
};

enum class FlowMode { kTraining, kInference };

struct InverseResult {
  Vector z;
  double log_det = 0.0;
  /// log|det| contributed by each layer, in normalizing order.
  std::vector<double> layer_log_dets;
};

struct BatchInverseResult {
  Matrix z;
  Vector log_det;  // one entry per row
};

/// Everything a backward pass needs from the matching normalizing pass.
struct FlowTape {
  FlowMode mode = FlowMode::kInference;
  std::vector<BatchNormCache> norms;
  std::vector<CouplingCache> couplings;
};

/// A stack of B blocks. In the normalizing direction (x to z) block b
/// applies batch norm then an affine coupling layer whose parity is b % 2.
/// Layer indices run 0 .. 2B-1 in that order: layer 2b is the batch norm of
/// block b, layer 2b+1 its coupling layer. Forward() is the generative map f
/// (z to x), Inverse() is f^-1.
///
/// All trainable parameters live in one flat store laid out in layer order;
/// batch-norm running statistics are state, not parameters.
class FlowModel {
 public:
  FlowModel() = default;
  explicit FlowModel(const FlowConfig &config);

  const FlowConfig &config() const { return config_; }
  int Dim() const { return config_.dim; }
  int NumBlocks() const { return config_.blocks; }
  int NumLayers() const { return 2 * config_.blocks; }

  std::size_t NumParams() const { return params_.size(); }
  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }
  std::size_t LayerParamOffset(int layer) const { return offsets_[layer]; }
  std::size_t LayerNumParams(int layer) const {
    return offsets_[layer + 1] - offsets_[layer];
  }
  std::span<const double> LayerParams(int layer) const;

  const BatchNormLayer &batch_norm(int block) const { return norms_[block]; }
  BatchNormLayer &mutable_batch_norm(int block) { return norms_[block]; }
  const CouplingLayer &coupling(int block) const { return couplings_[block]; }

  /// Zero coupling nets, gamma = 1, beta = 0 and running statistics
  /// (0, 1 - epsilon): the exact identity map.
  void SetIdentity();
  /// Every parameter i.i.d. N(0, scale^2), running means N(0, 1) and running
  /// variances in [0.5, 2). Used by the property tests.
  void InitRandom(std::uint64_t seed, double scale);
  /// Starting point for training: identity output (last layer of every
  /// coupling net zeroed), random first layers, running stats unset.
  void InitForTraining(std::uint64_t seed);

  /// f(z). Inference mode.
  Vector Forward(const Vector &z) const;
  Matrix ForwardBatch(const Matrix &z) const;

  /// f^-1(x) with log|det d f^-1 / dx|. Inference mode.
  InverseResult Inverse(const Vector &x) const;
  BatchInverseResult InverseBatch(const Matrix &x) const;

  /// Normalizing pass that records a tape for Backward(). In training mode
  /// batch norm uses batch statistics.
  BatchInverseResult InverseWithTape(const Matrix &x, FlowMode mode,
                                     FlowTape *tape) const;

  /// Reverse-mode pass. grad_z and grad_log_det are the upstream gradients
  /// of the objective w.r.t. the outputs of InverseWithTape(). Parameter
  /// gradients are accumulated (+=) into grad_params, which must have
  /// NumParams() entries. grad_x receives the input gradient if non-null.
  void Backward(const FlowTape &tape, const Matrix &grad_z,
                const Vector &grad_log_det, std::span<double> grad_params,
                Matrix *grad_x = nullptr) const;

  /// Folds the batch statistics recorded on a training-mode tape into the
  /// running statistics.
  void UpdateRunningStats(const FlowTape &tape);

 private:
  void CheckInput(const Matrix &x) const;

  FlowConfig config_;
  std::vector<BatchNormLayer> norms_;
  std::vector<CouplingLayer> couplings_;
  std::vector<std::size_t> offsets_;  // NumLayers() + 1 entries
  std::vector<double> params_;
};

/// Central-difference Jacobian of f^-1 at x, then log|det|. Pushes 2D
/// perturbed rows through the model; meant as a test oracle for small D. Throws
/// NumericalError when the determinant is not positive.
double LogDetNumeric(const FlowModel &model, const Vector &x, double step);

}  // namespace fdnf

#endif  // FDNF_FLOW_FLOW_MODEL_H_
