// include/fdnf/train/trainer.h

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

#ifndef FDNF_TRAIN_TRAINER_H_
#define FDNF_TRAIN_TRAINER_H_

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "fdnf/base/common.h"
#include "fdnf/base/error.h"
#include "fdnf/data/dataset.h"
#include "fdnf/flow/flow-model.h"
#include "fdnf/prior/prior.h"
#include "fdnf/train/adam.h"

namespace fdnf {

struct EpochRecord {
  int epoch = 0;             // 1-based
  double nll = 0.0;           // mean negative log-likelihood, nats per sample
  double prior_term = 0.0;    // mean log prior
  double entropy_term = 0.0;  // mean log|det|
};

struct TrainState {
  AdamState adam;
  int epochs_done = 0;
  std::vector<EpochRecord> history;
  double best_nll = 0.0;
};

/// Raised when the loss or gradient stops being finite. The model handed
/// to Train() has been rolled back to the start of the failing epoch.
class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(const std::string &what, int layer, int epoch)
      : NumericalError(what, layer), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// The optimizer sees one vector: flow parameters followed by the class
/// means (the latter only when the prior's means are trainable).
std::size_t NumTrainableParams(const FlowModel &model, const PriorSpec &spec);
std::vector<double> GatherParams(const FlowModel &model, const PriorSpec &spec);
void ScatterParams(std::span<const double> packed, FlowModel *model, PriorSpec *spec);

struct LossAndGrad {
  double nll = 0.0;
  double prior_term = 0.0;
  double entropy_term = 0.0;
  std::vector<double> grad;  // packed like GatherParams()
};

/// Mean NLL of a batch and its exact gradient w.r.t. every flow parameter
/// and every trainable class mean. labels is [prior factor][row] and may be
/// empty for the standard prior. If tape is non-null it keeps the forward
/// pass (needed to update batch-norm running statistics afterwards).
LossAndGrad NllAndGrad(const FlowModel &model, const PriorSpec &spec, const Matrix &x,
                       const LabelTable &labels, FlowMode mode, FlowTape *tape = nullptr);

/// Mean NLL in inference mode, no gradient.
EpochRecord EvaluateNll(const FlowModel &model, const PriorSpec &spec, const Matrix &x,
                        const LabelTable &labels);

/// Label columns of `data` in the prior's factor order (empty for the
/// standard prior). Throws ValidationError when the dataset lacks a factor
/// or has more classes than the prior.
LabelTable PriorLabels(const PriorSpec &spec, const LabeledDataset &data);

/// Deterministic permutation of [0, n) for one epoch.
std::vector<std::size_t> EpochPermutation(std::uint64_t seed, int epoch, std::size_t n);

struct TrainHooks {
  std::ostream *log = nullptr;
  /// Called after every checkpoint_every-th epoch with the 1-based count.
  std::function<void(int epoch, const FlowModel &, const PriorSpec &, const TrainState &)>
      on_checkpoint;
};

/// Maximum-likelihood training with Adam. Starts at state->epochs_done
/// (so a restored state resumes), runs to config.epochs. Each epoch visits
/// a seeded permutation in batches of batch_size; a trailing partial batch
/// is dropped when the dataset holds more than one batch. Batch norm runs
/// in training mode and its running statistics are updated after every
/// step. Returns the full history.
std::vector<EpochRecord> Train(FlowModel *model, PriorSpec *spec, const LabeledDataset &data,
                               const TrainConfig &config, TrainState *state,
                               const TrainHooks &hooks = {});

}  // namespace fdnf

#endif  // FDNF_TRAIN_TRAINER_H_
