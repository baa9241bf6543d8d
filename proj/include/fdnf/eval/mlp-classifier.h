// include/fdnf/eval/mlp-classifier.h

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

#ifndef FDNF_EVAL_MLP_CLASSIFIER_H_
#define FDNF_EVAL_MLP_CLASSIFIER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fdnf/base/common.h"

namespace fdnf {

struct MlpConfig {
  int hidden = 64;
  int epochs = 50;
  double learning_rate = 1e-3;
  int batch_size = 64;
  double validation_fraction = 0.2;  // stratified hold-out
  std::uint64_t seed = 1;

  void Validate() const;
};

/// One-hidden-layer tanh MLP with a softmax output. Inputs are standardized
/// with statistics of the training portion before the first layer.
class MlpClassifier {
 public:
  MlpClassifier() = default;
  MlpClassifier(int input_dim, int hidden, int num_classes);

  int InputDim() const { return input_dim_; }
  int Hidden() const { return hidden_; }
  int NumClasses() const { return num_classes_; }

  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }
  void SetStandardization(const Vector &mean, const Vector &inv_scale);

  /// Row-wise class posteriors; each row sums to one.
  Matrix Posteriors(const Matrix &x) const;
  Vector Posteriors(const Vector &x) const;
  std::vector<int> Predict(const Matrix &x) const;
  double Accuracy(const Matrix &x, const std::vector<int> &labels) const;

  /// Mean cross-entropy of a batch; gradient written to grad (same layout
  /// as params()).
  double LossAndGrad(const Matrix &x, std::span<const int> labels,
                     std::span<double> grad) const;

 private:
  Matrix Standardize(const Matrix &x) const;

  int input_dim_ = 0, hidden_ = 0, num_classes_ = 0;
  // [W1 (H x D), b1 (H), W2 (C x H), b2 (C)], column-major.
  std::vector<double> params_;
  Vector in_mean_;
  Vector in_inv_scale_;
};

struct ClassifierTraining {
  MlpClassifier classifier;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;  // NaN when there is no hold-out
  std::vector<double> loss_history;
};

/// Cross-entropy training with Adam on a seeded stratified split. Rejects
/// labels with fewer than two distinct classes.
ClassifierTraining TrainClassifier(const Matrix &x, const std::vector<int> &labels,
                                   int num_classes, const MlpConfig &config);

}  // namespace fdnf

#endif  // FDNF_EVAL_MLP_CLASSIFIER_H_
