// src/eval/mlp-classifier.cc

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

#include "fdnf/eval/mlp-classifier.h"

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "fdnf/base/error.h"
#include "fdnf/train/adam.h"
#include "fdnf/train/trainer.h"

namespace fdnf {

void MlpConfig::Validate() const {
  if (hidden < 1) throw ValidationError("classifier hidden width must be positive");
  if (epochs < 1) throw ValidationError("classifier epochs must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("classifier learning rate must be positive");
  if (batch_size < 1) throw ValidationError("classifier batch size must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ValidationError("validation fraction must lie in [0, 1)");
}

MlpClassifier::MlpClassifier(int input_dim, int hidden, int num_classes)
    : input_dim_(input_dim), hidden_(hidden), num_classes_(num_classes),
      params_(static_cast<std::size_t>(hidden) * input_dim + hidden +
                  static_cast<std::size_t>(num_classes) * hidden + num_classes,
              0.0),
      in_mean_(Vector::Zero(input_dim)), in_inv_scale_(Vector::Ones(input_dim)) {
  if (input_dim < 1 || hidden < 1) throw ValidationError("bad classifier shape");
  if (num_classes < 2) throw ValidationError("classifier needs at least two classes");
}

void MlpClassifier::SetStandardization(const Vector &mean, const Vector &inv_scale) {
  if (mean.size() != input_dim_ || inv_scale.size() != input_dim_)
    throw DimensionError("standardization has the wrong dimension");
  in_mean_ = mean;
  in_inv_scale_ = inv_scale;
}

Matrix MlpClassifier::Standardize(const Matrix &x) const {
  if (x.cols() != input_dim_) throw DimensionError("classifier input has the wrong dimension");
  return (x.rowwise() - in_mean_.transpose()).array().rowwise() * in_inv_scale_.transpose().array();
}

namespace {

struct Layers {
  Eigen::Map<const Matrix> w1;
  Eigen::Map<const Vector> b1;
  Eigen::Map<const Matrix> w2;
  Eigen::Map<const Vector> b2;
  Layers(const double *p, int d, int h, int c)
      : w1(p, h, d), b1(p + h * d, h), w2(p + h * d + h, c, h), b2(p + h * d + h + c * h, c) {}
};

// Row-wise softmax with the max subtracted first.
Matrix Softmax(const Matrix &logits) {
  Matrix p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  Vector sums = p.rowwise().sum();
  return p.array().colwise() / sums.array();
}

}  // namespace

Matrix MlpClassifier::Posteriors(const Matrix &x) const {
  Layers l(params_.data(), input_dim_, hidden_, num_classes_);
  Matrix h = ((Standardize(x) * l.w1.transpose()).rowwise() + l.b1.transpose()).array().tanh();
  return Softmax((h * l.w2.transpose()).rowwise() + l.b2.transpose());
}

Vector MlpClassifier::Posteriors(const Vector &x) const {
  return Posteriors(Matrix(x.transpose())).row(0).transpose();
}

std::vector<int> MlpClassifier::Predict(const Matrix &x) const {
  Matrix p = Posteriors(x);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index arg;
    p.row(i).maxCoeff(&arg);
    out[i] = static_cast<int>(arg);
  }
  return out;
}

double MlpClassifier::Accuracy(const Matrix &x, const std::vector<int> &labels) const {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows())
    throw DimensionError("labels and inputs differ in length");
  if (labels.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<int> pred = Predict(x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double MlpClassifier::LossAndGrad(const Matrix &x, std::span<const int> labels,
                                  std::span<double> grad) const {
  const int d = input_dim_, h = hidden_, c = num_classes_;
  Layers l(params_.data(), d, h, c);
  Matrix xs = Standardize(x);
  Matrix hidden = ((xs * l.w1.transpose()).rowwise() + l.b1.transpose()).array().tanh();
  Matrix p = Softmax((hidden * l.w2.transpose()).rowwise() + l.b2.transpose());
  const double n = static_cast<double>(x.rows());

  double loss = 0.0;
  Matrix g_logits = p;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    loss -= std::log(std::max(p(i, labels[i]), std::numeric_limits<double>::min()));
    g_logits(i, labels[i]) -= 1.0;
  }
  g_logits /= n;

  std::fill(grad.begin(), grad.end(), 0.0);
  Eigen::Map<Matrix> gw1(grad.data(), h, d);
  Eigen::Map<Vector> gb1(grad.data() + h * d, h);
  Eigen::Map<Matrix> gw2(grad.data() + h * d + h, c, h);
  Eigen::Map<Vector> gb2(grad.data() + h * d + h + c * h, c);
  gw2.noalias() = g_logits.transpose() * hidden;
  gb2 = g_logits.colwise().sum().transpose();
  Matrix g_pre = (g_logits * l.w2).array() * (1.0 - hidden.array().square());
  gw1.noalias() = g_pre.transpose() * xs;
  gb1 = g_pre.colwise().sum().transpose();
  return loss / n;
}

ClassifierTraining TrainClassifier(const Matrix &x, const std::vector<int> &labels,
                                   int num_classes, const MlpConfig &config) {
  config.Validate();
  if (static_cast<Eigen::Index>(labels.size()) != x.rows() || x.rows() < 2)
    throw ValidationError("classifier needs at least two labelled samples");
  std::set<int> distinct;
  for (int y : labels) {
    if (y < 0 || y >= num_classes)
      throw LabelRangeError("classifier label out of range", 0);
    distinct.insert(y);
  }
  if (distinct.size() < 2 || num_classes < 2)
    throw ValidationError("classifier training data must contain at least two classes");

  // Stratified split: per class, a seeded shuffle, first share to validation.
  std::mt19937_64 rng(config.seed);
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<std::size_t> train_rows, val_rows;
  for (auto &rows : by_class) {
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng() % i]);
    std::size_t n_val =
        static_cast<std::size_t>(std::floor(config.validation_fraction * rows.size() + 0.5));
    if (n_val >= rows.size()) n_val = rows.size() > 1 ? rows.size() - 1 : 0;
    val_rows.insert(val_rows.end(), rows.begin(), rows.begin() + n_val);
    train_rows.insert(train_rows.end(), rows.begin() + n_val, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(val_rows.begin(), val_rows.end());

  auto gather = [&](const std::vector<std::size_t> &rows, Matrix *xs, std::vector<int> *ys) {
    xs->resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    ys->resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      xs->row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
      (*ys)[k] = labels[rows[k]];
    }
  };
  Matrix x_train, x_val;
  std::vector<int> y_train, y_val;
  gather(train_rows, &x_train, &y_train);
  gather(val_rows, &x_val, &y_val);

  ClassifierTraining out;
  MlpClassifier &clf = out.classifier;
  clf = MlpClassifier(static_cast<int>(x.cols()), config.hidden, num_classes);
  Vector mean = x_train.colwise().mean().transpose();
  Vector sd = ((x_train.rowwise() - mean.transpose()).array().square().colwise().mean())
                  .sqrt()
                  .transpose();
  Vector inv_scale = sd.unaryExpr([](double s) { return s > 1e-12 ? 1.0 / s : 1.0; });
  clf.SetStandardization(mean, inv_scale);

  {
    std::normal_distribution<double> normal(0.0, 1.0);
    auto p = clf.mutable_params();
    const int d = clf.InputDim(), h = clf.Hidden(), c = clf.NumClasses();
    double s1 = 1.0 / std::sqrt(static_cast<double>(d)), s2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (int i = 0; i < h * d; ++i) p[i] = s1 * normal(rng);
    for (int i = 0; i < c * h; ++i) p[h * d + h + i] = s2 * normal(rng);
  }

  TrainConfig adam_config;
  adam_config.learning_rate = config.learning_rate;
  adam_config.grad_clip.reset();
  AdamState adam;
  adam.Reset(clf.params().size());
  std::vector<double> grad(clf.params().size());
  const std::size_t n = train_rows.size();
  const std::size_t batch = std::min<std::size_t>(config.batch_size, n);
  Matrix xb;
  std::vector<int> yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> perm = EpochPermutation(config.seed, epoch, n);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      std::size_t rows = std::min(batch, n - start);
      xb.resize(static_cast<Eigen::Index>(rows), x.cols());
      yb.resize(rows);
      for (std::size_t k = 0; k < rows; ++k) {
        xb.row(static_cast<Eigen::Index>(k)) = x_train.row(static_cast<Eigen::Index>(perm[start + k]));
        yb[k] = y_train[perm[start + k]];
      }
      double loss = clf.LossAndGrad(xb, yb, grad);
      if (!std::isfinite(loss)) throw NumericalError("classifier training diverged");
      AdamStep(adam_config, &adam, clf.mutable_params(), grad);
      epoch_loss += loss * static_cast<double>(rows);
      seen += rows;
    }
    out.loss_history.push_back(epoch_loss / static_cast<double>(seen));
  }
  out.train_accuracy = clf.Accuracy(x_train, y_train);
  out.validation_accuracy = clf.Accuracy(x_val, y_val);
  return out;
}

}  // namespace fdnf
