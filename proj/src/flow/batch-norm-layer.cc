// src/flow/batch-norm-layer.cc

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

#include "fdnf/flow/batch-norm-layer.h"

#include <cmath>

#include "fdnf/base/error.h"

namespace fdnf {

BatchNormLayer::BatchNormLayer(int dim, double momentum, double epsilon)
    : dim_(dim), momentum_(momentum), epsilon_(epsilon),
      running_mean_(Vector::Zero(dim)), running_var_(Vector::Ones(dim)) {
  if (dim < 1) throw ValidationError("batch norm dimension must be positive");
  if (!(momentum > 0.0 && momentum < 1.0))
    throw ValidationError("batch norm momentum must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("batch norm epsilon must be positive");
}

void BatchNormLayer::SetRunningStats(const Vector &mean, const Vector &var) {
  if (mean.size() != dim_ || var.size() != dim_)
    throw DimensionError("running statistics have the wrong dimension");
  if (!mean.allFinite() || !var.allFinite() || ((var.array() + epsilon_) <= 0.0).any())
    throw ValidationError("running variance + epsilon must be positive and finite");
  running_mean_ = mean;
  running_var_ = var;
  stats_initialized_ = true;
}

void BatchNormLayer::ClearRunningStats() {
  running_mean_.setZero(dim_);
  running_var_.setOnes(dim_);
  stats_initialized_ = false;
}

void BatchNormLayer::UpdateRunningStats(const Vector &batch_mean,
                                        const Vector &batch_var) {
  if (!stats_initialized_) {
    running_mean_ = batch_mean;
    running_var_ = batch_var;
    stats_initialized_ = true;
    return;
  }
  running_mean_ = (1.0 - momentum_) * running_mean_ + momentum_ * batch_mean;
  running_var_ = (1.0 - momentum_) * running_var_ + momentum_ * batch_var;
}

double BatchNormLayer::Normalize(const Matrix &x, std::span<const double> params,
                                 bool training, Matrix *y,
                                 BatchNormCache *cache) const {
  if (x.cols() != dim_) throw DimensionError("batch norm input has wrong dimension");
  Eigen::Map<const Vector> log_gamma(params.data(), dim_);
  Eigen::Map<const Vector> beta(params.data() + dim_, dim_);

  Vector mean, var;
  if (training) {
    if (x.rows() < 1) throw DimensionError("empty batch");
    mean = x.colwise().mean().transpose();
    var = (x.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
  } else {
    if (!stats_initialized_)
      throw ValidationError("inference-mode batch norm has uninitialized statistics");
    mean = running_mean_;
    var = running_var_;
  }
  Vector inv_std = (var.array() + epsilon_).rsqrt().matrix();
  Matrix xhat = (x.rowwise() - mean.transpose()).array().rowwise() * inv_std.transpose().array();
  Vector gamma = log_gamma.array().exp().matrix();
  *y = (xhat.array().rowwise() * gamma.transpose().array()).rowwise() +
       beta.transpose().array();

  double log_det = log_gamma.sum() + inv_std.array().log().sum();
  if (cache != nullptr) {
    cache->training = training;
    cache->xhat = std::move(xhat);
    cache->mean = std::move(mean);
    cache->var = std::move(var);
    cache->inv_std = std::move(inv_std);
  }
  return log_det;
}

Matrix BatchNormLayer::Generate(const Matrix &y, std::span<const double> params) const {
  if (y.cols() != dim_) throw DimensionError("batch norm input has wrong dimension");
  if (!stats_initialized_)
    throw ValidationError("inference-mode batch norm has uninitialized statistics");
  Eigen::Map<const Vector> log_gamma(params.data(), dim_);
  Eigen::Map<const Vector> beta(params.data() + dim_, dim_);
  Vector std_dev = (running_var_.array() + epsilon_).sqrt().matrix();
  Vector inv_gamma = (-log_gamma.array()).exp().matrix();
  Matrix xhat = (y.rowwise() - beta.transpose()).array().rowwise() * inv_gamma.transpose().array();
  return (xhat.array().rowwise() * std_dev.transpose().array()).rowwise() +
         running_mean_.transpose().array();
}

double BatchNormLayer::LogDet(std::span<const double> params) const {
  Eigen::Map<const Vector> log_gamma(params.data(), dim_);
  return log_gamma.sum() - 0.5 * (running_var_.array() + epsilon_).log().sum();
}

void BatchNormLayer::Backward(const BatchNormCache &cache,
                              std::span<const double> params,
                              const Matrix &grad_y, double grad_log_det,
                              Matrix *grad_x, std::span<double> grad_params) const {
  Eigen::Map<const Vector> log_gamma(params.data(), dim_);
  Eigen::Map<Vector> g_log_gamma(grad_params.data(), dim_);
  Eigen::Map<Vector> g_beta(grad_params.data() + dim_, dim_);
  Vector gamma = log_gamma.array().exp().matrix();

  // d y / d log_gamma = gamma * xhat; d logdet / d log_gamma = 1.
  g_log_gamma.array() += (grad_y.array() * cache.xhat.array()).colwise().sum().transpose() *
                             gamma.array() + grad_log_det;
  g_beta += grad_y.colwise().sum().transpose();

  Matrix g_xhat = grad_y.array().rowwise() * gamma.transpose().array();
  if (!cache.training) {
    *grad_x = g_xhat.array().rowwise() * cache.inv_std.transpose().array();
    return;
  }

  // Differentiate through the batch statistics. With xc = x - mean:
  //   d/dvar: sum_i g_xhat_i * xc_i * (-1/2)(var+eps)^(-3/2)
  //           + grad_log_det * (-1/2) / (var+eps)
  //   d/dmean: -sum_i g_xhat_i * inv_std  (the var term vanishes)
  const double n = static_cast<double>(grad_y.rows());
  Vector inv_var = cache.inv_std.array().square().matrix();
  // xc = xhat / inv_std
  Vector g_var = -0.5 * ((g_xhat.array() * cache.xhat.array()).colwise().sum().transpose() *
                         inv_var.array())
                            .matrix();
  g_var.array() -= 0.5 * grad_log_det * inv_var.array();
  Vector g_mean = -(g_xhat.colwise().sum().transpose().array() * cache.inv_std.array()).matrix();

  Matrix xc = cache.xhat.array().rowwise() / cache.inv_std.transpose().array();
  *grad_x = g_xhat.array().rowwise() * cache.inv_std.transpose().array();
  grad_x->array() += (xc.array().rowwise() * (2.0 / n * g_var).transpose().array());
  grad_x->rowwise() += (g_mean / n).transpose();
}

}  // namespace fdnf
