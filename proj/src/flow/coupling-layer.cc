// src/flow/coupling-layer.cc

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

#include "fdnf/flow/coupling-layer.h"

#include "fdnf/base/error.h"

namespace fdnf {

namespace {

template <typename Scalar>
struct NetView {
  using MatMap = Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const Matrix, Matrix>>;
  using VecMap = Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const Vector, Vector>>;
  MatMap w1, w2;
  VecMap b1, b2;

  NetView(Scalar *p, int in, int hidden, int out)
      : w1(p, hidden, in),
        w2(p + hidden * in + hidden, out, hidden),
        b1(p + hidden * in, hidden),
        b2(p + hidden * in + hidden + out * hidden, out) {}
};

using ConstNet = NetView<const double>;
using GradNet = NetView<double>;

// hidden = tanh(in W1^T + b1), returns hidden W2^T + b2.
Matrix NetForward(const ConstNet &net, const Matrix &in, Matrix *hidden) {
  *hidden = ((in * net.w1.transpose()).rowwise() + net.b1.transpose()).array().tanh();
  return (*hidden * net.w2.transpose()).rowwise() + net.b2.transpose();
}

// Accumulates weight gradients and adds the input gradient into grad_in.
void NetBackward(const ConstNet &net, const Matrix &in, const Matrix &hidden,
                 const Matrix &grad_out, GradNet *grad, Matrix *grad_in) {
  grad->w2.noalias() += grad_out.transpose() * hidden;
  grad->b2 += grad_out.colwise().sum().transpose();
  Matrix grad_pre = (grad_out * net.w2).array() * (1.0 - hidden.array().square());
  grad->w1.noalias() += grad_pre.transpose() * in;
  grad->b1 += grad_pre.colwise().sum().transpose();
  grad_in->noalias() += grad_pre * net.w1;
}

}  // namespace

CouplingLayer::CouplingLayer(int dim, int parity, int hidden, double scale_bound)
    : dim_(dim), parity_(parity), hidden_(hidden), scale_bound_(scale_bound) {
  if (dim < 2) throw ValidationError("coupling layer needs at least 2 dimensions");
  if (hidden < 1) throw ValidationError("coupling hidden width must be positive");
  if (!(scale_bound > 0.0)) throw ValidationError("scale bound must be positive");
  if (parity != 0 && parity != 1) throw ValidationError("coupling parity must be 0 or 1");
  pass_size_ = (dim + 1) / 2;
  trans_size_ = dim - pass_size_;
  if (parity == 0) {
    pass_offset_ = 0;
    trans_offset_ = pass_size_;
  } else {
    trans_offset_ = 0;
    pass_offset_ = trans_size_;
  }
}

void CouplingLayer::Conditioner(const Matrix &pass, std::span<const double> params,
                                Matrix *log_scale, Matrix *shift) const {
  ConstNet scale_net(params.data(), pass_size_, hidden_, trans_size_);
  ConstNet shift_net(params.data() + NetParams(), pass_size_, hidden_, trans_size_);
  Matrix hidden;
  *log_scale = scale_bound_ * NetForward(scale_net, pass, &hidden).array().tanh();
  *shift = NetForward(shift_net, pass, &hidden);
}

Vector CouplingLayer::Normalize(const Matrix &x, std::span<const double> params,
                                Matrix *u, CouplingCache *cache) const {
  if (x.cols() != dim_) throw DimensionError("coupling input has wrong dimension");
  ConstNet scale_net(params.data(), pass_size_, hidden_, trans_size_);
  ConstNet shift_net(params.data() + NetParams(), pass_size_, hidden_, trans_size_);

  Matrix pass = x.middleCols(pass_offset_, pass_size_);
  Matrix scale_hidden, shift_hidden;
  Matrix raw_scale = NetForward(scale_net, pass, &scale_hidden);
  Matrix log_scale = scale_bound_ * raw_scale.array().tanh();
  Matrix shift = NetForward(shift_net, pass, &shift_hidden);

  Matrix out_trans =
      (x.middleCols(trans_offset_, trans_size_) - shift).array() * (-log_scale.array()).exp();
  *u = x;
  u->middleCols(trans_offset_, trans_size_) = out_trans;
  Vector log_det = -log_scale.rowwise().sum();

  if (cache != nullptr) {
    cache->pass = std::move(pass);
    cache->scale_hidden = std::move(scale_hidden);
    cache->raw_scale = std::move(raw_scale);
    cache->log_scale = std::move(log_scale);
    cache->shift_hidden = std::move(shift_hidden);
    cache->out_trans = std::move(out_trans);
  }
  return log_det;
}

Matrix CouplingLayer::Generate(const Matrix &u, std::span<const double> params) const {
  if (u.cols() != dim_) throw DimensionError("coupling input has wrong dimension");
  Matrix log_scale, shift;
  Conditioner(u.middleCols(pass_offset_, pass_size_), params, &log_scale, &shift);
  Matrix x = u;
  x.middleCols(trans_offset_, trans_size_) =
      u.middleCols(trans_offset_, trans_size_).array() * log_scale.array().exp() + shift.array();
  return x;
}

void CouplingLayer::Backward(const CouplingCache &cache, std::span<const double> params,
                             const Matrix &grad_u, const Vector &grad_log_det,
                             Matrix *grad_x, std::span<double> grad_params) const {
  ConstNet scale_net(params.data(), pass_size_, hidden_, trans_size_);
  ConstNet shift_net(params.data() + NetParams(), pass_size_, hidden_, trans_size_);
  GradNet g_scale_net(grad_params.data(), pass_size_, hidden_, trans_size_);
  GradNet g_shift_net(grad_params.data() + NetParams(), pass_size_, hidden_, trans_size_);

  Matrix g_out = grad_u.middleCols(trans_offset_, trans_size_);
  Matrix exp_neg_s = (-cache.log_scale.array()).exp();
  // u_trans = (x_trans - t) * exp(-s); log_det = -sum(s).
  Matrix g_x_trans = g_out.array() * exp_neg_s.array();
  Matrix g_shift = -g_x_trans;
  Matrix g_log_scale = -(g_out.array() * cache.out_trans.array());
  g_log_scale.colwise() -= grad_log_det;
  // s = bound * tanh(raw)
  Matrix tanh_raw = cache.raw_scale.array().tanh();
  Matrix g_raw = g_log_scale.array() * scale_bound_ * (1.0 - tanh_raw.array().square());

  Matrix g_pass = grad_u.middleCols(pass_offset_, pass_size_);
  NetBackward(scale_net, cache.pass, cache.scale_hidden, g_raw, &g_scale_net, &g_pass);
  NetBackward(shift_net, cache.pass, cache.shift_hidden, g_shift, &g_shift_net, &g_pass);

  grad_x->resize(grad_u.rows(), dim_);
  grad_x->middleCols(pass_offset_, pass_size_) = g_pass;
  grad_x->middleCols(trans_offset_, trans_size_) = g_x_trans;
}

}  // namespace fdnf
