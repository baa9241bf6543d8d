// include/fdnf/flow/coupling-layer.h

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

#ifndef FDNF_FLOW_COUPLING_LAYER_H_
#define FDNF_FLOW_COUPLING_LAYER_H_

#include <span>

#include "fdnf/base/common.h"

namespace fdnf {

struct CouplingCache {
  Matrix pass;        // passthrough half of the input, N x P
  Matrix scale_hidden;  // tanh hidden activations of the scale net, N x H
  Matrix raw_scale;     // scale net output before bounding, N x T
  Matrix log_scale;     // bounded log-scales s, N x T
  Matrix shift_hidden;  // tanh hidden activations of the translate net
  Matrix out_trans;     // transformed half of the output, N x T
};

/// Affine coupling layer. The input is split into two contiguous halves:
/// the passthrough half (ceil(D/2) dims) is copied, the other half is
/// affinely transformed with scale and shift computed from the passthrough
/// half. parity 0 passes the leading dims through, parity 1 the trailing.
///
/// Generative direction (latent u to data x):
///   x_trans = u_trans * exp(s(u_pass)) + t(u_pass)
/// Normalizing direction (x to u):
///   u_trans = (x_trans - t(x_pass)) * exp(-s(x_pass)),  log|det| = -sum s
///
/// s = bound * tanh(MLP_s(pass)), t = MLP_t(pass), both MLPs with one tanh
/// hidden layer. Parameter layout is the scale net followed by the
/// translate net, each as [W1 (H x P), b1 (H), W2 (T x H), b2 (T)] with
/// column-major matrices.
class CouplingLayer {
 public:
  CouplingLayer() = default;
  CouplingLayer(int dim, int parity, int hidden, double scale_bound);

  int Dim() const { return dim_; }
  int parity() const { return parity_; }
  int hidden() const { return hidden_; }
  double scale_bound() const { return scale_bound_; }
  int pass_offset() const { return pass_offset_; }
  int pass_size() const { return pass_size_; }
  int trans_offset() const { return trans_offset_; }
  int trans_size() const { return trans_size_; }
  int NumParams() const { return 2 * NetParams(); }
  int NetParams() const {
    return hidden_ * pass_size_ + hidden_ + trans_size_ * hidden_ + trans_size_;
  }

  /// Normalizing pass; returns per-row log|det|.
  Vector Normalize(const Matrix &x, std::span<const double> params, Matrix *u,
                   CouplingCache *cache) const;

  /// Generative pass, the exact inverse of Normalize().
  Matrix Generate(const Matrix &u, std::span<const double> params) const;

  /// Bounded log-scales and shifts for a batch of passthrough halves.
  void Conditioner(const Matrix &pass, std::span<const double> params,
                   Matrix *log_scale, Matrix *shift) const;

  void Backward(const CouplingCache &cache, std::span<const double> params,
                const Matrix &grad_u, const Vector &grad_log_det,
                Matrix *grad_x, std::span<double> grad_params) const;

 private:
  int dim_ = 0;
  int parity_ = 0;
  int hidden_ = 0;
  double scale_bound_ = 2.0;
  int pass_offset_ = 0, pass_size_ = 0;
  int trans_offset_ = 0, trans_size_ = 0;
};

}  // namespace fdnf

#endif  // FDNF_FLOW_COUPLING_LAYER_H_
