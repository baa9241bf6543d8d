// src/flow/flow-model.cc

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

#include "fdnf/flow/flow-model.h"

#include <cmath>
#include <random>
#include <string>

#include "fdnf/base/error.h"

namespace fdnf {

void FlowConfig::Validate() const {
  if (dim < 2) throw ValidationError("flow dimension must be at least 2");
  if (blocks < 1) throw ValidationError("flow needs at least one block");
  if (hidden < 1) throw ValidationError("hidden width must be positive");
  if (!(scale_bound > 0.0)) throw ValidationError("scale bound must be positive");
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0))
    throw ValidationError("batch norm momentum must lie in (0, 1)");
  if (!(bn_epsilon > 0.0)) throw ValidationError("batch norm epsilon must be positive");
}

FlowModel::FlowModel(const FlowConfig &config) : config_(config) {
  config_.Validate();
  offsets_.push_back(0);
  for (int b = 0; b < config_.blocks; ++b) {
    norms_.emplace_back(config_.dim, config_.bn_momentum, config_.bn_epsilon);
    offsets_.push_back(offsets_.back() + norms_.back().NumParams());
    couplings_.emplace_back(config_.dim, b % 2, config_.hidden, config_.scale_bound);
    offsets_.push_back(offsets_.back() + couplings_.back().NumParams());
  }
  params_.assign(offsets_.back(), 0.0);
}

std::span<const double> FlowModel::LayerParams(int layer) const {
  return std::span<const double>(params_).subspan(offsets_[layer], LayerNumParams(layer));
}

void FlowModel::SetIdentity() {
  std::fill(params_.begin(), params_.end(), 0.0);
  for (auto &bn : norms_)
    bn.SetRunningStats(Vector::Zero(Dim()), Vector::Constant(Dim(), 1.0 - bn.epsilon()));
}

void FlowModel::InitRandom(std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.5, 2.0);
  for (double &p : params_) p = scale * normal(rng);
  for (auto &bn : norms_) {
    Vector mean(Dim()), var(Dim());
    for (int d = 0; d < Dim(); ++d) mean(d) = normal(rng);
    for (int d = 0; d < Dim(); ++d) var(d) = uniform(rng);
    bn.SetRunningStats(mean, var);
  }
}

void FlowModel::InitForTraining(std::uint64_t seed) {
  std::fill(params_.begin(), params_.end(), 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int b = 0; b < NumBlocks(); ++b) {
    norms_[b].ClearRunningStats();
    const CouplingLayer &c = couplings_[b];
    double *p = params_.data() + offsets_[2 * b + 1];
    double w_scale = 1.0 / std::sqrt(static_cast<double>(c.pass_size()));
    for (int net = 0; net < 2; ++net) {
      double *w1 = p + net * c.NetParams();
      for (int i = 0; i < c.hidden() * c.pass_size(); ++i) w1[i] = w_scale * normal(rng);
    }
  }
}

void FlowModel::CheckInput(const Matrix &x) const {
  if (x.cols() != Dim())
    throw DimensionError("expected dimension " + std::to_string(Dim()) + ", got " +
                         std::to_string(x.cols()));
}

namespace {

void CheckFinite(const Matrix &m, int layer, const char *what) {
  if (!m.allFinite())
    throw NumericalError(std::string("non-finite ") + what + " at flow layer " +
                             std::to_string(layer),
                         layer);
}

}  // namespace

Vector FlowModel::Forward(const Vector &z) const {
  if (z.size() != Dim())
    throw DimensionError("expected dimension " + std::to_string(Dim()) + ", got " +
                         std::to_string(z.size()));
  return ForwardBatch(z.transpose()).row(0).transpose();
}

Matrix FlowModel::ForwardBatch(const Matrix &z) const {
  CheckInput(z);
  Matrix h = z;
  for (int b = NumBlocks() - 1; b >= 0; --b) {
    h = couplings_[b].Generate(h, LayerParams(2 * b + 1));
    CheckFinite(h, 2 * b + 1, "output");
    h = norms_[b].Generate(h, LayerParams(2 * b));
    CheckFinite(h, 2 * b, "output");
  }
  return h;
}

InverseResult FlowModel::Inverse(const Vector &x) const {
  if (x.size() != Dim())
    throw DimensionError("expected dimension " + std::to_string(Dim()) + ", got " +
                         std::to_string(x.size()));
  InverseResult out;
  Matrix h = x.transpose();
  for (int b = 0; b < NumBlocks(); ++b) {
    Matrix next;
    double ld = norms_[b].Normalize(h, LayerParams(2 * b), false, &next, nullptr);
    CheckFinite(next, 2 * b, "output");
    out.layer_log_dets.push_back(ld);
    Vector cld = couplings_[b].Normalize(next, LayerParams(2 * b + 1), &h, nullptr);
    CheckFinite(h, 2 * b + 1, "output");
    out.layer_log_dets.push_back(cld(0));
  }
  out.z = h.row(0).transpose();
  for (double ld : out.layer_log_dets) out.log_det += ld;
  if (!std::isfinite(out.log_det))
    throw NumericalError("non-finite log-determinant", -1);
  return out;
}

BatchInverseResult FlowModel::InverseBatch(const Matrix &x) const {
  return InverseWithTape(x, FlowMode::kInference, nullptr);
}

BatchInverseResult FlowModel::InverseWithTape(const Matrix &x, FlowMode mode,
                                              FlowTape *tape) const {
  CheckInput(x);
  const bool training = mode == FlowMode::kTraining;
  if (tape != nullptr) {
    tape->mode = mode;
    tape->norms.assign(NumBlocks(), {});
    tape->couplings.assign(NumBlocks(), {});
  }
  BatchInverseResult out;
  out.log_det = Vector::Zero(x.rows());
  Matrix h = x;
  for (int b = 0; b < NumBlocks(); ++b) {
    Matrix next;
    double ld = norms_[b].Normalize(h, LayerParams(2 * b), training, &next,
                                    tape ? &tape->norms[b] : nullptr);
    CheckFinite(next, 2 * b, "output");
    out.log_det.array() += ld;
    out.log_det += couplings_[b].Normalize(next, LayerParams(2 * b + 1), &h,
                                           tape ? &tape->couplings[b] : nullptr);
    CheckFinite(h, 2 * b + 1, "output");
  }
  if (!out.log_det.allFinite()) throw NumericalError("non-finite log-determinant", -1);
  out.z = std::move(h);
  return out;
}

void FlowModel::Backward(const FlowTape &tape, const Matrix &grad_z,
                         const Vector &grad_log_det, std::span<double> grad_params,
                         Matrix *grad_x) const {
  if (grad_params.size() != params_.size())
    throw DimensionError("gradient buffer does not match parameter count");
  if (tape.norms.size() != static_cast<std::size_t>(NumBlocks()))
    throw ValidationError("tape was not recorded by this model");
  const double grad_log_det_sum = grad_log_det.sum();
  Matrix g = grad_z;
  for (int b = NumBlocks() - 1; b >= 0; --b) {
    Matrix g_in;
    couplings_[b].Backward(tape.couplings[b], LayerParams(2 * b + 1), g, grad_log_det,
                           &g_in, grad_params.subspan(offsets_[2 * b + 1],
                                                      LayerNumParams(2 * b + 1)));
    CheckFinite(g_in, 2 * b + 1, "gradient");
    norms_[b].Backward(tape.norms[b], LayerParams(2 * b), g_in, grad_log_det_sum, &g,
                       grad_params.subspan(offsets_[2 * b], LayerNumParams(2 * b)));
    CheckFinite(g, 2 * b, "gradient");
  }
  if (grad_x != nullptr) *grad_x = std::move(g);
}

void FlowModel::UpdateRunningStats(const FlowTape &tape) {
  if (tape.mode != FlowMode::kTraining)
    throw ValidationError("running statistics need a training-mode tape");
  for (int b = 0; b < NumBlocks(); ++b)
    norms_[b].UpdateRunningStats(tape.norms[b].mean, tape.norms[b].var);
}

double LogDetNumeric(const FlowModel &model, const Vector &x, double step) {
  if (!(step > 0.0)) throw ValidationError("finite-difference step must be positive");
  const int d = model.Dim();
  if (x.size() != d) throw DimensionError("point has the wrong dimension");
  // All 2D perturbed points go through the model as one batch.
  Matrix points(2 * d, d);
  for (int j = 0; j < d; ++j) {
    points.row(2 * j) = x.transpose();
    points.row(2 * j + 1) = x.transpose();
    points(2 * j, j) += step;
    points(2 * j + 1, j) -= step;
  }
  Matrix z = model.InverseBatch(points).z;
  Matrix jac(d, d);
  for (int j = 0; j < d; ++j)
    jac.col(j) = (z.row(2 * j) - z.row(2 * j + 1)).transpose() / (2.0 * step);
  Eigen::PartialPivLU<Matrix> lu(jac);
  const Matrix &packed = lu.matrixLU();
  double log_abs = 0.0;
  double sign = lu.permutationP().determinant();
  for (int i = 0; i < d; ++i) {
    double u = packed(i, i);
    if (u == 0.0 || !std::isfinite(u))
      throw NumericalError("numerical Jacobian is singular");
    if (u < 0.0) sign = -sign;
    log_abs += std::log(std::abs(u));
  }
  if (sign <= 0.0)
    throw NumericalError("numerical Jacobian determinant is not positive");
  return log_abs;
}

}  // namespace fdnf
