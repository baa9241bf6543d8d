// src/train/trainer.cc

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

#include "fdnf/train/trainer.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

namespace fdnf {

std::size_t NumTrainableParams(const FlowModel &model, const PriorSpec &spec) {
  return model.NumParams() + (spec.MeansTrainable() ? spec.NumMeanParams() : 0);
}

std::vector<double> GatherParams(const FlowModel &model, const PriorSpec &spec) {
  std::vector<double> packed(model.params().begin(), model.params().end());
  if (spec.MeansTrainable())
    packed.insert(packed.end(), spec.means().begin(), spec.means().end());
  return packed;
}

void ScatterParams(std::span<const double> packed, FlowModel *model, PriorSpec *spec) {
  if (packed.size() != NumTrainableParams(*model, *spec))
    throw DimensionError("packed parameter vector has the wrong size");
  auto flow = model->mutable_params();
  std::copy(packed.begin(), packed.begin() + flow.size(), flow.begin());
  if (spec->MeansTrainable()) {
    auto means = spec->mutable_means();
    std::copy(packed.begin() + flow.size(), packed.end(), means.begin());
  }
}

LossAndGrad NllAndGrad(const FlowModel &model, const PriorSpec &spec, const Matrix &x,
                       const LabelTable &labels, FlowMode mode, FlowTape *tape) {
  if (x.rows() < 1) throw ValidationError("empty batch");
  if (model.Dim() != spec.Dim()) throw DimensionError("model and prior dimensions differ");
  FlowTape local;
  FlowTape *t = tape != nullptr ? tape : &local;
  BatchInverseResult inv = model.InverseWithTape(x, mode, t);
  Vector log_prior = LogPriorBatch(spec, inv.z, labels);

  const double n = static_cast<double>(x.rows());
  LossAndGrad out;
  out.prior_term = log_prior.mean();
  out.entropy_term = inv.log_det.mean();
  out.nll = -(log_prior + inv.log_det).mean();
  if (!std::isfinite(out.nll)) throw NumericalError("non-finite loss", -1);

  // d(-mean log p)/dz_i = (z_i - mu_i) / N, d/d logdet_i = -1/N.
  Matrix grad_z = PriorResiduals(spec, inv.z, labels) / n;
  Vector grad_log_det = Vector::Constant(x.rows(), -1.0 / n);
  out.grad.assign(NumTrainableParams(model, spec), 0.0);
  model.Backward(*t, grad_z, grad_log_det,
                 std::span<double>(out.grad).first(model.NumParams()));
  if (spec.MeansTrainable()) {
    std::vector<double> gm = PriorGradMeans(spec, inv.z, labels);
    for (std::size_t k = 0; k < gm.size(); ++k) out.grad[model.NumParams() + k] = -gm[k] / n;
  }
  for (std::size_t k = 0; k < out.grad.size(); ++k) {
    if (std::isfinite(out.grad[k])) continue;
    if (k >= model.NumParams()) throw NumericalError("non-finite class-mean gradient", -1);
    int layer = 0;
    while (model.LayerParamOffset(layer + 1) <= k) ++layer;
    throw NumericalError("non-finite gradient in layer " + std::to_string(layer), layer);
  }
  return out;
}

EpochRecord EvaluateNll(const FlowModel &model, const PriorSpec &spec, const Matrix &x,
                        const LabelTable &labels) {
  if (x.rows() < 1) throw ValidationError("empty batch");
  BatchInverseResult inv = model.InverseBatch(x);
  Vector log_prior = LogPriorBatch(spec, inv.z, labels);
  EpochRecord r;
  r.prior_term = log_prior.mean();
  r.entropy_term = inv.log_det.mean();
  r.nll = -(log_prior + inv.log_det).mean();
  return r;
}

LabelTable PriorLabels(const PriorSpec &spec, const LabeledDataset &data) {
  if (spec.regime() == PriorRegime::kStandard) return {};
  LabelTable out;
  for (int f = 0; f < spec.NumFactors(); ++f) {
    const std::string &name = spec.partition().name(f);
    if (!data.HasFactor(name))
      throw ValidationError("dataset has no factor '" + name + "' required by the prior");
    int df = data.FactorIndex(name);
    if (data.factor(df).class_count > spec.class_count(f))
      throw ValidationError("factor '" + name + "' has more classes in the data (" +
                            std::to_string(data.factor(df).class_count) + ") than the prior (" +
                            std::to_string(spec.class_count(f)) + ")");
    out.push_back(data.labels(df));
  }
  return out;
}

std::vector<std::size_t> EpochPermutation(std::uint64_t seed, int epoch, std::size_t n) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  // Fisher-Yates with the engine's raw output; mt19937_64 output is fully
  // specified, so the order is the same on every platform.
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

namespace {

struct Snapshot {
  std::vector<double> params;
  std::vector<Vector> means, vars;
  std::vector<bool> initialized;
  AdamState adam;
};

Snapshot TakeSnapshot(const FlowModel &model, const PriorSpec &spec, const TrainState &state) {
  Snapshot s;
  s.params = GatherParams(model, spec);
  for (int b = 0; b < model.NumBlocks(); ++b) {
    s.means.push_back(model.batch_norm(b).running_mean());
    s.vars.push_back(model.batch_norm(b).running_var());
    s.initialized.push_back(model.batch_norm(b).stats_initialized());
  }
  s.adam = state.adam;
  return s;
}

void Restore(const Snapshot &s, FlowModel *model, PriorSpec *spec, TrainState *state) {
  ScatterParams(s.params, model, spec);
  for (int b = 0; b < model->NumBlocks(); ++b) {
    if (s.initialized[b])
      model->mutable_batch_norm(b).SetRunningStats(s.means[b], s.vars[b]);
    else
      model->mutable_batch_norm(b).ClearRunningStats();
  }
  state->adam = s.adam;
}

}  // namespace

std::vector<EpochRecord> Train(FlowModel *model, PriorSpec *spec, const LabeledDataset &data,
                               const TrainConfig &config, TrainState *state,
                               const TrainHooks &hooks) {
  config.Validate();
  if (data.Empty()) throw ValidationError("training set is empty");
  if (model->Dim() != data.Dim())
    throw ValidationError("model dimension " + std::to_string(model->Dim()) +
                          " does not match data dimension " + std::to_string(data.Dim()));
  if (spec->Dim() != model->Dim())
    throw ValidationError("prior partition does not sum to the data dimension");
  const LabelTable all_labels = PriorLabels(*spec, data);
  const std::size_t num_params = NumTrainableParams(*model, *spec);
  if (state->adam.m.size() != num_params) {
    if (state->adam.step != 0)
      throw ValidationError("optimizer state does not match the model");
    state->adam.Reset(num_params);
  }

  const std::size_t n = data.Size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t num_batches = n <= batch ? 1 : n / batch;
  const std::size_t rows_per_batch = n <= batch ? n : batch;
  const Matrix &features = data.features();

  for (int epoch = state->epochs_done; epoch < config.epochs; ++epoch) {
    auto start = std::chrono::steady_clock::now();
    Snapshot snapshot = TakeSnapshot(*model, *spec, *state);
    std::vector<std::size_t> perm = EpochPermutation(config.seed, epoch, n);
    double sum_nll = 0.0, sum_prior = 0.0, sum_entropy = 0.0;
    std::size_t seen = 0;

    Matrix xb(static_cast<Eigen::Index>(rows_per_batch), data.Dim());
    LabelTable lb(all_labels.size(), std::vector<int>(rows_per_batch));
    FlowTape tape;
    for (std::size_t b = 0; b < num_batches; ++b) {
      for (std::size_t k = 0; k < rows_per_batch; ++k) {
        std::size_t i = perm[b * rows_per_batch + k];
        xb.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(i));
        for (std::size_t f = 0; f < all_labels.size(); ++f) lb[f][k] = all_labels[f][i];
      }
      LossAndGrad lg;
      try {
        lg = NllAndGrad(*model, *spec, xb, lb, FlowMode::kTraining, &tape);
      } catch (const NumericalError &e) {
        Restore(snapshot, model, spec, state);
        throw TrainingDiverged("training diverged in epoch " + std::to_string(epoch + 1) +
                                   ", batch " + std::to_string(b) + ": " + e.what(),
                               e.layer(), epoch + 1);
      }
      model->UpdateRunningStats(tape);
      std::vector<double> packed = GatherParams(*model, *spec);
      AdamStep(config, &state->adam, packed, lg.grad);
      ScatterParams(packed, model, spec);

      const double w = static_cast<double>(rows_per_batch);
      sum_nll += lg.nll * w;
      sum_prior += lg.prior_term * w;
      sum_entropy += lg.entropy_term * w;
      seen += rows_per_batch;
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.nll = sum_nll / static_cast<double>(seen);
    rec.prior_term = sum_prior / static_cast<double>(seen);
    rec.entropy_term = sum_entropy / static_cast<double>(seen);
    state->history.push_back(rec);
    if (state->epochs_done == 0 || rec.nll < state->best_nll) state->best_nll = rec.nll;
    state->epochs_done = epoch + 1;

    if (hooks.log != nullptr) {
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      char line[256];
      std::snprintf(line, sizeof(line),
                    "epoch %d nll %.6f prior %.6f entropy %.6f time %.3fs\n", epoch + 1, rec.nll,
                    rec.prior_term, rec.entropy_term, secs);
      *hooks.log << line << std::flush;
    }
    if (hooks.on_checkpoint && config.checkpoint_every > 0 &&
        (epoch + 1) % config.checkpoint_every == 0)
      hooks.on_checkpoint(epoch + 1, *model, *spec, *state);
  }
  return state->history;
}

}  // namespace fdnf
