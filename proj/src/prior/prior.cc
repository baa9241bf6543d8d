// src/prior/prior.cc

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

#include "fdnf/prior/prior.h"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "fdnf/base/error.h"
#include "fdnf/flow/flow-model.h"

namespace fdnf {

namespace {
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
}

LatentPartition::LatentPartition(std::vector<std::string> names, std::vector<int> widths)
    : names_(std::move(names)), widths_(std::move(widths)) {
  if (names_.empty()) throw ValidationError("latent partition needs at least one factor");
  if (names_.size() != widths_.size())
    throw ValidationError("latent partition names and widths differ in length");
  std::set<std::string> seen;
  for (std::size_t f = 0; f < names_.size(); ++f) {
    if (names_[f].empty()) throw ValidationError("empty factor name");
    if (!seen.insert(names_[f]).second)
      throw ValidationError("duplicate factor name '" + names_[f] + "'");
    if (widths_[f] < 1)
      throw ValidationError("partial code width of '" + names_[f] + "' must be >= 1");
    offsets_.push_back(dim_);
    dim_ += widths_[f];
  }
}

LatentPartition LatentPartition::Equal(std::vector<std::string> names, int dim) {
  int k = static_cast<int>(names.size());
  if (k < 1 || dim < k) throw ValidationError("cannot split latent code evenly");
  std::vector<int> widths(k, dim / k);
  for (int f = 0; f < dim % k; ++f) ++widths[f];
  return LatentPartition(std::move(names), std::move(widths));
}

int LatentPartition::FindFactor(const std::string &name) const {
  for (int f = 0; f < NumFactors(); ++f)
    if (names_[f] == name) return f;
  return -1;
}

const char *RegimeName(PriorRegime regime) {
  switch (regime) {
    case PriorRegime::kStandard: return "standard";
    case PriorRegime::kDiscriminative: return "discriminative";
    case PriorRegime::kFactorial: return "factorial";
  }
  return "unknown";
}

PriorRegime ParseRegime(const std::string &name) {
  if (name == "standard" || name == "nf") return PriorRegime::kStandard;
  if (name == "discriminative" || name == "dnf") return PriorRegime::kDiscriminative;
  if (name == "factorial" || name == "fdnf" || name == "f-dnf") return PriorRegime::kFactorial;
  throw ValidationError("unknown prior regime '" + name + "'");
}

PriorSpec::PriorSpec(PriorRegime regime, LatentPartition partition,
                     std::vector<int> class_counts)
    : regime_(regime), partition_(std::move(partition)), class_counts_(std::move(class_counts)) {
  if (static_cast<int>(class_counts_.size()) != partition_.NumFactors())
    throw ValidationError("one class count per factor required");
  for (int c : class_counts_)
    if (c < 1) throw ValidationError("class counts must be positive");
  switch (regime_) {
    case PriorRegime::kStandard:
      if (partition_.NumFactors() != 1 || class_counts_[0] != 1)
        throw ValidationError("standard prior has exactly one factor with one class");
      break;
    case PriorRegime::kDiscriminative:
      if (partition_.NumFactors() != 1)
        throw ValidationError("discriminative prior has exactly one factor");
      break;
    case PriorRegime::kFactorial:
      break;
  }
  std::size_t total = 0;
  for (int f = 0; f < partition_.NumFactors(); ++f) {
    mean_offsets_.push_back(total);
    total += static_cast<std::size_t>(class_counts_[f]) * partition_.width(f);
  }
  means_.assign(total, 0.0);
}

PriorSpec PriorSpec::Standard(int dim) {
  return PriorSpec(PriorRegime::kStandard, LatentPartition({"all"}, {dim}), {1});
}

PriorSpec PriorSpec::Discriminative(int dim, const std::string &factor, int num_classes) {
  return PriorSpec(PriorRegime::kDiscriminative, LatentPartition({factor}, {dim}),
                   {num_classes});
}

PriorSpec PriorSpec::Factorial(LatentPartition partition, std::vector<int> class_counts) {
  return PriorSpec(PriorRegime::kFactorial, std::move(partition), std::move(class_counts));
}

Eigen::Map<const Vector> PriorSpec::Mean(int f, int y) const {
  return Eigen::Map<const Vector>(
      means_.data() + mean_offsets_[f] + static_cast<std::size_t>(y) * partition_.width(f),
      partition_.width(f));
}

Eigen::Map<Vector> PriorSpec::MutableMean(int f, int y) {
  return Eigen::Map<Vector>(
      means_.data() + mean_offsets_[f] + static_cast<std::size_t>(y) * partition_.width(f),
      partition_.width(f));
}

Vector PriorSpec::FullMean(std::span<const int> labels) const {
  CheckLabels(labels);
  Vector mean = Vector::Zero(Dim());
  if (regime_ == PriorRegime::kStandard) return mean;
  for (int f = 0; f < NumFactors(); ++f)
    mean.segment(partition_.offset(f), partition_.width(f)) = Mean(f, labels[f]);
  return mean;
}

void PriorSpec::InitMeans(std::uint64_t seed, double stddev) {
  if (!MeansTrainable()) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  for (double &m : means_) m = normal(rng);
}

void PriorSpec::CheckLabels(std::span<const int> labels) const {
  if (regime_ == PriorRegime::kStandard && labels.empty()) return;
  if (static_cast<int>(labels.size()) != NumFactors())
    throw ValidationError("expected " + std::to_string(NumFactors()) + " labels, got " +
                          std::to_string(labels.size()));
  for (int f = 0; f < NumFactors(); ++f)
    if (labels[f] < 0 || labels[f] >= class_counts_[f])
      throw LabelRangeError("label " + std::to_string(labels[f]) + " out of range for factor '" +
                                partition_.name(f) + "'",
                            0);
}

double LogPriorPartial(const PriorSpec &spec, const Vector &z, int factor, int label) {
  if (z.size() != spec.Dim()) throw DimensionError("latent code has the wrong dimension");
  if (factor < 0 || factor >= spec.NumFactors()) throw ValidationError("factor out of range");
  if (label < 0 || label >= spec.class_count(factor))
    throw LabelRangeError("label out of range", 0);
  const int w = spec.partition().width(factor);
  double sq = (spec.partition().Slice(z, factor) - spec.Mean(factor, label)).squaredNorm();
  return -0.5 * w * kLog2Pi - 0.5 * sq;
}

double LogPrior(const PriorSpec &spec, const Vector &z, std::span<const int> labels) {
  if (z.size() != spec.Dim()) throw DimensionError("latent code has the wrong dimension");
  spec.CheckLabels(labels);
  if (spec.regime() == PriorRegime::kStandard)
    return -0.5 * spec.Dim() * kLog2Pi - 0.5 * z.squaredNorm();
  double total = 0.0;
  for (int f = 0; f < spec.NumFactors(); ++f)
    total += LogPriorPartial(spec, z, f, labels[f]);
  return total;
}

namespace {

void CheckBatchLabels(const PriorSpec &spec, const Matrix &z, const LabelTable &labels) {
  if (z.cols() != spec.Dim()) throw DimensionError("latent codes have the wrong dimension");
  if (spec.regime() == PriorRegime::kStandard && labels.empty()) return;
  if (static_cast<int>(labels.size()) != spec.NumFactors())
    throw ValidationError("label table has the wrong number of factors");
  for (int f = 0; f < spec.NumFactors(); ++f) {
    if (static_cast<Eigen::Index>(labels[f].size()) != z.rows())
      throw DimensionError("label column length does not match batch size");
    for (std::size_t i = 0; i < labels[f].size(); ++i)
      if (labels[f][i] < 0 || labels[f][i] >= spec.class_count(f))
        throw LabelRangeError("label out of range for factor '" + spec.partition().name(f) +
                                  "' at row " + std::to_string(i),
                              i);
  }
}

// Row-wise z minus the selected prior mean.
Matrix Residuals(const PriorSpec &spec, const Matrix &z, const LabelTable &labels) {
  if (spec.regime() == PriorRegime::kStandard) return z;
  Matrix r = z;
  for (int f = 0; f < spec.NumFactors(); ++f) {
    const int off = spec.partition().offset(f), w = spec.partition().width(f);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      r.row(i).segment(off, w) -= spec.Mean(f, labels[f][i]).transpose();
  }
  return r;
}

}  // namespace

Matrix PriorResiduals(const PriorSpec &spec, const Matrix &z, const LabelTable &labels) {
  CheckBatchLabels(spec, z, labels);
  return Residuals(spec, z, labels);
}

Vector LogPriorBatch(const PriorSpec &spec, const Matrix &z, const LabelTable &labels) {
  CheckBatchLabels(spec, z, labels);
  Matrix r = Residuals(spec, z, labels);
  return (-0.5 * spec.Dim() * kLog2Pi - 0.5 * r.rowwise().squaredNorm().array()).matrix();
}

LogLikelihood ComputeLogLikelihood(const FlowModel &model, const PriorSpec &spec,
                                   const Vector &x, std::span<const int> labels) {
  if (model.Dim() != spec.Dim())
    throw DimensionError("model and prior dimensions differ");
  InverseResult inv = model.Inverse(x);
  LogLikelihood out;
  out.prior = LogPrior(spec, inv.z, labels);
  out.log_det = inv.log_det;
  out.total = out.prior + out.log_det;
  return out;
}

std::vector<double> PriorGradMeans(const PriorSpec &spec, const Matrix &z,
                                   const LabelTable &labels) {
  if (z.rows() < 1) throw ValidationError("empty batch");
  CheckBatchLabels(spec, z, labels);
  std::vector<double> grad(spec.NumMeanParams(), 0.0);
  if (spec.regime() == PriorRegime::kStandard) return grad;
  Matrix r = Residuals(spec, z, labels);
  for (int f = 0; f < spec.NumFactors(); ++f) {
    const int off = spec.partition().offset(f), w = spec.partition().width(f);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      double *g = grad.data() + spec.MeanOffset(f) + static_cast<std::size_t>(labels[f][i]) * w;
      for (int d = 0; d < w; ++d) g[d] += r(i, off + d);
    }
  }
  return grad;
}

}  // namespace fdnf
