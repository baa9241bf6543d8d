// include/fdnf/prior/prior.h

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

#ifndef FDNF_PRIOR_PRIOR_H_
#define FDNF_PRIOR_PRIOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fdnf/base/common.h"

namespace fdnf {

class FlowModel;

/// Splits a D-dim latent code into contiguous partial codes, one per
/// factor, in declaration order.
class LatentPartition {
 public:
  LatentPartition() = default;
  /// Throws ValidationError on empty/duplicate names or widths < 1.
  LatentPartition(std::vector<std::string> names, std::vector<int> widths);
  /// D dims split as evenly as possible; earlier factors get the remainder.
  static LatentPartition Equal(std::vector<std::string> names, int dim);

  int Dim() const { return dim_; }
  int NumFactors() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string> &names() const { return names_; }
  const std::string &name(int f) const { return names_[f]; }
  int width(int f) const { return widths_[f]; }
  int offset(int f) const { return offsets_[f]; }
  /// Index of the named factor, or -1.
  int FindFactor(const std::string &name) const;

  template <typename Vec>
  auto Slice(const Vec &z, int f) const {
    return z.segment(offsets_[f], widths_[f]);
  }

  bool operator==(const LatentPartition &other) const {
    return names_ == other.names_ && widths_ == other.widths_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<int> widths_;
  std::vector<int> offsets_;
  int dim_ = 0;
};

enum class PriorRegime { kStandard = 0, kDiscriminative = 1, kFactorial = 2 };

const char *RegimeName(PriorRegime regime);
/// Accepts "standard", "discriminative", "factorial" (and nf, dnf, fdnf).
PriorRegime ParseRegime(const std::string &name);

/// Latent prior. Every regime is a product over the partition's factors of
/// N(z^f; mu_{f, label_f}, I):
///   standard        one factor covering all of z, one class with mean 0
///   discriminative  one factor covering all of z, one mean per class
///   factorial       several factors, each with its own class means
/// Means are stored flat: factor f's table starts at MeanOffset(f) and is
/// class-major (class y occupies width(f) consecutive values).
class PriorSpec {
 public:
  PriorSpec() = default;
  PriorSpec(PriorRegime regime, LatentPartition partition, std::vector<int> class_counts);

  static PriorSpec Standard(int dim);
  static PriorSpec Discriminative(int dim, const std::string &factor, int num_classes);
  static PriorSpec Factorial(LatentPartition partition, std::vector<int> class_counts);

  PriorRegime regime() const { return regime_; }
  const LatentPartition &partition() const { return partition_; }
  int Dim() const { return partition_.Dim(); }
  int NumFactors() const { return partition_.NumFactors(); }
  int class_count(int f) const { return class_counts_[f]; }
  const std::vector<int> &class_counts() const { return class_counts_; }
  /// Whether the optimizer updates the means (false for the standard prior).
  bool MeansTrainable() const { return regime_ != PriorRegime::kStandard; }

  std::size_t NumMeanParams() const { return means_.size(); }
  std::size_t MeanOffset(int f) const { return mean_offsets_[f]; }
  std::span<const double> means() const { return means_; }
  std::span<double> mutable_means() { return means_; }
  Eigen::Map<const Vector> Mean(int f, int y) const;
  Eigen::Map<Vector> MutableMean(int f, int y);

  /// Full prior mean for one label per factor: the concatenation of the
  /// selected partial means.
  Vector FullMean(std::span<const int> labels) const;

  /// Means i.i.d. N(0, stddev^2). No-op for the standard regime.
  void InitMeans(std::uint64_t seed, double stddev);

  /// Throws LabelRangeError/ValidationError for a bad label vector. The
  /// standard regime accepts an empty vector.
  void CheckLabels(std::span<const int> labels) const;

 private:
  PriorRegime regime_ = PriorRegime::kStandard;
  LatentPartition partition_;
  std::vector<int> class_counts_;
  std::vector<std::size_t> mean_offsets_;
  std::vector<double> means_;
};

/// log N(z^f; mu_{f,label}, I) for one factor's partial code.
double LogPriorPartial(const PriorSpec &spec, const Vector &z, int factor, int label);

/// Sum over factors of the partial log-densities. `labels` has one class id
/// per factor; it may be empty for the standard regime.
double LogPrior(const PriorSpec &spec, const Vector &z, std::span<const int> labels);

/// Per-row log prior of a batch. labels is [factor][row].
Vector LogPriorBatch(const PriorSpec &spec, const Matrix &z, const LabelTable &labels);

struct LogLikelihood {
  double total = 0.0;
  double prior = 0.0;    // log N(f^-1(x); mu, I)
  double log_det = 0.0;  // log|det d f^-1 / dx|
};

/// log p(x) = log prior(f^-1(x)) + log|det d f^-1(x) / dx|. Inference mode.
LogLikelihood ComputeLogLikelihood(const FlowModel &model, const PriorSpec &spec,
                                   const Vector &x, std::span<const int> labels);

/// Row-wise z minus the prior mean selected by each row's labels. The
/// gradient of -log prior w.r.t. z.
Matrix PriorResiduals(const PriorSpec &spec, const Matrix &z, const LabelTable &labels);

/// Gradient of the summed log prior w.r.t. every class mean: for class y
/// of factor f, sum over rows labelled y of (z^f - mu_{f,y}). Same flat
/// layout as PriorSpec::means().
std::vector<double> PriorGradMeans(const PriorSpec &spec, const Matrix &z,
                                   const LabelTable &labels);

}  // namespace fdnf

#endif  // FDNF_PRIOR_PRIOR_H_
