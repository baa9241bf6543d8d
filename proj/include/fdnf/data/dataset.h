// include/fdnf/data/dataset.h

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

#ifndef FDNF_DATA_DATASET_H_
#define FDNF_DATA_DATASET_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fdnf/base/common.h"

namespace fdnf {

struct FactorInfo {
  std::string name;
  int class_count = 0;

  bool operator==(const FactorInfo &) const = default;
};

/// N labelled feature vectors. Every sample carries one class id per
/// factor. Immutable once built.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  /// Validates shapes, label ranges and finiteness; throws ValidationError,
  /// LabelRangeError or FormatError.
  LabeledDataset(std::vector<FactorInfo> factors, std::vector<std::string> ids,
                 Matrix features, LabelTable labels);

  std::size_t Size() const { return ids_.size(); }
  bool Empty() const { return ids_.empty(); }
  int Dim() const { return static_cast<int>(features_.cols()); }
  int NumFactors() const { return static_cast<int>(factors_.size()); }

  const std::vector<FactorInfo> &factors() const { return factors_; }
  const FactorInfo &factor(int f) const { return factors_[f]; }
  /// Index of the named factor; throws ValidationError if absent.
  int FactorIndex(const std::string &name) const;
  bool HasFactor(const std::string &name) const;

  const std::vector<std::string> &ids() const { return ids_; }
  const Matrix &features() const { return features_; }
  const LabelTable &labels() const { return labels_; }
  const std::vector<int> &labels(int f) const { return labels_[f]; }
  int label(int f, std::size_t i) const { return labels_[f][i]; }
  /// All factor labels of sample i, in factor order.
  std::vector<int> SampleLabels(std::size_t i) const;

  /// Label columns for the named factors, in the given order.
  LabelTable SelectLabels(const std::vector<std::string> &names) const;

  LabeledDataset Subset(std::span<const std::size_t> rows) const;
  std::vector<std::size_t> ClassHistogram(int f) const;

 private:
  std::vector<FactorInfo> factors_;
  std::vector<std::string> ids_;
  Matrix features_;
  LabelTable labels_;
};

enum class DatasetEncoding { kText, kBinary };

/// Dataset file:
///   factorial-dataset v1; D=<int>; factors=<name:count,...>[; encoding=binary][; config=<hex>]
/// Text body: one sample per line, "id,label_1,...,label_F,x_0,...,x_{D-1}",
/// numbers printed with 17 significant digits.
/// Binary body: u64 N, then per sample: u32 id length, id bytes, F x i32
/// labels, D x f64 features; all little-endian.
void SaveDataset(const LabeledDataset &data, const std::string &path,
                 DatasetEncoding encoding = DatasetEncoding::kText,
                 const std::string &config_hash = "");
/// Throws IoError, HeaderError, RaggedRowError or LabelRangeError.
LabeledDataset LoadDataset(const std::string &path);
/// The config hash recorded in a dataset header, or "" if none.
std::string ReadDatasetConfigHash(const std::string &path);

}  // namespace fdnf

#endif  // FDNF_DATA_DATASET_H_
