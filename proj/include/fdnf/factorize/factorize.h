// include/fdnf/factorize/factorize.h

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

#ifndef FDNF_FACTORIZE_FACTORIZE_H_
#define FDNF_FACTORIZE_FACTORIZE_H_

#include <string>
#include <vector>

#include "fdnf/base/common.h"
#include "fdnf/data/dataset.h"
#include "fdnf/flow/flow-model.h"
#include "fdnf/prior/prior.h"

namespace fdnf {

struct EncodedSample {
  Vector z;
  std::vector<Vector> partial;  // one slice per partition factor
};

/// z = f^-1(x), sliced by the partition.
EncodedSample Encode(const FlowModel &model, const LatentPartition &partition, const Vector &x);

/// Row-wise f^-1. Rows are processed in fixed-size chunks spread over the
/// worker threads, so the result does not depend on the thread count.
Matrix EncodeBatch(const FlowModel &model, const Matrix &x);
/// Row-wise f, chunked like EncodeBatch().
Matrix DecodeBatch(const FlowModel &model, const Matrix &z);

/// Per-class means of encoded codes for one factor. For a factorial model
/// whose partition contains the factor, the means cover that factor's
/// partial code; otherwise they cover the whole code.
struct ClassMeanTable {
  std::string factor;
  int offset = 0;  // first latent index covered
  int width = 0;   // number of latent dims covered
  int dim = 0;     // full latent dimension
  Matrix means;    // num_classes x width; rows of empty classes are zero
  std::vector<std::size_t> counts;

  int NumClasses() const { return static_cast<int>(counts.size()); }
  bool IsPartial() const { return width < dim; }
  bool HasClass(int c) const { return c >= 0 && c < NumClasses() && counts[c] > 0; }
  std::vector<int> EmptyClasses() const;
};

/// Arithmetic mean of codes.middleCols(offset, width) per class.
ClassMeanTable ClassMeansFromCodes(const Matrix &codes, const std::vector<int> &labels,
                                   int num_classes, const std::string &factor, int offset,
                                   int width);

/// Encodes `data` and averages per class of `factor`.
ClassMeanTable ClassMeans(const FlowModel &model, const PriorSpec &spec,
                          const LabeledDataset &data, const std::string &factor);

/// The learned prior means of `factor` in table form (counts all 1), for
/// comparison with the empirical table.
ClassMeanTable PriorMeanTable(const PriorSpec &spec, const std::string &factor);

/// Full-dimensional shift mu_{c2} - mu_{c1}, zero outside the table's slice.
Vector ShiftVector(const ClassMeanTable &table, int from_class, int to_class);

/// z + shift. The entries outside the table's slice are copied untouched.
Vector ManipulateLatent(const ClassMeanTable &table, const Vector &z, int from_class,
                        int to_class);

/// x' = f(f^-1(x) + mu_{c2} - mu_{c1}).
Vector Manipulate(const FlowModel &model, const ClassMeanTable &table, const Vector &x,
                  int from_class, int to_class);
Matrix ManipulateBatch(const FlowModel &model, const ClassMeanTable &table, const Matrix &x,
                       int from_class, int to_class);

/// Latent code file:
///   # fdnf-codes v1; regime=<name>; partition=<name:width,...>[; config=<hex>]
///   id,<label column per factor>,z_0,...,z_{D-1}
///   one row per sample, numbers with 17 significant digits
struct CodeFile {
  std::string regime;
  LatentPartition partition;
  std::vector<std::string> factor_names;
  std::vector<std::string> ids;
  LabelTable labels;
  Matrix codes;
  std::string config_hash;
};

void ExportCodes(const FlowModel &model, const PriorSpec &spec, const LabeledDataset &data,
                 const std::string &path, const std::string &config_hash = "");
void WriteCodeFile(const CodeFile &codes, const std::string &path);
CodeFile ReadCodeFile(const std::string &path);

}  // namespace fdnf

#endif  // FDNF_FACTORIZE_FACTORIZE_H_
