// src/factorize/factorize.cc

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

#include "fdnf/factorize/factorize.h"

#include <fstream>
#include <sstream>

#include "fdnf/base/error.h"

namespace fdnf {

namespace {

constexpr Eigen::Index kChunkRows = 256;

// Applies fn to fixed-size row chunks of x. fn must map a chunk to a
// matrix with the same number of rows.
template <typename Fn>
Matrix ChunkedRows(const Matrix &x, int out_cols, const Fn &fn) {
  Matrix out(x.rows(), out_cols);
  const std::size_t num_chunks =
      static_cast<std::size_t>((x.rows() + kChunkRows - 1) / kChunkRows);
  ParallelFor(num_chunks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      Eigen::Index r0 = static_cast<Eigen::Index>(c) * kChunkRows;
      Eigen::Index rows = std::min(kChunkRows, x.rows() - r0);
      out.middleRows(r0, rows) = fn(Matrix(x.middleRows(r0, rows)));
    }
  });
  return out;
}

}  // namespace

EncodedSample Encode(const FlowModel &model, const LatentPartition &partition, const Vector &x) {
  if (partition.Dim() != model.Dim())
    throw DimensionError("partition does not match model dimension");
  EncodedSample out;
  out.z = model.Inverse(x).z;
  for (int f = 0; f < partition.NumFactors(); ++f)
    out.partial.push_back(partition.Slice(out.z, f));
  return out;
}

Matrix EncodeBatch(const FlowModel &model, const Matrix &x) {
  if (x.cols() != model.Dim()) throw DimensionError("input has the wrong dimension");
  return ChunkedRows(x, model.Dim(), [&](const Matrix &chunk) {
    return model.InverseBatch(chunk).z;
  });
}

Matrix DecodeBatch(const FlowModel &model, const Matrix &z) {
  if (z.cols() != model.Dim()) throw DimensionError("input has the wrong dimension");
  return ChunkedRows(z, model.Dim(), [&](const Matrix &chunk) {
    return model.ForwardBatch(chunk);
  });
}

std::vector<int> ClassMeanTable::EmptyClasses() const {
  std::vector<int> out;
  for (int c = 0; c < NumClasses(); ++c)
    if (counts[c] == 0) out.push_back(c);
  return out;
}

ClassMeanTable ClassMeansFromCodes(const Matrix &codes, const std::vector<int> &labels,
                                   int num_classes, const std::string &factor, int offset,
                                   int width) {
  if (static_cast<Eigen::Index>(labels.size()) != codes.rows())
    throw DimensionError("labels and codes differ in length");
  if (offset < 0 || width < 1 || offset + width > codes.cols())
    throw DimensionError("mean slice lies outside the code");
  ClassMeanTable t;
  t.factor = factor;
  t.offset = offset;
  t.width = width;
  t.dim = static_cast<int>(codes.cols());
  t.means = Matrix::Zero(num_classes, width);
  t.counts.assign(num_classes, 0);
  for (Eigen::Index i = 0; i < codes.rows(); ++i) {
    int y = labels[i];
    if (y < 0 || y >= num_classes)
      throw LabelRangeError("label out of range at row " + std::to_string(i),
                            static_cast<std::size_t>(i));
    t.means.row(y) += codes.row(i).segment(offset, width);
    ++t.counts[y];
  }
  for (int c = 0; c < num_classes; ++c)
    if (t.counts[c] > 0) t.means.row(c) /= static_cast<double>(t.counts[c]);
  return t;
}

ClassMeanTable ClassMeans(const FlowModel &model, const PriorSpec &spec,
                          const LabeledDataset &data, const std::string &factor) {
  if (model.Dim() != spec.Dim()) throw DimensionError("model and prior dimensions differ");
  if (data.Dim() != model.Dim()) throw DimensionError("dataset does not match model dimension");
  const int df = data.FactorIndex(factor);
  int offset = 0, width = model.Dim();
  const int pf = spec.partition().FindFactor(factor);
  if (spec.regime() == PriorRegime::kFactorial && pf >= 0) {
    offset = spec.partition().offset(pf);
    width = spec.partition().width(pf);
  }
  Matrix codes = EncodeBatch(model, data.features());
  return ClassMeansFromCodes(codes, data.labels(df), data.factor(df).class_count, factor, offset,
                             width);
}

ClassMeanTable PriorMeanTable(const PriorSpec &spec, const std::string &factor) {
  const int pf = spec.partition().FindFactor(factor);
  if (pf < 0 || spec.regime() == PriorRegime::kStandard)
    throw ValidationError("prior has no class means for factor '" + factor + "'");
  ClassMeanTable t;
  t.factor = factor;
  t.offset = spec.partition().offset(pf);
  t.width = spec.partition().width(pf);
  t.dim = spec.Dim();
  t.means.resize(spec.class_count(pf), t.width);
  for (int c = 0; c < spec.class_count(pf); ++c) t.means.row(c) = spec.Mean(pf, c).transpose();
  t.counts.assign(spec.class_count(pf), 1);
  return t;
}

Vector ShiftVector(const ClassMeanTable &table, int from_class, int to_class) {
  if (!table.HasClass(from_class) || !table.HasClass(to_class))
    throw ValidationError("class " + std::to_string(table.HasClass(from_class) ? to_class
                                                                              : from_class) +
                          " of factor '" + table.factor + "' has no mean");
  Vector shift = Vector::Zero(table.dim);
  shift.segment(table.offset, table.width) =
      (table.means.row(to_class) - table.means.row(from_class)).transpose();
  return shift;
}

Vector ManipulateLatent(const ClassMeanTable &table, const Vector &z, int from_class,
                        int to_class) {
  if (z.size() != table.dim) throw DimensionError("code has the wrong dimension");
  Vector shift = ShiftVector(table, from_class, to_class);
  Vector out = z;
  out.segment(table.offset, table.width) += shift.segment(table.offset, table.width);
  return out;
}

Vector Manipulate(const FlowModel &model, const ClassMeanTable &table, const Vector &x,
                  int from_class, int to_class) {
  if (table.dim != model.Dim()) throw DimensionError("mean table does not match model");
  Vector z = model.Inverse(x).z;
  return model.Forward(ManipulateLatent(table, z, from_class, to_class));
}

Matrix ManipulateBatch(const FlowModel &model, const ClassMeanTable &table, const Matrix &x,
                       int from_class, int to_class) {
  if (table.dim != model.Dim()) throw DimensionError("mean table does not match model");
  Vector shift = ShiftVector(table, from_class, to_class);
  return ChunkedRows(x, model.Dim(), [&](const Matrix &chunk) {
    Matrix z = model.InverseBatch(chunk).z;
    z.middleCols(table.offset, table.width).rowwise() +=
        shift.segment(table.offset, table.width).transpose();
    return model.ForwardBatch(z);
  });
}

namespace {

const char kCodeMagic[] = "# fdnf-codes v1";

std::string PartitionString(const LatentPartition &p) {
  std::string s;
  for (int f = 0; f < p.NumFactors(); ++f) {
    if (f > 0) s += ",";
    s += p.name(f) + ":" + std::to_string(p.width(f));
  }
  return s;
}

}  // namespace

void ExportCodes(const FlowModel &model, const PriorSpec &spec, const LabeledDataset &data,
                 const std::string &path, const std::string &config_hash) {
  if (model.Dim() != spec.Dim()) throw DimensionError("model and prior dimensions differ");
  CodeFile out;
  out.regime = RegimeName(spec.regime());
  out.partition = spec.partition();
  for (const auto &f : data.factors()) out.factor_names.push_back(f.name);
  out.ids = data.ids();
  out.labels = data.labels();
  out.codes = data.Empty() ? Matrix(0, model.Dim()) : EncodeBatch(model, data.features());
  out.config_hash = config_hash;
  WriteCodeFile(out, path);
}

void WriteCodeFile(const CodeFile &codes, const std::string &path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << kCodeMagic << "; regime=" << codes.regime
     << "; partition=" << PartitionString(codes.partition);
  if (!codes.config_hash.empty()) os << "; config=" << codes.config_hash;
  os << '\n';
  std::string line = "id";
  for (const auto &n : codes.factor_names) line += "," + n;
  for (Eigen::Index d = 0; d < codes.codes.cols(); ++d) line += ",z_" + std::to_string(d);
  os << line << '\n';
  for (std::size_t i = 0; i < codes.ids.size(); ++i) {
    line = codes.ids[i];
    for (const auto &col : codes.labels) line += "," + std::to_string(col[i]);
    for (Eigen::Index d = 0; d < codes.codes.cols(); ++d)
      line += "," + FormatDouble(codes.codes(static_cast<Eigen::Index>(i), d));
    os << line << '\n';
  }
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

CodeFile ReadCodeFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  CodeFile out;
  std::string line;
  if (!std::getline(is, line) || line.rfind(kCodeMagic, 0) != 0)
    throw HeaderError("not a fdnf-codes v1 file");
  for (const auto &field : SplitString(line, ';')) {
    std::string f = Trim(field);
    auto eq = f.find('=');
    if (eq == std::string::npos) continue;
    std::string key = f.substr(0, eq), value = f.substr(eq + 1);
    if (key == "regime") {
      out.regime = value;
    } else if (key == "config") {
      out.config_hash = value;
    } else if (key == "partition") {
      std::vector<std::string> names;
      std::vector<int> widths;
      for (const auto &item : SplitString(value, ',')) {
        auto colon = item.rfind(':');
        if (colon == std::string::npos) throw HeaderError("malformed partition '" + value + "'");
        names.push_back(item.substr(0, colon));
        widths.push_back(static_cast<int>(ParseInt(item.substr(colon + 1))));
      }
      out.partition = LatentPartition(names, widths);
    }
  }
  if (!std::getline(is, line)) throw HeaderError("code file lacks a header row");
  auto cols = SplitString(line, ',');
  if (cols.empty() || cols[0] != "id") throw HeaderError("code header must start with 'id'");
  std::size_t k = 1;
  while (k < cols.size() && cols[k].rfind("z_", 0) != 0) out.factor_names.push_back(cols[k++]);
  const std::size_t dim = cols.size() - k;
  if (dim != static_cast<std::size_t>(out.partition.Dim()))
    throw HeaderError("code columns do not match the partition");
  out.labels.assign(out.factor_names.size(), {});
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (Trim(line).empty()) continue;
    auto fields = SplitString(line, ',');
    if (fields.size() != cols.size())
      throw RaggedRowError("code row " + std::to_string(row) + " has the wrong field count", row);
    out.ids.push_back(fields[0]);
    for (std::size_t f = 0; f < out.factor_names.size(); ++f)
      out.labels[f].push_back(static_cast<int>(ParseInt(fields[1 + f])));
    for (std::size_t d = 0; d < dim; ++d) values.push_back(ParseDouble(fields[k + d]));
    ++row;
  }
  out.codes.resize(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < row; ++i)
    for (std::size_t d = 0; d < dim; ++d) out.codes(i, d) = values[i * dim + d];
  return out;
}

}  // namespace fdnf
