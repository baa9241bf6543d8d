// src/data/dataset.cc

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

#include "fdnf/data/dataset.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fdnf/base/binary-io.h"
#include "fdnf/base/error.h"

namespace fdnf {

LabeledDataset::LabeledDataset(std::vector<FactorInfo> factors, std::vector<std::string> ids,
                               Matrix features, LabelTable labels)
    : factors_(std::move(factors)), ids_(std::move(ids)), features_(std::move(features)),
      labels_(std::move(labels)) {
  if (factors_.empty()) throw ValidationError("dataset needs at least one factor");
  std::set<std::string> names;
  for (const auto &f : factors_) {
    if (f.name.empty()) throw ValidationError("empty factor name");
    if (f.name.find_first_of(":,;= \t") != std::string::npos)
      throw ValidationError("factor name '" + f.name + "' contains a reserved character");
    if (!names.insert(f.name).second)
      throw ValidationError("duplicate factor name '" + f.name + "'");
    if (f.class_count < 1)
      throw ValidationError("factor '" + f.name + "' must have at least one class");
  }
  if (static_cast<std::size_t>(features_.rows()) != ids_.size())
    throw ValidationError("feature rows and ids differ in count");
  if (features_.cols() < 1) throw ValidationError("feature dimension must be positive");
  if (labels_.size() != factors_.size())
    throw ValidationError("one label column per factor required");
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    if (labels_[f].size() != ids_.size())
      throw ValidationError("label column length does not match sample count");
    for (std::size_t i = 0; i < ids_.size(); ++i)
      if (labels_[f][i] < 0 || labels_[f][i] >= factors_[f].class_count)
        throw LabelRangeError("label out of range for factor '" + factors_[f].name +
                                  "' at row " + std::to_string(i),
                              i);
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty() || ids_[i].find_first_of(",\n\r") != std::string::npos)
      throw ValidationError("invalid sample id at row " + std::to_string(i));
    if (!features_.row(static_cast<Eigen::Index>(i)).allFinite())
      throw FormatError("non-finite feature at row " + std::to_string(i));
  }
}

int LabeledDataset::FactorIndex(const std::string &name) const {
  for (int f = 0; f < NumFactors(); ++f)
    if (factors_[f].name == name) return f;
  throw ValidationError("dataset has no factor named '" + name + "'");
}

bool LabeledDataset::HasFactor(const std::string &name) const {
  for (const auto &f : factors_)
    if (f.name == name) return true;
  return false;
}

std::vector<int> LabeledDataset::SampleLabels(std::size_t i) const {
  std::vector<int> out;
  for (const auto &col : labels_) out.push_back(col[i]);
  return out;
}

LabelTable LabeledDataset::SelectLabels(const std::vector<std::string> &names) const {
  LabelTable out;
  for (const auto &n : names) out.push_back(labels_[FactorIndex(n)]);
  return out;
}

LabeledDataset LabeledDataset::Subset(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  Matrix features(static_cast<Eigen::Index>(rows.size()), features_.cols());
  LabelTable labels(labels_.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::size_t i = rows[k];
    if (i >= Size()) throw ValidationError("subset row out of range");
    ids.push_back(ids_[i]);
    features.row(static_cast<Eigen::Index>(k)) = features_.row(static_cast<Eigen::Index>(i));
    for (std::size_t f = 0; f < labels_.size(); ++f) labels[f].push_back(labels_[f][i]);
  }
  return LabeledDataset(factors_, std::move(ids), std::move(features), std::move(labels));
}

std::vector<std::size_t> LabeledDataset::ClassHistogram(int f) const {
  std::vector<std::size_t> hist(factors_[f].class_count, 0);
  for (int y : labels_[f]) ++hist[y];
  return hist;
}

namespace {

const char kMagic[] = "factorial-dataset v1";

struct Header {
  int dim = 0;
  std::vector<FactorInfo> factors;
  bool binary = false;
  std::string config_hash;
};

std::string FormatHeader(const LabeledDataset &data, DatasetEncoding encoding,
                         const std::string &config_hash) {
  std::string h = std::string(kMagic) + "; D=" + std::to_string(data.Dim()) + "; factors=";
  for (int f = 0; f < data.NumFactors(); ++f) {
    if (f > 0) h += ",";
    h += data.factor(f).name + ":" + std::to_string(data.factor(f).class_count);
  }
  if (encoding == DatasetEncoding::kBinary) h += "; encoding=binary";
  if (!config_hash.empty()) h += "; config=" + config_hash;
  return h;
}

Header ParseHeader(const std::string &line) {
  auto parts = SplitString(line, ';');
  if (Trim(parts[0]) != kMagic)
    throw HeaderError("not a factorial-dataset v1 file (header '" + line + "')");
  Header h;
  bool have_dim = false, have_factors = false;
  for (std::size_t k = 1; k < parts.size(); ++k) {
    std::string field = Trim(parts[k]);
    auto eq = field.find('=');
    if (eq == std::string::npos) throw HeaderError("malformed header field '" + field + "'");
    std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    try {
      if (key == "D") {
        long long d = ParseInt(value);
        if (d < 1 || d > (1 << 24)) throw HeaderError("bad dimension " + value);
        h.dim = static_cast<int>(d);
        have_dim = true;
      } else if (key == "factors") {
        for (const auto &item : SplitString(value, ',')) {
          auto colon = item.rfind(':');
          if (colon == std::string::npos) throw HeaderError("malformed factor '" + item + "'");
          FactorInfo fi{Trim(item.substr(0, colon)),
                        static_cast<int>(ParseInt(item.substr(colon + 1)))};
          if (fi.name.empty() || fi.class_count < 1)
            throw HeaderError("malformed factor '" + item + "'");
          h.factors.push_back(fi);
        }
        have_factors = true;
      } else if (key == "encoding") {
        if (value == "binary") h.binary = true;
        else if (value != "text") throw HeaderError("unknown encoding '" + value + "'");
      } else if (key == "config") {
        h.config_hash = value;
      } else {
        throw HeaderError("unknown header field '" + key + "'");
      }
    } catch (const HeaderError &) {
      throw;
    } catch (const FormatError &e) {
      throw HeaderError(std::string("malformed header: ") + e.what());
    }
  }
  if (!have_dim || !have_factors) throw HeaderError("header lacks D= or factors=");
  return h;
}

LabeledDataset ReadTextBody(std::istream &is, const Header &h) {
  const std::size_t num_factors = h.factors.size();
  const std::size_t expected = 1 + num_factors + static_cast<std::size_t>(h.dim);
  std::vector<std::string> ids;
  std::vector<double> values;
  LabelTable labels(num_factors);
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    auto fields = SplitString(line, ',');
    if (fields.size() != expected)
      throw RaggedRowError("row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(expected),
                           row);
    ids.push_back(Trim(fields[0]));
    for (std::size_t f = 0; f < num_factors; ++f) {
      long long y = ParseInt(fields[1 + f]);
      if (y < 0 || y >= h.factors[f].class_count)
        throw LabelRangeError("label out of range for factor '" + h.factors[f].name +
                                  "' at row " + std::to_string(row),
                              row);
      labels[f].push_back(static_cast<int>(y));
    }
    for (int d = 0; d < h.dim; ++d) values.push_back(ParseDouble(fields[1 + num_factors + d]));
    ++row;
  }
  Matrix features(static_cast<Eigen::Index>(row), h.dim);
  for (std::size_t i = 0; i < row; ++i)
    for (int d = 0; d < h.dim; ++d) features(i, d) = values[i * h.dim + d];
  return LabeledDataset(h.factors, std::move(ids), std::move(features), std::move(labels));
}

LabeledDataset ReadBinaryBody(std::istream &is, const Header &h) {
  const std::uint64_t n = ReadU64(is);
  if (n > (1ull << 32)) throw FormatError("implausible sample count");
  std::vector<std::string> ids;
  LabelTable labels(h.factors.size());
  Matrix features(static_cast<Eigen::Index>(n), h.dim);
  Vector row_buf(h.dim);
  for (std::uint64_t i = 0; i < n; ++i) {
    ids.push_back(ReadString(is, 4096));
    for (std::size_t f = 0; f < h.factors.size(); ++f) {
      int y = ReadI32(is);
      if (y < 0 || y >= h.factors[f].class_count)
        throw LabelRangeError("label out of range for factor '" + h.factors[f].name +
                                  "' at row " + std::to_string(i),
                              i);
      labels[f].push_back(y);
    }
    ReadF64Array(is, std::span<double>(row_buf.data(), h.dim));
    features.row(static_cast<Eigen::Index>(i)) = row_buf.transpose();
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw FormatError("trailing bytes after binary dataset body");
  return LabeledDataset(h.factors, std::move(ids), std::move(features), std::move(labels));
}

}  // namespace

void SaveDataset(const LabeledDataset &data, const std::string &path,
                 DatasetEncoding encoding, const std::string &config_hash) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << FormatHeader(data, encoding, config_hash) << '\n';
  if (encoding == DatasetEncoding::kBinary) {
    WriteU64(os, data.Size());
    for (std::size_t i = 0; i < data.Size(); ++i) {
      WriteString(os, data.ids()[i]);
      for (int f = 0; f < data.NumFactors(); ++f) WriteI32(os, data.label(f, i));
      for (int d = 0; d < data.Dim(); ++d) WriteF64(os, data.features()(i, d));
    }
  } else {
    std::string line;
    for (std::size_t i = 0; i < data.Size(); ++i) {
      line = data.ids()[i];
      for (int f = 0; f < data.NumFactors(); ++f) line += "," + std::to_string(data.label(f, i));
      for (int d = 0; d < data.Dim(); ++d) line += "," + FormatDouble(data.features()(i, d));
      line += '\n';
      os << line;
    }
  }
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

LabeledDataset LoadDataset(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line)) throw HeaderError("empty dataset file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Header h = ParseHeader(line);
  LabeledDataset data = h.binary ? ReadBinaryBody(is, h) : ReadTextBody(is, h);
  if (data.Dim() != h.dim) throw HeaderError("header dimension does not match rows");
  if (data.Empty()) throw FormatError("dataset '" + path + "' has no samples");
  return data;
}

std::string ReadDatasetConfigHash(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line)) throw HeaderError("empty dataset file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return ParseHeader(line).config_hash;
}

}  // namespace fdnf
