// src/eval/projection.cc

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

#include "fdnf/eval/projection.h"

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "fdnf/base/error.h"

namespace fdnf {

Projection Project2d(const Matrix &codes) {
  if (codes.rows() < 2) throw ValidationError("projection needs at least two points");
  if (codes.cols() < 2) throw ValidationError("projection needs at least two dimensions");
  if (!AllFinite(codes)) throw ValidationError("projection input is not finite");

  Projection p;
  p.mean = codes.colwise().mean().transpose();
  Matrix centered = codes.rowwise() - p.mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(codes.rows() - 1);
  const double total = cov.trace();
  if (!(total > 0.0)) throw ValidationError("projection input has zero variance");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::Index d = codes.cols();
  p.components.resize(d, 2);
  for (int k = 0; k < 2; ++k) {
    Vector v = eig.eigenvectors().col(d - 1 - k);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < d; ++i)
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    if (v(arg) < 0.0) v = -v;
    p.components.col(k) = v;
    p.explained[k] = std::max(0.0, eig.eigenvalues()(d - 1 - k)) / total;
  }
  p.coords = centered * p.components;
  return p;
}

void WriteProjectionCsv(const std::string &path, const std::vector<std::string> &ids,
                        const std::vector<std::string> &factor_names, const LabelTable &labels,
                        const Matrix &coords) {
  if (coords.cols() != 2 || static_cast<Eigen::Index>(ids.size()) != coords.rows())
    throw DimensionError("projection rows do not match ids");
  if (labels.size() != factor_names.size()) throw DimensionError("label columns do not match names");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "id";
  for (const auto &n : factor_names) os << ',' << n;
  os << ",u,v\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    os << ids[i];
    for (const auto &col : labels) os << ',' << col[i];
    Eigen::Index r = static_cast<Eigen::Index>(i);
    os << ',' << FormatDouble(coords(r, 0)) << ',' << FormatDouble(coords(r, 1)) << '\n';
  }
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace fdnf
