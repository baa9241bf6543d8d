// include/fdnf/eval/projection.h

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

#ifndef FDNF_EVAL_PROJECTION_H_
#define FDNF_EVAL_PROJECTION_H_

#include <string>
#include <vector>

#include "fdnf/base/common.h"

namespace fdnf {

struct Projection {
  Matrix coords;      // N x 2
  Matrix components;  // D x 2, unit columns
  Vector mean;        // D
  double explained[2] = {0.0, 0.0};  // variance ratio of each component

  double ExplainedTotal() const { return explained[0] + explained[1]; }
};

/// PCA onto the top two principal axes. Each axis is signed so that its
/// largest-magnitude loading is positive (first index wins ties). Needs
/// N >= 2, D >= 2 and nonzero total variance.
Projection Project2d(const Matrix &codes);

/// CSV with columns id,<factor labels...>,u,v.
void WriteProjectionCsv(const std::string &path, const std::vector<std::string> &ids,
                        const std::vector<std::string> &factor_names, const LabelTable &labels,
                        const Matrix &coords);

}  // namespace fdnf

#endif  // FDNF_EVAL_PROJECTION_H_
