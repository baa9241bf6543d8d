// include/fdnf/base/common.h

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

#ifndef FDNF_BASE_COMMON_H_
#define FDNF_BASE_COMMON_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fdnf {

// Batches are stored one sample per row.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Labels for a batch, indexed [factor][sample].
using LabelTable = std::vector<std::vector<int>>;

/// Number of worker threads used by the parallel helpers. 0 means
/// hardware concurrency.
void SetNumThreads(int n);
int NumThreads();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are
/// disjoint; callers write results into per-index slots so the outcome
/// does not depend on the thread count.
template <typename Body>
void ParallelFor(std::size_t n, const Body &body);

/// 64-bit FNV-1a. Stable across platforms, used to tag artifacts with the
/// configuration that produced them.
std::uint64_t Fnv1a64(std::string_view bytes);
std::string HexDigest(std::uint64_t h);

/// "%.17g" formatting, which round-trips every double exactly.
std::string FormatDouble(double v);
/// Strict parse of a full token; throws FormatError on trailing junk.
double ParseDouble(std::string_view token);
long long ParseInt(std::string_view token);

std::vector<std::string> SplitString(std::string_view s, char delim);
std::string Trim(std::string_view s);

bool AllFinite(const Matrix &m);

}  // namespace fdnf

#include "fdnf/base/parallel-inl.h"

#endif  // FDNF_BASE_COMMON_H_
