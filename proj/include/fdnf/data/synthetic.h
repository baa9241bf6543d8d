// include/fdnf/data/synthetic.h

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

#ifndef FDNF_DATA_SYNTHETIC_H_
#define FDNF_DATA_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fdnf/base/common.h"
#include "fdnf/data/dataset.h"

namespace fdnf {

struct SyntheticFactor {
  std::string name;
  int num_classes = 0;
  int latent_width = 0;
};

/// Knobs for drawing a random linear factor model.
struct SyntheticConfig {
  int obs_dim = 16;
  std::vector<SyntheticFactor> factors = {{"phone", 5, 4}, {"speaker", 5, 4}};
  double mean_stddev = 2.0;      // class means ~ N(0, mean_stddev^2 I)
  double loading_stddev = 1.0;   // loading entries ~ N(0, loading_stddev^2)
  double noise_min = 0.2;        // noise diagonal ~ U(noise_min, noise_max)
  double noise_max = 0.5;
  std::uint64_t seed = 1;

  void Validate() const;
};

/// Linear factor model
///
///   x = sum_f M_f v_f + diag(noise) eps,   v_f ~ N(mu_{f, y_f}, I), eps ~ N(0, I)
///
/// with one loading matrix M_f (obs_dim x latent_width) and one table of
/// class means per factor. For two factors this is x = M_q v_q + M_s v_s + D eps.
struct SyntheticSpec {
  int obs_dim = 0;
  std::vector<SyntheticFactor> factors;
  std::vector<Matrix> loadings;     // obs_dim x width
  std::vector<Matrix> class_means;  // num_classes x width
  Vector noise;                     // diagonal of D, all > 0
  std::uint64_t seed = 0;

  /// Shape checks, noise > 0 and full column rank of every nonzero
  /// loading matrix. An all-zero loading switches its factor off.
  void Validate() const;

  /// E[x | labels] = sum_f M_f mu_{f, y_f}.
  Vector CellMean(std::span<const int> labels) const;
  /// Covariance within one label cell: sum_f M_f M_f^T + diag(noise^2).
  Matrix CellCovariance() const;
  std::vector<FactorInfo> FactorInfos() const;
};

/// Draws loadings, class means and noise from config.seed.
SyntheticSpec DrawSyntheticSpec(const SyntheticConfig &config);

/// n_per_cell samples for every combination of class labels, cells in
/// lexicographic label order (last factor fastest). Deterministic in
/// sample_seed.
LabeledDataset GenerateSynthetic(const SyntheticSpec &spec, int n_per_cell,
                                 std::uint64_t sample_seed);

std::string SyntheticSpecToJson(const SyntheticSpec &spec);
SyntheticSpec SyntheticSpecFromJson(const std::string &text);

}  // namespace fdnf

#endif  // FDNF_DATA_SYNTHETIC_H_
