// include/fdnf/eval/manipulation-eval.h

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

#ifndef FDNF_EVAL_MANIPULATION_EVAL_H_
#define FDNF_EVAL_MANIPULATION_EVAL_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "fdnf/data/dataset.h"
#include "fdnf/eval/mlp-classifier.h"
#include "fdnf/factorize/factorize.h"
#include "fdnf/flow/flow-model.h"

namespace fdnf {

/// Posterior sums for one ordered class pair. The target columns hold the
/// classifier posterior of the destination class; the other columns hold
/// the posterior of each sample's own label for every other factor.
struct PairResult {
  int from_class = 0;
  int to_class = 0;
  std::size_t count = 0;
  double target_before = 0.0, target_after = 0.0;
  std::vector<double> other_before, other_after;  // indexed like other_factors
};

struct ManipulationReport {
  std::string model_name;
  std::string factor;
  std::vector<std::string> other_factors;
  std::size_t instances = 0;      // (pair, sample) instances averaged
  std::size_t skipped_pairs = 0;  // pairs with an empty class on either end
  double target_before = 0.0, target_after = 0.0, target_delta = 0.0;
  std::vector<double> other_before, other_after, other_delta;
  std::vector<PairResult> pairs;  // sums, not means, ordered (from, to)
};

/// Runs the posterior-delta protocol for one factor. `classifiers` is
/// indexed like data.factors(); each one scores raw observations. Every
/// ordered pair c1 != c2 is visited and each test sample of class c1 is
/// shifted to c2. Averages run uniformly over all (pair, sample) instances.
ManipulationReport ManipulationEval(const FlowModel &model, const ClassMeanTable &means,
                                    const std::vector<const MlpClassifier *> &classifiers,
                                    const LabeledDataset &data, const std::string &factor,
                                    const std::string &model_name = "");

/// Markdown with one table per manipulated factor and one row per model.
/// Columns: target posterior before, after and delta, then the same for
/// each other factor.
void WriteReportMarkdown(std::ostream &os, const std::vector<ManipulationReport> &reports);

/// One row per (model, factor, column) with full precision values and the
/// per-pair breakdown.
void WriteReportCsv(std::ostream &os, const std::vector<ManipulationReport> &reports);

}  // namespace fdnf

#endif  // FDNF_EVAL_MANIPULATION_EVAL_H_
