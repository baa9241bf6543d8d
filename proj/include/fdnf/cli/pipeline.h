// include/fdnf/cli/pipeline.h

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

#ifndef FDNF_CLI_PIPELINE_H_
#define FDNF_CLI_PIPELINE_H_

#include <ostream>
#include <string>
#include <vector>

#include "fdnf/cli/run-config.h"
#include "fdnf/data/dataset.h"
#include "fdnf/data/synthetic.h"
#include "fdnf/eval/manipulation-eval.h"
#include "fdnf/eval/mlp-classifier.h"
#include "fdnf/flow/flow-model.h"
#include "fdnf/prior/prior.h"
#include "fdnf/train/trainer.h"

namespace fdnf {

struct DataSplit {
  SyntheticSpec spec;
  LabeledDataset train;
  LabeledDataset test;
};

/// Draws the synthetic model and both splits from the run seed.
DataSplit GenerateData(const RunConfig &config);

FlowConfig BuildFlowConfig(const RunConfig &config, int dim);

/// Prior for `regime` over the factors of `data`. The discriminative
/// regime uses `factor` (or the configured/first factor when empty); the
/// factorial regime uses model.partition or an even split.
PriorSpec BuildPrior(const RunConfig &config, const LabeledDataset &data, PriorRegime regime,
                     const std::string &factor = "");

struct TrainedModel {
  std::string name;
  FlowModel model;
  PriorSpec prior;
  TrainState state;
};

/// Fresh initialization and full training. `name` also salts the seeds,
/// so models trained in one run start from different draws.
TrainedModel TrainModel(const RunConfig &config, const LabeledDataset &train, PriorRegime regime,
                        const std::string &factor, const std::string &name,
                        std::ostream *log);

/// One raw-observation classifier per data factor, in factor order.
std::vector<ClassifierTraining> TrainFactorClassifiers(const RunConfig &config,
                                                       const LabeledDataset &train,
                                                       std::ostream *log);

/// Classifier accuracy of each partial code at predicting each factor.
struct StructureRow {
  std::string code;    // partition factor whose slice was used
  std::string factor;  // data factor predicted
  double accuracy = 0.0;
  double chance = 0.0;
};
std::vector<StructureRow> ClassStructure(const RunConfig &config, const FlowModel &model,
                                         const PriorSpec &prior, const LabeledDataset &train,
                                         const LabeledDataset &test);

struct BenchResult {
  std::vector<std::string> factors;
  std::vector<ManipulationReport> reports;   // grouped by factor, NF / DNF / f-DNF
  std::vector<StructureRow> structure;       // f-DNF partial codes
  std::vector<double> classifier_accuracy;   // held-out, per data factor
  std::string config_hash;
};

/// Train classifiers and NF, DNF (one per factor) and factorial DNF
/// models on `data`, then evaluate every factor manipulation on the test
/// split. Models are returned through `models` when non-null.
BenchResult RunBenchOn(const RunConfig &config, const DataSplit &data, std::ostream *log,
                       std::vector<TrainedModel> *models = nullptr);

/// The bench report as Markdown. Contains no timings, so equal inputs give
/// equal bytes.
void WriteBenchMarkdown(std::ostream &os, const BenchResult &result);
void WriteStructureCsv(std::ostream &os, const std::vector<StructureRow> &rows);

}  // namespace fdnf

#endif  // FDNF_CLI_PIPELINE_H_
