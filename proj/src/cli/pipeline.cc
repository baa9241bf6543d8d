// src/cli/pipeline.cc

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

#include "fdnf/cli/pipeline.h"

#include <cstdio>

#include "fdnf/base/error.h"
#include "fdnf/factorize/factorize.h"

namespace fdnf {

DataSplit GenerateData(const RunConfig &config) {
  SyntheticConfig sc = config.synthetic;
  sc.seed = DeriveSeed(config.seed, "spec");
  DataSplit out;
  out.spec = DrawSyntheticSpec(sc);
  out.train = GenerateSynthetic(out.spec, config.train_per_cell, DeriveSeed(config.seed, "train"));
  out.test = GenerateSynthetic(out.spec, config.test_per_cell, DeriveSeed(config.seed, "test"));
  return out;
}

FlowConfig BuildFlowConfig(const RunConfig &config, int dim) {
  FlowConfig fc;
  fc.dim = dim;
  fc.blocks = config.blocks;
  fc.hidden = config.hidden;
  fc.scale_bound = config.scale_bound;
  fc.bn_momentum = config.bn_momentum;
  fc.bn_epsilon = config.bn_epsilon;
  fc.Validate();
  return fc;
}

PriorSpec BuildPrior(const RunConfig &config, const LabeledDataset &data, PriorRegime regime,
                     const std::string &factor) {
  const int dim = data.Dim();
  if (data.NumFactors() < 1 && regime != PriorRegime::kStandard)
    throw ValidationError("a labelled prior needs a dataset with factors");
  switch (regime) {
    case PriorRegime::kStandard:
      return PriorSpec::Standard(dim);
    case PriorRegime::kDiscriminative: {
      std::string name = !factor.empty() ? factor
                         : !config.target_factor.empty() ? config.target_factor
                                                         : data.factor(0).name;
      int f = data.FactorIndex(name);
      return PriorSpec::Discriminative(dim, name, data.factor(f).class_count);
    }
    case PriorRegime::kFactorial: {
      LatentPartition partition;
      if (config.partition.empty()) {
        std::vector<std::string> names;
        for (const auto &f : data.factors()) names.push_back(f.name);
        partition = LatentPartition::Equal(names, dim);
      } else {
        std::vector<std::string> names;
        std::vector<int> widths;
        for (const auto &item : SplitString(config.partition, ',')) {
          auto parts = SplitString(Trim(item), ':');
          names.push_back(Trim(parts.at(0)));
          widths.push_back(static_cast<int>(ParseInt(Trim(parts.at(1)))));
        }
        partition = LatentPartition(names, widths);
      }
      if (partition.Dim() != dim)
        throw ValidationError("partition widths sum to " + std::to_string(partition.Dim()) +
                              " but the data has D=" + std::to_string(dim));
      std::vector<int> counts;
      for (const auto &n : partition.names()) {
        if (!data.HasFactor(n))
          throw ValidationError("partition factor '" + n + "' is not in the data");
        counts.push_back(data.factor(data.FactorIndex(n)).class_count);
      }
      return PriorSpec::Factorial(partition, counts);
    }
  }
  throw ValidationError("unknown regime");
}

TrainedModel TrainModel(const RunConfig &config, const LabeledDataset &train, PriorRegime regime,
                        const std::string &factor, const std::string &name, std::ostream *log) {
  TrainedModel tm;
  tm.name = name;
  tm.prior = BuildPrior(config, train, regime, factor);
  tm.model = FlowModel(BuildFlowConfig(config, train.Dim()));
  tm.model.InitForTraining(DeriveSeed(config.seed, "init-" + name));
  tm.prior.InitMeans(DeriveSeed(config.seed, "means-" + name), config.mean_init_stddev);
  TrainConfig tc = config.train;
  tc.seed = DeriveSeed(config.seed, "batches-" + name);
  TrainHooks hooks;
  hooks.log = log;
  if (log != nullptr) *log << "training " << name << " (" << RegimeName(regime) << ")\n";
  Train(&tm.model, &tm.prior, train, tc, &tm.state, hooks);
  return tm;
}

std::vector<ClassifierTraining> TrainFactorClassifiers(const RunConfig &config,
                                                       const LabeledDataset &train,
                                                       std::ostream *log) {
  std::vector<ClassifierTraining> out;
  for (int f = 0; f < train.NumFactors(); ++f) {
    MlpConfig mc = config.classifier;
    mc.seed = DeriveSeed(config.seed, "classifier-" + train.factor(f).name);
    out.push_back(TrainClassifier(train.features(), train.labels(f), train.factor(f).class_count, mc));
    if (log != nullptr) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "classifier %s train acc %.4f held-out acc %.4f\n",
                    train.factor(f).name.c_str(), out.back().train_accuracy,
                    out.back().validation_accuracy);
      *log << buf;
    }
  }
  return out;
}

std::vector<StructureRow> ClassStructure(const RunConfig &config, const FlowModel &model,
                                         const PriorSpec &prior, const LabeledDataset &train,
                                         const LabeledDataset &test) {
  const LatentPartition &p = prior.partition();
  Matrix z_train = EncodeBatch(model, train.features());
  Matrix z_test = EncodeBatch(model, test.features());
  std::vector<StructureRow> rows;
  for (int c = 0; c < p.NumFactors(); ++c) {
    Matrix a = z_train.middleCols(p.offset(c), p.width(c));
    Matrix b = z_test.middleCols(p.offset(c), p.width(c));
    for (int f = 0; f < train.NumFactors(); ++f) {
      MlpConfig mc = config.classifier;
      mc.seed = DeriveSeed(config.seed, "structure-" + p.name(c) + "-" + train.factor(f).name);
      ClassifierTraining ct =
          TrainClassifier(a, train.labels(f), train.factor(f).class_count, mc);
      StructureRow r;
      r.code = p.name(c);
      r.factor = train.factor(f).name;
      r.accuracy = ct.classifier.Accuracy(b, test.labels(f));
      r.chance = 1.0 / train.factor(f).class_count;
      rows.push_back(r);
    }
  }
  return rows;
}

BenchResult RunBenchOn(const RunConfig &config, const DataSplit &data, std::ostream *log,
                       std::vector<TrainedModel> *models) {
  BenchResult result;
  result.config_hash = config.Hash();
  for (const auto &f : data.train.factors()) result.factors.push_back(f.name);
  std::vector<std::string> eval_factors = config.EvalFactors(result.factors);

  std::vector<ClassifierTraining> clf = TrainFactorClassifiers(config, data.train, log);
  std::vector<const MlpClassifier *> clf_ptrs;
  for (const auto &c : clf) {
    clf_ptrs.push_back(&c.classifier);
    result.classifier_accuracy.push_back(c.classifier.Accuracy(data.test.features(),
                                                               data.test.labels(static_cast<int>(
                                                                   clf_ptrs.size() - 1))));
  }

  std::vector<TrainedModel> trained;
  trained.push_back(TrainModel(config, data.train, PriorRegime::kStandard, "", "NF", log));
  for (const auto &f : eval_factors)
    trained.push_back(
        TrainModel(config, data.train, PriorRegime::kDiscriminative, f, "DNF-" + f, log));
  trained.push_back(TrainModel(config, data.train, PriorRegime::kFactorial, "", "f-DNF", log));
  const TrainedModel &nf = trained.front();
  const TrainedModel &fdnf = trained.back();

  for (std::size_t k = 0; k < eval_factors.size(); ++k) {
    const std::string &f = eval_factors[k];
    const TrainedModel *row_models[3] = {&nf, &trained[1 + k], &fdnf};
    const char *row_names[3] = {"NF", "DNF", "f-DNF"};
    for (int m = 0; m < 3; ++m) {
      ClassMeanTable means = ClassMeans(row_models[m]->model, row_models[m]->prior, data.train, f);
      result.reports.push_back(ManipulationEval(row_models[m]->model, means, clf_ptrs, data.test,
                                                f, row_names[m]));
      if (log != nullptr) {
        const auto &r = result.reports.back();
        char buf[200];
        std::snprintf(buf, sizeof(buf), "eval %s on %s: delta target %.4f", row_names[m],
                      f.c_str(), r.target_delta);
        *log << buf;
        for (std::size_t o = 0; o < r.other_factors.size(); ++o) {
          std::snprintf(buf, sizeof(buf), " delta %s %.4f", r.other_factors[o].c_str(),
                        r.other_delta[o]);
          *log << buf;
        }
        *log << "\n";
      }
    }
  }
  result.structure = ClassStructure(config, fdnf.model, fdnf.prior, data.train, data.test);
  if (models != nullptr) *models = std::move(trained);
  return result;
}

namespace {

std::string F4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

void WriteBenchMarkdown(std::ostream &os, const BenchResult &result) {
  WriteReportMarkdown(os, result.reports);
  os << "\n## Raw-observation classifiers\n\n| Factor | test accuracy |\n|---|---:|\n";
  for (std::size_t f = 0; f < result.factors.size(); ++f)
    os << "| " << result.factors[f] << " | " << F4(result.classifier_accuracy[f]) << " |\n";
  os << "\n## f-DNF partial-code class structure\n\n"
     << "| Code | Predicted factor | test accuracy | chance |\n|---|---|---:|---:|\n";
  for (const auto &r : result.structure)
    os << "| z^" << r.code << " | " << r.factor << " | " << F4(r.accuracy) << " | "
       << F4(r.chance) << " |\n";
  os << "\nconfig " << result.config_hash << "\n";
}

void WriteStructureCsv(std::ostream &os, const std::vector<StructureRow> &rows) {
  os << "code,factor,accuracy,chance\n";
  for (const auto &r : rows)
    os << r.code << ',' << r.factor << ',' << FormatDouble(r.accuracy) << ','
       << FormatDouble(r.chance) << '\n';
}

}  // namespace fdnf
