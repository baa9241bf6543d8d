// src/eval/manipulation-eval.cc

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

#include "fdnf/eval/manipulation-eval.h"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "fdnf/base/error.h"

namespace fdnf {

ManipulationReport ManipulationEval(const FlowModel &model, const ClassMeanTable &means,
                                    const std::vector<const MlpClassifier *> &classifiers,
                                    const LabeledDataset &data, const std::string &factor,
                                    const std::string &model_name) {
  if (data.Dim() != model.Dim()) throw DimensionError("dataset does not match model dimension");
  if (classifiers.size() != static_cast<std::size_t>(data.NumFactors()))
    throw ValidationError("need one classifier per dataset factor");
  for (int f = 0; f < data.NumFactors(); ++f) {
    if (classifiers[f] == nullptr) throw ValidationError("missing classifier");
    if (classifiers[f]->NumClasses() != data.factor(f).class_count)
      throw ValidationError("classifier for '" + data.factor(f).name +
                            "' has the wrong class count");
  }
  const int tf = data.FactorIndex(factor);
  const int num_classes = data.factor(tf).class_count;
  if (means.NumClasses() != num_classes)
    throw ValidationError("mean table class count differs from the dataset");

  ManipulationReport rep;
  rep.model_name = model_name;
  rep.factor = factor;
  std::vector<int> others;
  for (int f = 0; f < data.NumFactors(); ++f) {
    if (f == tf) continue;
    others.push_back(f);
    rep.other_factors.push_back(data.factor(f).name);
  }
  const std::size_t no = others.size();

  std::vector<std::vector<std::size_t>> rows_of(num_classes);
  const auto &target_labels = data.labels(tf);
  for (std::size_t i = 0; i < data.Size(); ++i) rows_of[target_labels[i]].push_back(i);

  double sum_tb = 0.0, sum_ta = 0.0;
  std::vector<double> sum_ob(no, 0.0), sum_oa(no, 0.0);
  for (int c1 = 0; c1 < num_classes; ++c1) {
    const auto &rows = rows_of[c1];
    const bool from_ok = means.HasClass(c1) && !rows.empty();
    Matrix x;
    std::vector<Matrix> other_post_before;
    Matrix target_post_before;
    if (from_ok) {
      x.resize(static_cast<Eigen::Index>(rows.size()), data.Dim());
      for (std::size_t k = 0; k < rows.size(); ++k)
        x.row(static_cast<Eigen::Index>(k)) = data.features().row(static_cast<Eigen::Index>(rows[k]));
      target_post_before = classifiers[tf]->Posteriors(x);
      for (int f : others) other_post_before.push_back(classifiers[f]->Posteriors(x));
    }
    for (int c2 = 0; c2 < num_classes; ++c2) {
      if (c2 == c1) continue;
      if (!from_ok || !means.HasClass(c2)) {
        ++rep.skipped_pairs;
        continue;
      }
      PairResult pr;
      pr.from_class = c1;
      pr.to_class = c2;
      pr.count = rows.size();
      pr.other_before.assign(no, 0.0);
      pr.other_after.assign(no, 0.0);
      Matrix xm = ManipulateBatch(model, means, x, c1, c2);
      Matrix target_post_after = classifiers[tf]->Posteriors(xm);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        Eigen::Index r = static_cast<Eigen::Index>(k);
        pr.target_before += target_post_before(r, c2);
        pr.target_after += target_post_after(r, c2);
      }
      for (std::size_t o = 0; o < no; ++o) {
        const int f = others[o];
        Matrix after = classifiers[f]->Posteriors(xm);
        const auto &own = data.labels(f);
        for (std::size_t k = 0; k < rows.size(); ++k) {
          Eigen::Index r = static_cast<Eigen::Index>(k);
          pr.other_before[o] += other_post_before[o](r, own[rows[k]]);
          pr.other_after[o] += after(r, own[rows[k]]);
        }
      }
      sum_tb += pr.target_before;
      sum_ta += pr.target_after;
      for (std::size_t o = 0; o < no; ++o) {
        sum_ob[o] += pr.other_before[o];
        sum_oa[o] += pr.other_after[o];
      }
      rep.instances += pr.count;
      rep.pairs.push_back(std::move(pr));
    }
  }
  if (rep.instances == 0)
    throw ValidationError("no class pair of '" + factor + "' has samples on both ends");

  const double n = static_cast<double>(rep.instances);
  rep.target_before = sum_tb / n;
  rep.target_after = sum_ta / n;
  rep.target_delta = rep.target_after - rep.target_before;
  for (std::size_t o = 0; o < no; ++o) {
    rep.other_before.push_back(sum_ob[o] / n);
    rep.other_after.push_back(sum_oa[o] / n);
    rep.other_delta.push_back(rep.other_after[o] - rep.other_before[o]);
  }
  return rep;
}

namespace {

std::string Fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

void WriteReportMarkdown(std::ostream &os, const std::vector<ManipulationReport> &reports) {
  // Group by factor, keeping first-seen order.
  std::vector<std::string> factors;
  for (const auto &r : reports)
    if (std::find(factors.begin(), factors.end(), r.factor) == factors.end())
      factors.push_back(r.factor);

  os << "# Manipulation report\n";
  for (const auto &factor : factors) {
    const ManipulationReport *first = nullptr;
    for (const auto &r : reports)
      if (r.factor == factor) {
        first = &r;
        break;
      }
    os << "\n## Manipulating `" << factor << "`\n\n";
    os << "| Model | p(" << factor << "_2|x) | p(" << factor << "_2|x') | delta(" << factor
       << "_2) |";
    for (const auto &o : first->other_factors)
      os << " p(" << o << "|x) | p(" << o << "|x') | delta(" << o << ") |";
    os << " instances | skipped pairs |\n|---|---:|---:|---:|";
    for (std::size_t o = 0; o < first->other_factors.size(); ++o) os << "---:|---:|---:|";
    os << "---:|---:|\n";
    for (const auto &r : reports) {
      if (r.factor != factor) continue;
      os << "| " << r.model_name << " | " << Fixed3(r.target_before) << " | "
         << Fixed3(r.target_after) << " | " << Fixed3(r.target_delta) << " |";
      for (std::size_t o = 0; o < r.other_factors.size(); ++o)
        os << " " << Fixed3(r.other_before[o]) << " | " << Fixed3(r.other_after[o]) << " | "
           << Fixed3(r.other_delta[o]) << " |";
      os << " " << r.instances << " | " << r.skipped_pairs << " |\n";
    }
  }
}

void WriteReportCsv(std::ostream &os, const std::vector<ManipulationReport> &reports) {
  os << "model,factor,scope,from,to,count,column,before,after,delta\n";
  auto row = [&](const ManipulationReport &r, const std::string &scope, int from, int to,
                 std::size_t count, const std::string &column, double before, double after) {
    os << r.model_name << ',' << r.factor << ',' << scope << ',' << from << ',' << to << ','
       << count << ',' << column << ',' << FormatDouble(before) << ',' << FormatDouble(after)
       << ',' << FormatDouble(after - before) << '\n';
  };
  for (const auto &r : reports) {
    row(r, "mean", -1, -1, r.instances, "target", r.target_before, r.target_after);
    for (std::size_t o = 0; o < r.other_factors.size(); ++o)
      row(r, "mean", -1, -1, r.instances, r.other_factors[o], r.other_before[o], r.other_after[o]);
    for (const auto &p : r.pairs) {
      const double n = static_cast<double>(p.count);
      row(r, "pair", p.from_class, p.to_class, p.count, "target", p.target_before / n,
          p.target_after / n);
      for (std::size_t o = 0; o < r.other_factors.size(); ++o)
        row(r, "pair", p.from_class, p.to_class, p.count, r.other_factors[o],
            p.other_before[o] / n, p.other_after[o] / n);
    }
  }
}

}  // namespace fdnf
