// tests/unit/test-eval.cc

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

#include <cmath>
#include <random>

#include <doctest.h>

#include "fdnf/base/error.h"
#include "fdnf/data/synthetic.h"
#include "fdnf/eval/manipulation-eval.h"
#include "fdnf/eval/mlp-classifier.h"
#include "fdnf/eval/projection.h"
#include "fdnf/factorize/factorize.h"
#include "test-util.h"

using namespace fdnf;
using fdnf::testing::RandomMatrix;

namespace {

// Two unit-variance blobs centered at (+-4, 0).
void Blobs(int n, std::uint64_t seed, Matrix *x, std::vector<int> *y) {
  *x = RandomMatrix(n, 2, seed);
  y->assign(n, 0);
  for (int i = 0; i < n; ++i) {
    (*y)[i] = i % 2;
    (*x)(i, 0) += (i % 2) ? 4.0 : -4.0;
  }
}

struct EvalFixture {
  LabeledDataset data;
  FlowModel model;
  PriorSpec prior;
  std::vector<ClassifierTraining> trained;
  std::vector<const MlpClassifier *> ptrs;

  EvalFixture() {
    SyntheticConfig c;
    c.obs_dim = 6;
    c.factors = {{"q", 3, 2}, {"s", 2, 2}};
    c.seed = 3;
    data = GenerateSynthetic(DrawSyntheticSpec(c), 20, 4);
    FlowConfig fc;
    fc.dim = 6;
    fc.blocks = 2;
    fc.hidden = 6;
    model = FlowModel(fc);
    model.InitRandom(5, 0.3);
    prior = PriorSpec::Factorial(LatentPartition({"q", "s"}, {3, 3}), {3, 2});
    MlpConfig mc;
    mc.epochs = 5;
    for (int f = 0; f < 2; ++f)
      trained.push_back(TrainClassifier(data.features(), data.labels(f),
                                        data.factor(f).class_count, mc));
    for (auto &t : trained) ptrs.push_back(&t.classifier);
  }
};

}  // namespace

TEST_CASE("classifier separates blobs") {
  Matrix x, xt;
  std::vector<int> y, yt;
  Blobs(400, 1, &x, &y);
  Blobs(400, 2, &xt, &yt);
  MlpConfig c;
  c.epochs = 20;
  ClassifierTraining t = TrainClassifier(x, y, 2, c);
  CHECK(t.classifier.Accuracy(xt, yt) > 0.99);
  CHECK(t.train_accuracy > 0.99);
  CHECK(t.loss_history.size() == 20u);
  CHECK(t.loss_history.back() < t.loss_history.front());

  ClassifierTraining again = TrainClassifier(x, y, 2, c);
  CHECK(std::equal(again.classifier.params().begin(), again.classifier.params().end(),
                   t.classifier.params().begin()));
}

TEST_CASE("classifier rejects degenerate input") {
  Matrix x = RandomMatrix(10, 2, 1);
  CHECK_THROWS_AS(TrainClassifier(x, std::vector<int>(10, 1), 3, MlpConfig()), ValidationError);
  CHECK_THROWS_AS(MlpClassifier(2, 4, 1), ValidationError);
  MlpConfig bad;
  bad.validation_fraction = 1.0;
  CHECK_THROWS_AS(bad.Validate(), ValidationError);
}

TEST_CASE("posteriors lie on the simplex") {
  MlpClassifier m(3, 7, 4);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (double &p : m.mutable_params()) p = normal(rng);
  Matrix x = RandomMatrix(200, 3, 6, 50.0);
  Matrix post = m.Posteriors(x);
  for (Eigen::Index i = 0; i < post.rows(); ++i) {
    CHECK(std::abs(post.row(i).sum() - 1.0) < 1e-12);
    CHECK(post.row(i).minCoeff() >= 0.0);
  }
}

TEST_CASE("classifier gradient matches finite differences") {
  MlpClassifier m(3, 4, 3);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (double &p : m.mutable_params()) p = normal(rng);
  Matrix x = RandomMatrix(5, 3, 9);
  std::vector<int> y = {0, 2, 1, 1, 0};
  std::vector<double> grad(m.params().size());
  m.LossAndGrad(x, y, grad);
  std::vector<double> dummy(grad.size());
  const double h = 1e-6;
  for (std::size_t k = 0; k < grad.size(); ++k) {
    MlpClassifier up = m, down = m;
    up.mutable_params()[k] += h;
    down.mutable_params()[k] -= h;
    double fd = (up.LossAndGrad(x, y, dummy) - down.LossAndGrad(x, y, dummy)) / (2.0 * h);
    CHECK(fdnf::testing::RelErr(grad[k], fd) < 1e-5);
  }
}

TEST_CASE("manipulation report is consistent with its pairs") {
  EvalFixture fx;
  ClassMeanTable t = ClassMeans(fx.model, fx.prior, fx.data, "q");
  ManipulationReport r = ManipulationEval(fx.model, t, fx.ptrs, fx.data, "q", "m");
  CHECK(r.pairs.size() == 6u);
  CHECK(r.skipped_pairs == 0u);
  CHECK(r.other_factors == std::vector<std::string>{"s"});
  double tb = 0, ta = 0, ob = 0, oa = 0;
  std::size_t n = 0;
  for (const auto &p : r.pairs) {
    tb += p.target_before;
    ta += p.target_after;
    ob += p.other_before[0];
    oa += p.other_after[0];
    n += p.count;
  }
  CHECK(n == r.instances);
  CHECK(n == 6u * 40u);
  CHECK(std::abs(tb / n - r.target_before) < 1e-12);
  CHECK(std::abs(ta / n - r.target_after) < 1e-12);
  CHECK(std::abs((oa - ob) / n - r.other_delta[0]) < 1e-12);
  CHECK(r.target_delta == r.target_after - r.target_before);

  // Direct recomputation of one pair.
  const PairResult &p = r.pairs[1];
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fx.data.Size(); ++i)
    if (fx.data.label(0, i) == p.from_class) rows.push_back(i);
  double sum = 0.0;
  for (std::size_t i : rows) {
    Vector x = fx.data.features().row(static_cast<Eigen::Index>(i)).transpose();
    Vector xm = Manipulate(fx.model, t, x, p.from_class, p.to_class);
    sum += fx.ptrs[0]->Posteriors(xm)(p.to_class);
  }
  CHECK(std::abs(sum - p.target_after) < 1e-12 * rows.size());
}

TEST_CASE("manipulation report ignores sample order and skips empty classes") {
  EvalFixture fx;
  ClassMeanTable t = ClassMeans(fx.model, fx.prior, fx.data, "s");
  ManipulationReport a = ManipulationEval(fx.model, t, fx.ptrs, fx.data, "s");
  std::vector<std::size_t> perm(fx.data.Size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 37) % perm.size();
  ManipulationReport b =
      ManipulationEval(fx.model, t, fx.ptrs, fx.data.Subset(perm), "s");
  CHECK(std::abs(a.target_delta - b.target_delta) < 1e-12);
  CHECK(std::abs(a.other_delta[0] - b.other_delta[0]) < 1e-12);

  ClassMeanTable tq = ClassMeans(fx.model, fx.prior, fx.data, "q");
  tq.counts[2] = 0;
  ManipulationReport c = ManipulationEval(fx.model, tq, fx.ptrs, fx.data, "q");
  CHECK(c.skipped_pairs == 4u);
  CHECK(c.pairs.size() == 2u);
}

TEST_CASE("report writers") {
  EvalFixture fx;
  ClassMeanTable t = ClassMeans(fx.model, fx.prior, fx.data, "q");
  std::vector<ManipulationReport> reps = {
      ManipulationEval(fx.model, t, fx.ptrs, fx.data, "q", "f-DNF")};
  std::ostringstream md, csv;
  WriteReportMarkdown(md, reps);
  WriteReportCsv(csv, reps);
  CHECK(md.str().find("## Manipulating `q`") != std::string::npos);
  CHECK(md.str().find("f-DNF") != std::string::npos);
  CHECK(csv.str().rfind("model,factor,scope,from,to,count,column,before,after,delta\n", 0) == 0);
}

TEST_CASE("projection of planar points keeps distances") {
  Matrix plane = RandomMatrix(40, 2, 3, 3.0);
  Matrix basis = Eigen::HouseholderQR<Matrix>(RandomMatrix(7, 7, 4)).householderQ();
  Matrix x = plane * basis.leftCols(2).transpose();
  x.rowwise() += RandomMatrix(1, 7, 5).row(0);
  Projection p = Project2d(x);
  for (int i = 0; i < 40; ++i)
    for (int j = i + 1; j < 40; ++j)
      CHECK(std::abs((p.coords.row(i) - p.coords.row(j)).norm() - (x.row(i) - x.row(j)).norm()) <
            1e-8);
  CHECK(p.ExplainedTotal() == doctest::Approx(1.0).epsilon(1e-10));
  for (int k = 0; k < 2; ++k) {
    Eigen::Index arg;
    p.components.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(p.components(arg, k) > 0.0);
  }
}

TEST_CASE("projection of isotropic data explains about 2/D") {
  const int d = 10;
  Projection p = Project2d(RandomMatrix(20000, d, 6));
  CHECK(std::abs(p.ExplainedTotal() - 2.0 / d) < 0.03);
}

TEST_CASE("projection edge cases") {
  Matrix x = RandomMatrix(10, 3, 7);
  x.row(4) = x.row(2);
  Projection p = Project2d(x);
  CHECK(p.coords.row(4) == p.coords.row(2));
  CHECK_THROWS_AS(Project2d(Matrix::Ones(5, 3)), ValidationError);
  CHECK_THROWS_AS(Project2d(RandomMatrix(1, 3, 1)), ValidationError);
  Matrix bad = RandomMatrix(4, 3, 2);
  bad(0, 0) = INFINITY;
  CHECK_THROWS_AS(Project2d(bad), ValidationError);
}
