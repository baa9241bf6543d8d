// tests/unit/test-prior.cc

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
#include "fdnf/flow/flow-model.h"
#include "fdnf/prior/prior.h"
#include "test-util.h"

using namespace fdnf;
using fdnf::testing::RandomMatrix;
using fdnf::testing::RandomVector;
using fdnf::testing::RelErr;

namespace {

const double kLog2Pi = std::log(2.0 * M_PI);

// Independent evaluation of log N(v; mu, I).
double GaussLogDensity(const Vector &v, const Vector &mu) {
  return -0.5 * static_cast<double>(v.size()) * kLog2Pi - 0.5 * (v - mu).squaredNorm();
}

}  // namespace

TEST_CASE("latent partition layout") {
  LatentPartition p({"phone", "speaker", "channel"}, {3, 2, 4});
  CHECK(p.Dim() == 9);
  CHECK(p.offset(0) == 0);
  CHECK(p.offset(1) == 3);
  CHECK(p.offset(2) == 5);
  CHECK(p.FindFactor("speaker") == 1);
  CHECK(p.FindFactor("nope") == -1);
  LatentPartition eq = LatentPartition::Equal({"a", "b"}, 5);
  CHECK(eq.width(0) == 3);
  CHECK(eq.width(1) == 2);
  CHECK_THROWS_AS(LatentPartition({"a", "a"}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(LatentPartition({"a", "b"}, {1, 0}), ValidationError);
  CHECK_THROWS_AS(LatentPartition({}, {}), ValidationError);
}

TEST_CASE("regime names") {
  CHECK(ParseRegime("standard") == PriorRegime::kStandard);
  CHECK(ParseRegime("dnf") == PriorRegime::kDiscriminative);
  CHECK(ParseRegime("factorial") == PriorRegime::kFactorial);
  CHECK_THROWS_AS(ParseRegime("vae"), ValidationError);
}

TEST_CASE("log prior examples") {
  PriorSpec standard = PriorSpec::Standard(2);
  CHECK(LogPrior(standard, Vector::Zero(2), {}) == doctest::Approx(-kLog2Pi).epsilon(1e-15));

  PriorSpec fact = PriorSpec::Factorial(LatentPartition({"q", "s"}, {1, 1}), {1, 1});
  std::vector<int> labels = {0, 0};
  CHECK(LogPrior(fact, Vector::Zero(2), labels) == doctest::Approx(-kLog2Pi).epsilon(1e-15));
  fact.MutableMean(0, 0)(0) = 1.0;
  fact.MutableMean(1, 0)(0) = -1.0;
  CHECK(LogPrior(fact, Vector::Zero(2), labels) ==
        doctest::Approx(-kLog2Pi - 1.0).epsilon(1e-15));
}

TEST_CASE("factorial log prior is the sum of partial log-densities") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    int k = 1 + static_cast<int>(rng() % 4);
    std::vector<std::string> names;
    std::vector<int> widths, counts;
    for (int f = 0; f < k; ++f) {
      names.push_back("f" + std::to_string(f));
      widths.push_back(1 + static_cast<int>(rng() % 5));
      counts.push_back(1 + static_cast<int>(rng() % 6));
    }
    PriorSpec spec = PriorSpec::Factorial(LatentPartition(names, widths), counts);
    spec.InitMeans(rng(), 1.5);
    Vector z = RandomVector(spec.Dim(), rng(), 2.0);
    std::vector<int> labels;
    for (int f = 0; f < k; ++f) labels.push_back(static_cast<int>(rng() % counts[f]));

    double oracle = 0.0;
    for (int f = 0; f < k; ++f) {
      const LatentPartition &p = spec.partition();
      oracle += GaussLogDensity(z.segment(p.offset(f), p.width(f)), spec.Mean(f, labels[f]));
    }
    double partial_sum = 0.0;
    for (int f = 0; f < k; ++f) partial_sum += LogPriorPartial(spec, z, f, labels[f]);
    double total = LogPrior(spec, z, labels);
    CHECK(std::abs(total - oracle) < 1e-12);
    CHECK(std::abs(total - partial_sum) < 1e-12);
    CHECK(std::abs(total - GaussLogDensity(z, spec.FullMean(labels))) < 1e-12);

    // Relabelling one factor only moves that factor's term.
    if (counts[0] > 1) {
      std::vector<int> other = labels;
      other[0] = (labels[0] + 1) % counts[0];
      double diff = LogPrior(spec, z, other) - total;
      double term_diff = LogPriorPartial(spec, z, 0, other[0]) - LogPriorPartial(spec, z, 0, labels[0]);
      CHECK(std::abs(diff - term_diff) < 1e-12);
    }
  }
}

TEST_CASE("discriminative single class at zero equals standard") {
  PriorSpec d = PriorSpec::Discriminative(5, "y", 1);
  PriorSpec s = PriorSpec::Standard(5);
  Vector z = RandomVector(5, 3);
  std::vector<int> label = {0};
  CHECK(LogPrior(d, z, label) == LogPrior(s, z, {}));
}

TEST_CASE("full mean is the concatenation of partial means") {
  PriorSpec spec = PriorSpec::Factorial(LatentPartition({"q", "s"}, {2, 3}), {2, 4});
  spec.InitMeans(9, 1.0);
  std::vector<int> labels = {1, 3};
  Vector full = spec.FullMean(labels);
  CHECK(full.head(2) == Vector(spec.Mean(0, 1)));
  CHECK(full.tail(3) == Vector(spec.Mean(1, 3)));
}

TEST_CASE("label and dimension errors") {
  PriorSpec spec = PriorSpec::Factorial(LatentPartition({"q", "s"}, {1, 1}), {2, 2});
  std::vector<int> bad = {0, 2};
  CHECK_THROWS_AS(LogPrior(spec, Vector::Zero(2), bad), LabelRangeError);
  std::vector<int> short_labels = {0};
  CHECK_THROWS(LogPrior(spec, Vector::Zero(2), short_labels));
  std::vector<int> ok = {0, 1};
  CHECK_THROWS_AS(LogPrior(spec, Vector::Zero(3), ok), DimensionError);
}

TEST_CASE("log likelihood examples") {
  FlowConfig c;
  c.dim = 2;
  c.blocks = 2;
  c.hidden = 4;
  FlowModel id(c);
  id.SetIdentity();
  LogLikelihood ll = ComputeLogLikelihood(id, PriorSpec::Standard(2), Vector::Zero(2), {});
  CHECK(ll.total == doctest::Approx(-kLog2Pi).epsilon(1e-15));
  CHECK(ll.log_det == 0.0);

  PriorSpec d = PriorSpec::Discriminative(2, "y", 3);
  Vector x(2);
  x << 0.7, -1.1;
  d.MutableMean(0, 2) = x;
  std::vector<int> label = {2};
  CHECK(ComputeLogLikelihood(id, d, x, label).total == doctest::Approx(-kLog2Pi).epsilon(1e-15));

  c.dim = 6;
  FlowModel m(c);
  m.InitRandom(12, 0.3);
  PriorSpec f = PriorSpec::Factorial(LatentPartition({"q", "s"}, {3, 3}), {2, 2});
  f.InitMeans(4, 1.0);
  Vector x6 = RandomVector(6, 13);
  std::vector<int> lab = {1, 0};
  LogLikelihood r = ComputeLogLikelihood(m, f, x6, lab);
  double oracle = GaussLogDensity(m.Inverse(x6).z, f.FullMean(lab)) + LogDetNumeric(m, x6, 1e-5);
  CHECK(RelErr(r.total, oracle) < 1e-4);
  CHECK(std::abs(r.total - (r.prior + r.log_det)) < 1e-12);
}

TEST_CASE("prior mean gradient") {
  PriorSpec spec = PriorSpec::Factorial(LatentPartition({"q", "s"}, {2, 1}), {3, 2});
  spec.InitMeans(1, 1.0);
  // Every sample at its class mean: zero gradient.
  LabelTable labels = {{0, 2, 1, 2}, {1, 0, 0, 1}};
  Matrix z(4, 3);
  for (int i = 0; i < 4; ++i) {
    std::vector<int> l = {labels[0][i], labels[1][i]};
    z.row(i) = spec.FullMean(l).transpose();
  }
  for (double g : PriorGradMeans(spec, z, labels)) CHECK(g == 0.0);

  PriorSpec one = PriorSpec::Discriminative(1, "y", 1);
  Matrix z1(1, 1);
  z1(0, 0) = 2.0;
  std::vector<double> g1 = PriorGradMeans(one, z1, {{0}});
  CHECK(g1[0] == 2.0);

  // Central differences of the summed log prior.
  Matrix zr = RandomMatrix(4, 3, 5);
  std::vector<double> g = PriorGradMeans(spec, zr, labels);
  auto sum_log_prior = [&](const PriorSpec &s) { return LogPriorBatch(s, zr, labels).sum(); };
  const double h = 1e-5;
  for (std::size_t k = 0; k < spec.NumMeanParams(); ++k) {
    PriorSpec plus = spec, minus = spec;
    plus.mutable_means()[k] += h;
    minus.mutable_means()[k] -= h;
    double fd = (sum_log_prior(plus) - sum_log_prior(minus)) / (2.0 * h);
    CHECK(RelErr(g[k], fd, 1e-8) < 1e-6);
  }
}

TEST_CASE("prior residuals") {
  PriorSpec spec = PriorSpec::Discriminative(2, "y", 2);
  spec.MutableMean(0, 1) << 1.0, 2.0;
  Matrix z(2, 2);
  z << 3.0, 3.0, 1.0, 1.0;
  Matrix r = PriorResiduals(spec, z, {{1, 0}});
  CHECK(r(0, 0) == 2.0);
  CHECK(r(0, 1) == 1.0);
  CHECK(r(1, 1) == 1.0);
}
