// tests/unit/test-flow.cc

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
#include <sstream>

#include <doctest.h>

#include "fdnf/base/error.h"
#include "fdnf/flow/checkpoint.h"
#include "fdnf/flow/flow-model.h"
#include "test-util.h"

using namespace fdnf;
using fdnf::testing::RandomMatrix;
using fdnf::testing::RandomVector;
using fdnf::testing::RelErr;

namespace {

FlowModel RandomModel(int dim, int blocks, std::uint64_t seed, double scale = 0.3,
                      int hidden = 16) {
  FlowConfig c;
  c.dim = dim;
  c.blocks = blocks;
  c.hidden = hidden;
  FlowModel m(c);
  m.InitRandom(seed, scale);
  return m;
}

FlowModel IdentityModel(int dim, int blocks = 2) {
  FlowConfig c;
  c.dim = dim;
  c.blocks = blocks;
  c.hidden = 8;
  FlowModel m(c);
  m.SetIdentity();
  return m;
}

}  // namespace

TEST_CASE("identity model maps z to itself with zero log-det") {
  FlowModel m = IdentityModel(5, 3);
  Vector x = RandomVector(5, 7);
  CHECK((m.Forward(x) - x).cwiseAbs().maxCoeff() == 0.0);
  InverseResult r = m.Inverse(x);
  CHECK((r.z - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.log_det == 0.0);
}

TEST_CASE("coupling with a constant shift adds it to the transformed half") {
  CouplingLayer layer(4, 0, 3, 2.0);
  std::vector<double> p(layer.NumParams(), 0.0);
  // Translate-net output bias sits at the very end of the parameter block.
  const double t[2] = {0.75, -1.5};
  p[p.size() - 2] = t[0];
  p[p.size() - 1] = t[1];
  Matrix u = RandomMatrix(3, 4, 11);
  Matrix x = layer.Generate(u, p);
  CHECK((x.leftCols(2) - u.leftCols(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(x(0, 2) == doctest::Approx(u(0, 2) + t[0]).epsilon(1e-15));
  CHECK(x(2, 3) == doctest::Approx(u(2, 3) + t[1]).epsilon(1e-15));
}

TEST_CASE("coupling log-det with a known constant log-scale is -2s") {
  CouplingLayer layer(4, 1, 3, 2.0);
  std::vector<double> p(layer.NumParams(), 0.0);
  const double s = 0.4;
  // Scale-net output bias: raw value r with 2 tanh(r) = s.
  const int net = layer.NetParams();
  p[net - 2] = std::atanh(s / 2.0);
  p[net - 1] = std::atanh(s / 2.0);
  Matrix x = RandomMatrix(5, 4, 3), u;
  Vector ld = layer.Normalize(x, p, &u, nullptr);
  for (int i = 0; i < 5; ++i) CHECK(ld(i) == doctest::Approx(-2.0 * s).epsilon(1e-14));
  // Parity 1 keeps the trailing dims.
  CHECK((u.rightCols(2) - x.rightCols(2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("odd dimension gives the passthrough half the extra dim") {
  CouplingLayer even(5, 0, 4, 2.0), odd(5, 1, 4, 2.0);
  CHECK(even.pass_size() == 3);
  CHECK(even.pass_offset() == 0);
  CHECK(odd.pass_size() == 3);
  CHECK(odd.pass_offset() == 2);
  CHECK(odd.trans_offset() == 0);
}

TEST_CASE("random six-block model round trip") {
  for (int dim : {2, 3, 8}) {
    FlowModel m = RandomModel(dim, 6, 100 + dim);
    Matrix x = RandomMatrix(200, dim, 5 + dim, 2.0);
    Matrix back = m.ForwardBatch(m.InverseBatch(x).z);
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);
    Vector v = x.row(3).transpose();
    CHECK((m.Forward(m.Inverse(v).z) - v).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("total log-det is the sum of per-layer log-dets") {
  FlowModel m = RandomModel(6, 4, 9);
  InverseResult r = m.Inverse(RandomVector(6, 1));
  REQUIRE(r.layer_log_dets.size() == 8u);
  double sum = 0.0;
  for (double v : r.layer_log_dets) sum += v;
  CHECK(std::abs(sum - r.log_det) < 1e-12);
}

TEST_CASE("single and batched inverse agree") {
  FlowModel m = RandomModel(7, 3, 21);
  Matrix x = RandomMatrix(4, 7, 2);
  BatchInverseResult b = m.InverseBatch(x);
  for (int i = 0; i < 4; ++i) {
    InverseResult r = m.Inverse(x.row(i).transpose());
    CHECK((r.z - b.z.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(r.log_det - b.log_det(i)) < 1e-12);
  }
}

TEST_CASE("analytic log-det matches the numerical Jacobian") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FlowModel m = RandomModel(6, seed % 2 == 0 ? 2 : 6, 300 + seed);
    Vector x = RandomVector(6, 400 + seed);
    double analytic = m.Inverse(x).log_det;
    double numeric = LogDetNumeric(m, x, 1e-5);
    CHECK(RelErr(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("numerical log-det of simple maps") {
  FlowModel id = IdentityModel(4);
  CHECK(std::abs(LogDetNumeric(id, RandomVector(4, 3), 1e-5)) < 1e-9);

  // f scales by 2 in every dim, so f^-1 halves: log|det| = -3 log 2.
  FlowModel half = IdentityModel(3, 1);
  auto p = half.mutable_params();
  for (int d = 0; d < 3; ++d) p[half.LayerParamOffset(0) + d] = -std::log(2.0);
  Vector x = RandomVector(3, 8);
  CHECK(half.Forward(x)(1) == doctest::Approx(2.0 * x(1)).epsilon(1e-12));
  CHECK(LogDetNumeric(half, x, 1e-5) == doctest::Approx(-3.0 * std::log(2.0)).epsilon(1e-9));
  CHECK(half.Inverse(x).log_det == doctest::Approx(-3.0 * std::log(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(LogDetNumeric(id, RandomVector(4, 3), 0.0), ValidationError);
}

TEST_CASE("singular numerical Jacobian is reported") {
  // x +- h rounds back to x, so the difference quotients vanish.
  FlowModel m = IdentityModel(2, 1);
  Vector x = Vector::Constant(2, 1e12);
  CHECK_THROWS_AS(LogDetNumeric(m, x, 1e-8), NumericalError);
}

TEST_CASE("dimension mismatch and missing statistics") {
  FlowModel m = RandomModel(4, 2, 1);
  CHECK_THROWS_AS(m.Inverse(RandomVector(3, 1)), DimensionError);
  CHECK_THROWS_AS(m.Forward(RandomVector(5, 1)), DimensionError);
  FlowConfig c;
  c.dim = 4;
  c.blocks = 2;
  c.hidden = 4;
  FlowModel fresh(c);
  fresh.InitForTraining(3);
  CHECK_THROWS_AS(fresh.Inverse(RandomVector(4, 1)), ValidationError);
  CHECK_THROWS_AS(fresh.Forward(RandomVector(4, 1)), ValidationError);
  FlowTape tape;
  CHECK_NOTHROW(fresh.InverseWithTape(RandomMatrix(8, 4, 2), FlowMode::kTraining, &tape));
}

TEST_CASE("non-finite intermediate values name the layer") {
  FlowModel m = IdentityModel(3, 2);
  auto p = m.mutable_params();
  // Batch norm of block 1 is layer 2; a huge gamma overflows there.
  for (int d = 0; d < 3; ++d) p[m.LayerParamOffset(2) + d] = 800.0;
  try {
    m.Inverse(Vector::Ones(3));
    FAIL("expected NumericalError");
  } catch (const NumericalError &e) {
    CHECK(e.layer() == 2);
  }
}

TEST_CASE("batch norm training mode standardizes the batch") {
  BatchNormLayer bn(3, 0.1, 1e-5);
  std::vector<double> p(6, 0.0);
  p[3] = 0.5;  // beta_0
  Matrix x = RandomMatrix(500, 3, 4, 3.0);
  x.col(1).array() += 7.0;
  Matrix y;
  BatchNormCache cache;
  double ld = bn.Normalize(x, p, true, &y, &cache);
  Vector mean = y.colwise().mean();
  CHECK(mean(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(mean(1)) < 1e-12);
  Vector var = (y.rowwise() - mean.transpose()).array().square().colwise().mean();
  Vector bvar = (x.rowwise() - x.colwise().mean()).array().square().colwise().mean();
  for (int d = 0; d < 3; ++d) CHECK(var(d) == doctest::Approx(bvar(d) / (bvar(d) + 1e-5)));
  double expect = 0.0;
  for (int d = 0; d < 3; ++d) expect -= 0.5 * std::log(bvar(d) + 1e-5);
  CHECK(ld == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("batch norm running statistics") {
  BatchNormLayer bn(2, 0.1, 1e-5);
  CHECK_FALSE(bn.stats_initialized());
  Vector m1(2), v1(2), m2(2), v2(2);
  m1 << 1.0, 2.0;
  v1 << 3.0, 4.0;
  m2 << -1.0, 0.0;
  v2 << 1.0, 2.0;
  bn.UpdateRunningStats(m1, v1);
  CHECK(bn.running_mean() == m1);
  CHECK(bn.running_var() == v1);
  bn.UpdateRunningStats(m2, v2);
  CHECK(bn.running_mean()(0) == doctest::Approx(0.9 * 1.0 + 0.1 * -1.0));
  CHECK(bn.running_var()(1) == doctest::Approx(0.9 * 4.0 + 0.1 * 2.0));
  Vector bad(2);
  bad << 1.0, -1.0;
  CHECK_THROWS_AS(bn.SetRunningStats(m1, bad), ValidationError);

  std::vector<double> p = {0.3, -0.2, 1.0, 2.0};
  Matrix x = RandomMatrix(6, 2, 5), y;
  bn.Normalize(x, p, false, &y, nullptr);
  CHECK((bn.Generate(y, p) - x).cwiseAbs().maxCoeff() < 1e-13);
  double expect = 0.3 - 0.5 * std::log(bn.running_var()(0) + 1e-5) - 0.2 -
                  0.5 * std::log(bn.running_var()(1) + 1e-5);
  CHECK(bn.LogDet(p) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("flow config validation") {
  FlowConfig c;
  c.dim = 1;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c.dim = 4;
  c.blocks = 0;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c.blocks = 2;
  c.bn_momentum = 1.5;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  FlowModel m = RandomModel(6, 3, 77);
  PriorSpec prior = PriorSpec::Factorial(LatentPartition({"a", "b"}, {4, 2}), {3, 5});
  prior.InitMeans(5, 1.0);
  TrainState st;
  st.adam.Reset(NumTrainableParams(m, prior));
  st.adam.step = 12;
  for (std::size_t i = 0; i < st.adam.m.size(); ++i) {
    st.adam.m[i] = 0.1 * i;
    st.adam.v[i] = 0.01 * i;
  }
  st.epochs_done = 2;
  st.best_nll = 3.25;
  st.history = {{0, 4.0, -2.0, -2.0}, {1, 3.25, -1.5, -1.75}};

  std::stringstream ss;
  WriteCheckpoint(ss, m, prior, &st, "abc123");
  const std::string bytes = ss.str();
  Checkpoint ck = ReadCheckpoint(ss);
  CHECK(ck.config_hash == "abc123");
  REQUIRE(ck.model.NumParams() == m.NumParams());
  CHECK(std::equal(m.params().begin(), m.params().end(), ck.model.params().begin()));
  for (int b = 0; b < 3; ++b) {
    CHECK(ck.model.batch_norm(b).running_mean() == m.batch_norm(b).running_mean());
    CHECK(ck.model.batch_norm(b).running_var() == m.batch_norm(b).running_var());
  }
  CHECK(ck.prior.partition() == prior.partition());
  CHECK(std::equal(prior.means().begin(), prior.means().end(), ck.prior.means().begin()));
  REQUIRE(ck.train_state.has_value());
  CHECK(ck.train_state->adam.m == st.adam.m);
  CHECK(ck.train_state->history.size() == 2u);

  std::stringstream again;
  WriteCheckpoint(again, ck.model, ck.prior, &*ck.train_state, ck.config_hash);
  CHECK(again.str() == bytes);

  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(ReadCheckpoint(truncated), FormatError);
  std::string corrupt = bytes;
  corrupt[0] = 'X';
  std::stringstream bad(corrupt);
  CHECK_THROWS_AS(ReadCheckpoint(bad), FormatError);
}
