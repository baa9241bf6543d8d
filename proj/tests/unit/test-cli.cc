// tests/unit/test-cli.cc

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
#include <filesystem>
#include <sstream>

#include <doctest.h>

#include "fdnf/cli/commands.h"
#include "fdnf/cli/pipeline.h"
#include "fdnf/data/dataset.h"
#include "fdnf/factorize/factorize.h"
#include "fdnf/flow/checkpoint.h"
#include "fdnf/train/trainer.h"
#include "test-util.h"

using namespace fdnf;
using fdnf::testing::RandomMatrix;
using fdnf::testing::ReadAll;
using fdnf::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out, err;
};

CliResult Run(std::vector<std::string> args) {
  args.insert(args.begin(), "fdnf");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Small problem shared by most cases: D=6, factors q (3 classes) and s (2).
std::vector<std::string> Small(const std::string &cmd, const std::string &out) {
  return {cmd,
          "--out", out,
          "--set", "data.obs_dim=6",
          "--set", "data.factors=q:3:3,s:2:3",
          "--set", "data.train_per_cell=12",
          "--set", "data.test_per_cell=4",
          "--set", "model.blocks=2",
          "--set", "model.hidden=8",
          "--set", "train.epochs=4",
          "--set", "train.batch_size=16",
          "--set", "classifier.epochs=3"};
}

std::vector<std::string> With(std::vector<std::string> args,
                              std::initializer_list<std::string> extra) {
  for (const auto &e : extra) {
    args.push_back("--set");
    args.push_back(e);
  }
  return args;
}

bool Empty(const std::string &dir) {
  return !fs::exists(dir) || fs::is_empty(dir);
}

}  // namespace

TEST_CASE("gen-data writes loadable files deterministically") {
  TempDir dir("cli");
  const std::string a = dir.File("a"), b = dir.File("b");
  CliResult r = Run({"gen-data", "--out", a});
  REQUIRE(r.code == kExitOk);
  LabeledDataset train = LoadDataset(a + "/train.txt");
  LabeledDataset test = LoadDataset(a + "/test.txt");
  CHECK(train.Dim() == 16);
  CHECK(train.Size() == 25u * 200u);
  CHECK(test.Size() == 25u * 50u);
  CHECK(fs::exists(a + "/synthetic-spec.json"));
  REQUIRE(Run({"gen-data", "--out", b}).code == kExitOk);
  for (const char *f : {"/train.txt", "/test.txt", "/synthetic-spec.json"})
    CHECK(ReadAll(a + f) == ReadAll(b + f));
  CHECK(ReadAll(a + "/train.txt") != ReadAll(b + "/test.txt"));

  // Existing outputs are not clobbered without --overwrite.
  std::string before = ReadAll(a + "/train.txt");
  CliResult again = Run({"gen-data", "--out", a, "--seed", "9"});
  CHECK(again.code == kExitValidation);
  CHECK(again.err.find("fdnf: error: validation:") == 0);
  CHECK(ReadAll(a + "/train.txt") == before);
  CHECK(Run({"gen-data", "--out", a, "--seed", "9", "--overwrite"}).code == kExitOk);
  CHECK(ReadAll(a + "/train.txt") != before);
}

TEST_CASE("validation failures exit 2 before any output") {
  TempDir dir("cli");
  const std::string out = dir.File("o");
  CHECK(Run({"gen-data", "--out", out, "--set", "data.factors=q:0:4,s:5:4"}).code ==
        kExitValidation);
  CHECK(Empty(out));
  CHECK(Run({"gen-data", "--out", out, "--set", "model.nope=1"}).code == kExitValidation);
  CHECK(Run({"gen-data", "--out", out, "--set", "train.batch_size=0"}).code == kExitValidation);
  CHECK(Run({"gen-data", "--out", out, "--frobnicate"}).code == kExitValidation);
  CHECK(Run({"unknown-command"}).code == kExitValidation);
  CHECK(Empty(out));

  REQUIRE(Run(Small("gen-data", out)).code == kExitOk);
  CliResult bad = Run(With(Small("train", out), {"model.partition=q:3,s:2"}));
  CHECK(bad.code == kExitValidation);
  CHECK(bad.err.find("partition") != std::string::npos);
  CHECK_FALSE(fs::exists(out + "/model.ckpt"));
  CHECK_FALSE(fs::exists(out + "/train.log"));
}

TEST_CASE("config files and overrides") {
  TempDir dir("cli");
  const std::string cfg = dir.File("run.conf");
  std::ofstream(cfg) << "# comment\nseed = 4\ndata.obs_dim = 6  # trailing\n"
                        "data.factors = q:2:3,s:2:3\n";
  RunConfig c;
  LoadConfigFile(cfg, &c);
  CHECK(c.seed == 4u);
  CHECK(c.synthetic.obs_dim == 6);
  CHECK(c.Get("data.factors") == "q:2:3,s:2:3");
  RunConfig d = c;
  d.out = "elsewhere";
  d.threads = 3;
  CHECK(c.Hash() == d.Hash());
  d.Set("train.learning_rate", "0.002");
  CHECK(c.Hash() != d.Hash());
  for (const auto &key : RunConfig::Keys()) {
    RunConfig e;
    e.Set(key, c.Get(key));
    CHECK(e.Get(key) == c.Get(key));
  }
  CHECK_THROWS_AS(c.Set("train.epochs", "ten"), ValidationError);
  CHECK(Run({"gen-data", "--config", dir.File("missing.conf"), "--out", dir.File("x")}).code !=
        kExitOk);
  CHECK(DeriveSeed(1, "train") != DeriveSeed(1, "test"));
  CHECK(DeriveSeed(1, "train") == DeriveSeed(1, "train"));
}

TEST_CASE("train, resume, encode, manipulate and eval") {
  TempDir dir("cli");
  const std::string out = dir.File("run");
  REQUIRE(Run(Small("gen-data", out)).code == kExitOk);
  CliResult t = Run(Small("train", out));
  REQUIRE(t.code == kExitOk);
  CHECK(ReadAll(out + "/train.log").find("epoch 4") != std::string::npos);
  Checkpoint full = LoadCheckpoint(out + "/model.ckpt");
  CHECK(full.train_state->epochs_done == 4);

  // Two epochs, then resume to four.
  const std::string half = dir.File("half"), resumed = dir.File("resumed");
  auto data_paths = {"data.train=" + out + "/train.txt", "data.test=" + out + "/test.txt"};
  std::vector<std::string> h = Small("train", half);
  for (const auto &p : data_paths) h.insert(h.end(), {"--set", p});
  REQUIRE(Run(With(h, {"train.epochs=2"})).code == kExitOk);
  std::vector<std::string> rs = Small("train", resumed);
  for (const auto &p : data_paths) rs.insert(rs.end(), {"--set", p});
  REQUIRE(Run(With(rs, {"train.resume=" + half + "/model.ckpt"})).code == kExitOk);
  Checkpoint cont = LoadCheckpoint(resumed + "/model.ckpt");
  CHECK(GatherParams(full.model, full.prior) == GatherParams(cont.model, cont.prior));
  CHECK(cont.train_state->history.size() == 4u);

  // Encode.
  REQUIRE(Run(Small("encode", out)).code == kExitOk);
  CodeFile codes = ReadCodeFile(out + "/codes.csv");
  CHECK(codes.codes.rows() == 6 * 4);
  CHECK(codes.codes.cols() == 6);
  CHECK(fs::exists(out + "/projection.csv"));
  const std::string part = dir.File("part");
  std::vector<std::string> enc = Small("encode", part);
  enc.insert(enc.end(), {"--set", "checkpoint=" + out + "/model.ckpt", "--set",
                         "data.test=" + out + "/test.txt"});
  REQUIRE(Run(With(enc, {"encode.factor=s"})).code == kExitOk);
  CHECK(ReadCodeFile(part + "/codes.csv").codes.cols() == 3);

  // c1 = c2 leaves the input in place.
  REQUIRE(Run(With(Small("manipulate", out), {"manipulate.factor=q", "manipulate.from=1",
                                              "manipulate.to=1"}))
              .code == kExitOk);
  LabeledDataset moved = LoadDataset(out + "/manipulated.txt");
  LabeledDataset test = LoadDataset(out + "/test.txt");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < test.Size(); ++i)
    if (test.label(0, i) == 1) rows.push_back(i);
  REQUIRE(moved.Size() == rows.size());
  CHECK((moved.features() - test.Subset(rows).features()).cwiseAbs().maxCoeff() < 1e-8);

  REQUIRE(Run(Small("eval", out)).code == kExitOk);
  std::string md = ReadAll(out + "/report.md");
  CHECK(md.find("## Manipulating `q`") != std::string::npos);
  CHECK(md.find("## Manipulating `s`") != std::string::npos);
  CHECK(ReadAll(out + "/report.csv").rfind("# config=", 0) == 0);

  // Same config into a fresh directory gives the same report bytes.
  const std::string again = dir.File("again");
  REQUIRE(Run(Small("gen-data", again)).code == kExitOk);
  REQUIRE(Run(Small("train", again)).code == kExitOk);
  REQUIRE(Run(Small("eval", again)).code == kExitOk);
  CHECK(ReadAll(again + "/report.md") == md);
}

TEST_CASE("small eval report matches the stored golden file") {
  TempDir dir("cli");
  const std::string out = dir.File("g");
  REQUIRE(Run(Small("gen-data", out)).code == kExitOk);
  REQUIRE(Run(Small("train", out)).code == kExitOk);
  REQUIRE(Run(Small("eval", out)).code == kExitOk);
  const std::string golden = std::string(FDNF_SOURCE_DIR) + "/tests/golden/eval-small-report.md";
  REQUIRE(fs::exists(golden));
  CHECK(ReadAll(out + "/report.md") == ReadAll(golden));
}

TEST_CASE("operation and runtime errors") {
  TempDir dir("cli");
  const std::string out = dir.File("std");
  REQUIRE(Run(Small("gen-data", out)).code == kExitOk);
  // Nothing trained yet.
  CliResult missing = Run(Small("eval", out));
  CHECK(missing.code == kExitRuntime);
  CHECK(missing.err.find("fdnf: error: runtime:") == 0);
  REQUIRE(Run(With(Small("train", out), {"model.regime=standard"})).code == kExitOk);
  CHECK(Run(With(Small("encode", out), {"encode.factor=q"})).code == kExitValidation);
  CHECK_FALSE(fs::exists(out + "/codes.csv"));
  CHECK(Run(With(Small("manipulate", out), {"manipulate.factor=q", "manipulate.to=7"})).code ==
        kExitValidation);
}

TEST_CASE("standard regime reaches the Gaussian entropy") {
  TempDir dir("cli");
  const int d = 2, n = 4000;
  Matrix x = RandomMatrix(n, d, 77);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("g" + std::to_string(i));
  LabeledDataset data({{"g", 1}}, ids, x, {std::vector<int>(n, 0)});
  SaveDataset(data, dir.File("gauss.txt"));
  const std::string out = dir.File("o");
  REQUIRE(Run({"train", "--out", out, "--set", "data.train=" + dir.File("gauss.txt"), "--set",
               "model.regime=standard", "--set", "model.blocks=2", "--set", "model.hidden=8",
               "--set", "train.epochs=15", "--set", "train.batch_size=200"})
              .code == kExitOk);
  Checkpoint ck = LoadCheckpoint(out + "/model.ckpt");
  EpochRecord r = EvaluateNll(ck.model, ck.prior, x, {});
  const double entropy = 0.5 * d * (1.0 + std::log(2.0 * M_PI));
  CHECK(std::abs(r.nll - entropy) / d < 0.1);
}
