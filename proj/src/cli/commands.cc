// src/cli/commands.cc

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

#include "fdnf/cli/commands.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "fdnf/base/error.h"
#include "fdnf/cli/pipeline.h"
#include "fdnf/eval/projection.h"
#include "fdnf/factorize/factorize.h"
#include "fdnf/flow/checkpoint.h"

namespace fdnf {

namespace {

namespace fs = std::filesystem;

std::string Join(const std::string &dir, const std::string &name) {
  return (fs::path(dir) / name).string();
}

// Refuses to clobber existing outputs unless overwrite is set.
void GuardOutputs(const RunConfig &config, const std::vector<std::string> &paths) {
  if (config.overwrite) return;
  for (const auto &p : paths)
    if (fs::exists(p)) throw ValidationError("output '" + p + "' exists; pass --overwrite");
}

void MakeOutDir(const RunConfig &config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw IoError("cannot create directory '" + config.out + "': " + ec.message());
}

void WriteFile(const std::string &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

DatasetEncoding Encoding(const RunConfig &config) {
  return config.data_encoding == "binary" ? DatasetEncoding::kBinary : DatasetEncoding::kText;
}

std::string ConfigFileText(const RunConfig &config) {
  return "# fdnf run config; hash " + config.Hash() + "\n" + config.Serialize();
}

// Copies everything written to it into two streams.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf *a, std::streambuf *b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == traits_type::eof()) return traits_type::not_eof(c);
    if (a_->sputc(static_cast<char>(c)) == traits_type::eof()) return traits_type::eof();
    if (b_->sputc(static_cast<char>(c)) == traits_type::eof()) return traits_type::eof();
    return c;
  }
  int sync() override { return (a_->pubsync() == 0 && b_->pubsync() == 0) ? 0 : -1; }

 private:
  std::streambuf *a_, *b_;
};

Checkpoint LoadModel(const RunConfig &config) {
  const std::string path = config.CheckpointPath();
  if (!fs::exists(path)) throw IoError("checkpoint '" + path + "' not found");
  return LoadCheckpoint(path);
}

void CheckDataMatches(const Checkpoint &ck, const LabeledDataset &data, const std::string &what) {
  if (data.Dim() != ck.model.Dim())
    throw DimensionError(what + " has D=" + std::to_string(data.Dim()) + " but the model has D=" +
                         std::to_string(ck.model.Dim()));
}

std::string ReportMarkdown(const std::vector<ManipulationReport> &reports,
                           const std::string &hash) {
  std::ostringstream os;
  WriteReportMarkdown(os, reports);
  os << "\nconfig " << hash << "\n";
  return os.str();
}

std::string ReportCsv(const std::vector<ManipulationReport> &reports, const std::string &hash) {
  std::ostringstream os;
  os << "# config=" << hash << "\n";
  WriteReportCsv(os, reports);
  return os.str();
}

}  // namespace

void CmdGenData(const RunConfig &config, std::ostream &log) {
  config.Validate();
  const std::string train = config.TrainDataPath(), test = config.TestDataPath();
  const std::string spec_path = Join(config.out, "synthetic-spec.json");
  const std::string cfg_path = Join(config.out, "config.txt");
  GuardOutputs(config, {train, test, spec_path, cfg_path});
  DataSplit data = GenerateData(config);
  MakeOutDir(config);
  const std::string hash = config.Hash();
  SaveDataset(data.train, train, Encoding(config), hash);
  SaveDataset(data.test, test, Encoding(config), hash);
  WriteFile(spec_path, SyntheticSpecToJson(data.spec) + "\n");
  WriteFile(cfg_path, ConfigFileText(config));
  log << "wrote " << data.train.Size() << " training and " << data.test.Size()
      << " test samples to " << config.out << "\n";
}

void CmdTrain(const RunConfig &config, std::ostream &log) {
  config.Validate();
  const std::string ckpt_path = config.CheckpointPath();
  const std::string log_path = Join(config.out, "train.log");
  GuardOutputs(config, {ckpt_path, log_path});
  LabeledDataset train = LoadDataset(config.TrainDataPath());
  const PriorRegime regime = ParseRegime(config.regime);
  const std::string hash = config.Hash();

  FlowModel model;
  PriorSpec prior;
  TrainState state;
  if (!config.resume.empty()) {
    if (!fs::exists(config.resume))
      throw IoError("resume checkpoint '" + config.resume + "' not found");
    Checkpoint ck = LoadCheckpoint(config.resume);
    if (!ck.train_state) throw ValidationError("resume checkpoint has no optimizer state");
    if (ck.prior.regime() != regime)
      throw ValidationError(std::string("resume checkpoint has regime ") +
                            RegimeName(ck.prior.regime()) + ", config asks for " +
                            RegimeName(regime));
    CheckDataMatches(ck, train, "training data");
    PriorLabels(ck.prior, train);
    model = std::move(ck.model);
    prior = std::move(ck.prior);
    state = std::move(*ck.train_state);
  } else {
    prior = BuildPrior(config, train, regime);
    model = FlowModel(BuildFlowConfig(config, train.Dim()));
    model.InitForTraining(DeriveSeed(config.seed, "init-model"));
    prior.InitMeans(DeriveSeed(config.seed, "means-model"), config.mean_init_stddev);
  }
  TrainConfig tc = config.train;
  tc.seed = DeriveSeed(config.seed, "batches-model");

  MakeOutDir(config);
  std::ofstream log_file(log_path, std::ios::trunc);
  if (!log_file) throw IoError("cannot open '" + log_path + "'");
  TeeBuf tee(log_file.rdbuf(), log.rdbuf());
  std::ostream tee_stream(&tee);
  TrainHooks hooks;
  hooks.log = &tee_stream;
  if (tc.checkpoint_every > 0) {
    hooks.on_checkpoint = [&](int epoch, const FlowModel &m, const PriorSpec &p,
                              const TrainState &s) {
      fs::path base(ckpt_path);
      std::string name = base.stem().string() + "-epoch" + std::to_string(epoch) +
                         base.extension().string();
      SaveCheckpoint((base.parent_path() / name).string(), m, p, &s, hash);
    };
  }
  tee_stream << "regime " << RegimeName(prior.regime()) << " D=" << model.Dim() << " params "
             << NumTrainableParams(model, prior) << " config " << hash << "\n";
  try {
    Train(&model, &prior, train, tc, &state, hooks);
  } catch (const TrainingDiverged &e) {
    tee_stream << "diverged at epoch " << e.epoch() << " layer " << e.layer() << ": " << e.what()
               << "\n";
    SaveCheckpoint(ckpt_path, model, prior, &state, hash);
    throw;
  }
  SaveCheckpoint(ckpt_path, model, prior, &state, hash);
  tee_stream << "saved " << ckpt_path << "\n";
  tee_stream.flush();
}

void CmdEncode(const RunConfig &config, std::ostream &log) {
  config.Validate();
  const std::string codes_path = Join(config.out, "codes.csv");
  const std::string proj_path = Join(config.out, "projection.csv");
  GuardOutputs(config, {codes_path, proj_path});
  Checkpoint ck = LoadModel(config);
  LabeledDataset data = LoadDataset(config.InputPath());
  CheckDataMatches(ck, data, "input data");

  CodeFile codes;
  codes.regime = RegimeName(ck.prior.regime());
  for (const auto &f : data.factors()) codes.factor_names.push_back(f.name);
  codes.ids = data.ids();
  codes.labels = data.labels();
  codes.config_hash = config.Hash();
  Matrix z = EncodeBatch(ck.model, data.features());
  if (config.encode_factor.empty()) {
    codes.partition = ck.prior.partition();
    codes.codes = std::move(z);
  } else {
    const int pf = ck.prior.partition().FindFactor(config.encode_factor);
    if (ck.prior.regime() != PriorRegime::kFactorial || pf < 0)
      throw ValidationError("partial code '" + config.encode_factor +
                            "' needs a factorial model whose partition contains it (model is " +
                            RegimeName(ck.prior.regime()) + ")");
    codes.partition = LatentPartition({config.encode_factor}, {ck.prior.partition().width(pf)});
    codes.codes = z.middleCols(ck.prior.partition().offset(pf), ck.prior.partition().width(pf));
  }
  MakeOutDir(config);
  WriteCodeFile(codes, codes_path);
  if (codes.codes.cols() >= 2 && codes.codes.rows() >= 2) {
    Projection p = Project2d(codes.codes);
    WriteProjectionCsv(proj_path, codes.ids, codes.factor_names, codes.labels, p.coords);
  }
  log << "encoded " << data.Size() << " samples to " << codes_path << "\n";
}

void CmdManipulate(const RunConfig &config, std::ostream &log) {
  config.Validate();
  const std::string out_path = Join(config.out, "manipulated.txt");
  GuardOutputs(config, {out_path});
  if (config.manipulate_factor.empty()) throw ValidationError("manipulate.factor is not set");
  Checkpoint ck = LoadModel(config);
  LabeledDataset train = LoadDataset(config.TrainDataPath());
  LabeledDataset input = LoadDataset(config.InputPath());
  CheckDataMatches(ck, train, "training data");
  CheckDataMatches(ck, input, "input data");
  const int f = input.FactorIndex(config.manipulate_factor);
  const int k = input.factor(f).class_count;
  if (config.manipulate_from >= k || config.manipulate_to >= k)
    throw ValidationError("manipulate classes must be below " + std::to_string(k));
  ClassMeanTable means = ClassMeans(ck.model, ck.prior, train, config.manipulate_factor);
  ShiftVector(means, config.manipulate_from, config.manipulate_to);

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < input.Size(); ++i)
    if (input.label(f, i) == config.manipulate_from) rows.push_back(i);
  if (rows.empty())
    throw ValidationError("input has no samples of class " +
                          std::to_string(config.manipulate_from));
  LabeledDataset sub = input.Subset(rows);
  Matrix moved = ManipulateBatch(ck.model, means, sub.features(), config.manipulate_from,
                                 config.manipulate_to);
  LabelTable labels = sub.labels();
  for (int &y : labels[f]) y = config.manipulate_to;
  LabeledDataset out(sub.factors(), sub.ids(), std::move(moved), std::move(labels));
  MakeOutDir(config);
  SaveDataset(out, out_path, DatasetEncoding::kText, config.Hash());
  log << "moved " << rows.size() << " samples of " << config.manipulate_factor << " class "
      << config.manipulate_from << " to class " << config.manipulate_to << "\n";
}

void CmdEval(const RunConfig &config, std::ostream &log) {
  config.Validate();
  const std::string md = Join(config.out, "report.md"), csv = Join(config.out, "report.csv");
  GuardOutputs(config, {md, csv});
  Checkpoint ck = LoadModel(config);
  LabeledDataset train = LoadDataset(config.TrainDataPath());
  LabeledDataset test = LoadDataset(config.TestDataPath());
  CheckDataMatches(ck, train, "training data");
  CheckDataMatches(ck, test, "test data");
  if (!(train.factors() == test.factors()))
    throw ValidationError("training and test data declare different factors");
  std::vector<std::string> names;
  for (const auto &f : train.factors()) names.push_back(f.name);
  std::vector<std::string> factors = config.EvalFactors(names);

  std::vector<ClassifierTraining> clf = TrainFactorClassifiers(config, train, &log);
  std::vector<const MlpClassifier *> ptrs;
  for (const auto &c : clf) ptrs.push_back(&c.classifier);
  std::vector<ManipulationReport> reports;
  for (const auto &f : factors) {
    ClassMeanTable means = ClassMeans(ck.model, ck.prior, train, f);
    for (int c : means.EmptyClasses())
      log << "warning: class " << c << " of " << f << " has no training samples\n";
    reports.push_back(
        ManipulationEval(ck.model, means, ptrs, test, f, RegimeName(ck.prior.regime())));
    if (reports.back().skipped_pairs > 0)
      log << "warning: skipped " << reports.back().skipped_pairs << " pairs of " << f << "\n";
  }
  const std::string hash = config.Hash();
  MakeOutDir(config);
  WriteFile(md, ReportMarkdown(reports, hash));
  WriteFile(csv, ReportCsv(reports, hash));
  log << "wrote " << md << "\n";
}

void CmdBench(const RunConfig &config, std::ostream &log) {
  config.Validate();
  const std::string train = config.TrainDataPath(), test = config.TestDataPath();
  const std::string md = Join(config.out, "report.md"), csv = Join(config.out, "report.csv");
  const std::string structure = Join(config.out, "structure.csv");
  const std::string cfg_path = Join(config.out, "config.txt");
  GuardOutputs(config, {train, test, md, csv, structure, cfg_path});
  ParseRegime(config.regime);
  DataSplit data = GenerateData(config);
  const std::string hash = config.Hash();
  std::vector<TrainedModel> models;
  BenchResult result = RunBenchOn(config, data, &log, &models);

  MakeOutDir(config);
  SaveDataset(data.train, train, Encoding(config), hash);
  SaveDataset(data.test, test, Encoding(config), hash);
  WriteFile(Join(config.out, "synthetic-spec.json"), SyntheticSpecToJson(data.spec) + "\n");
  WriteFile(cfg_path, ConfigFileText(config));
  for (const auto &m : models)
    SaveCheckpoint(Join(config.out, "model-" + m.name + ".ckpt"), m.model, m.prior, &m.state, hash);
  std::ostringstream report;
  WriteBenchMarkdown(report, result);
  WriteFile(md, report.str());
  WriteFile(csv, ReportCsv(result.reports, hash));
  std::ostringstream sc;
  WriteStructureCsv(sc, result.structure);
  WriteFile(structure, sc.str());
  log << "wrote " << md << "\n";
}

int RunCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Factorial discriminative normalizing flows"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = -1;
  bool overwrite = false;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value config file");
  auto *seed_opt = app.add_option("--seed", seed, "run seed");
  auto *out_opt = app.add_option("--out", out_dir, "output directory");
  auto *threads_opt = app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_flag("--overwrite", overwrite, "replace existing outputs");
  app.add_option("--set", sets, "config override key=value (repeatable)");
  app.fallthrough();

  using Cmd = void (*)(const RunConfig &, std::ostream &);
  const std::vector<std::pair<std::string, Cmd>> commands = {
      {"gen-data", CmdGenData}, {"train", CmdTrain}, {"encode", CmdEncode},
      {"manipulate", CmdManipulate}, {"eval", CmdEval}, {"bench", CmdBench}};
  const std::vector<std::string> help = {
      "generate the synthetic train/test datasets", "train a flow model",
      "export latent codes and a 2D projection", "move samples to another class of one factor",
      "posterior-delta evaluation of a checkpoint", "full NF / DNF / f-DNF comparison"};
  for (std::size_t i = 0; i < commands.size(); ++i)
    app.add_subcommand(commands[i].first, help[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "fdnf: error: usage: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) LoadConfigFile(config_path, &config);
    for (const auto &s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
      config.Set(Trim(s.substr(0, eq)), Trim(s.substr(eq + 1)));
    }
    if (*seed_opt) config.seed = seed;
    if (*out_opt) config.out = out_dir;
    if (*threads_opt) config.threads = threads;
    if (overwrite) config.overwrite = true;
    config.Validate();
    SetNumThreads(config.threads);
    for (const auto &[name, fn] : commands) {
      if (app.got_subcommand(name)) {
        fn(config, err);
        break;
      }
    }
  } catch (const ValidationError &e) {
    err << "fdnf: error: validation: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DimensionError &e) {
    err << "fdnf: error: validation: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception &e) {
    err << "fdnf: error: runtime: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace fdnf
