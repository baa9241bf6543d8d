// src/cli/run-config.cc

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

#include "fdnf/cli/run-config.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "fdnf/base/error.h"
#include "fdnf/prior/prior.h"

namespace fdnf {

namespace {

struct Entry {
  std::string key;
  std::function<std::string(const RunConfig &)> get;
  std::function<void(RunConfig *, const std::string &)> set;
  bool hashed = true;
};

std::string Num(double v) { return FormatDouble(v); }
std::string Num(long long v) { return std::to_string(v); }

int ToInt(const std::string &v) {
  long long n = ParseInt(v);
  if (n < -2147483647LL || n > 2147483647LL) throw FormatError("integer out of range");
  return static_cast<int>(n);
}

std::uint64_t ToU64(const std::string &v) {
  long long n = ParseInt(v);
  if (n < 0) throw FormatError("seed must not be negative");
  return static_cast<std::uint64_t>(n);
}

bool ToBool(const std::string &v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw FormatError("expected a boolean");
}

std::string FactorsToString(const std::vector<SyntheticFactor> &factors) {
  std::string s;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i > 0) s += ",";
    s += factors[i].name + ":" + std::to_string(factors[i].num_classes) + ":" +
         std::to_string(factors[i].latent_width);
  }
  return s;
}

std::vector<SyntheticFactor> FactorsFromString(const std::string &v) {
  std::vector<SyntheticFactor> out;
  for (const auto &item : SplitString(v, ',')) {
    auto parts = SplitString(Trim(item), ':');
    if (parts.size() != 3) throw FormatError("expected name:classes:width");
    out.push_back({Trim(parts[0]), ToInt(Trim(parts[1])), ToInt(Trim(parts[2]))});
  }
  return out;
}

#define FDNF_INT(k, field) \
  {k, [](const RunConfig &c) { return Num(static_cast<long long>(c.field)); }, \
   [](RunConfig *c, const std::string &v) { c->field = ToInt(v); }}
#define FDNF_DBL(k, field) \
  {k, [](const RunConfig &c) { return Num(c.field); }, \
   [](RunConfig *c, const std::string &v) { c->field = ParseDouble(v); }}
#define FDNF_STR(k, field) \
  {k, [](const RunConfig &c) { return c.field; }, \
   [](RunConfig *c, const std::string &v) { c->field = v; }}

const std::vector<Entry> &Table() {
  static const std::vector<Entry> table = {
      {"seed", [](const RunConfig &c) { return std::to_string(c.seed); },
       [](RunConfig *c, const std::string &v) { c->seed = ToU64(v); }},
      {"out", [](const RunConfig &c) { return c.out; },
       [](RunConfig *c, const std::string &v) { c->out = v; }, false},
      {"threads", [](const RunConfig &c) { return std::to_string(c.threads); },
       [](RunConfig *c, const std::string &v) { c->threads = ToInt(v); }, false},
      {"overwrite", [](const RunConfig &c) { return std::string(c.overwrite ? "true" : "false"); },
       [](RunConfig *c, const std::string &v) { c->overwrite = ToBool(v); }, false},

      FDNF_INT("data.obs_dim", synthetic.obs_dim),
      {"data.factors", [](const RunConfig &c) { return FactorsToString(c.synthetic.factors); },
       [](RunConfig *c, const std::string &v) { c->synthetic.factors = FactorsFromString(v); }},
      FDNF_DBL("data.mean_stddev", synthetic.mean_stddev),
      FDNF_DBL("data.loading_stddev", synthetic.loading_stddev),
      FDNF_DBL("data.noise_min", synthetic.noise_min),
      FDNF_DBL("data.noise_max", synthetic.noise_max),
      FDNF_INT("data.train_per_cell", train_per_cell),
      FDNF_INT("data.test_per_cell", test_per_cell),
      FDNF_STR("data.encoding", data_encoding),
      FDNF_STR("data.train", train_data),
      FDNF_STR("data.test", test_data),

      FDNF_INT("model.blocks", blocks),
      FDNF_INT("model.hidden", hidden),
      FDNF_DBL("model.scale_bound", scale_bound),
      FDNF_DBL("model.bn_momentum", bn_momentum),
      FDNF_DBL("model.bn_epsilon", bn_epsilon),
      FDNF_STR("model.regime", regime),
      FDNF_STR("model.partition", partition),
      FDNF_STR("model.factor", target_factor),
      FDNF_DBL("model.mean_init_stddev", mean_init_stddev),

      FDNF_DBL("train.learning_rate", train.learning_rate),
      FDNF_DBL("train.beta1", train.beta1),
      FDNF_DBL("train.beta2", train.beta2),
      FDNF_DBL("train.adam_epsilon", train.adam_epsilon),
      FDNF_INT("train.batch_size", train.batch_size),
      FDNF_INT("train.epochs", train.epochs),
      {"train.grad_clip",
       [](const RunConfig &c) {
         return c.train.grad_clip ? Num(*c.train.grad_clip) : std::string("none");
       },
       [](RunConfig *c, const std::string &v) {
         if (v == "none" || v == "0") {
           c->train.grad_clip.reset();
         } else {
           c->train.grad_clip = ParseDouble(v);
         }
       }},
      FDNF_INT("train.checkpoint_every", train.checkpoint_every),
      FDNF_STR("train.resume", resume),
      FDNF_STR("checkpoint", checkpoint),

      FDNF_INT("classifier.hidden", classifier.hidden),
      FDNF_INT("classifier.epochs", classifier.epochs),
      FDNF_DBL("classifier.learning_rate", classifier.learning_rate),
      FDNF_INT("classifier.batch_size", classifier.batch_size),
      FDNF_DBL("classifier.validation_fraction", classifier.validation_fraction),

      FDNF_STR("input", input),
      FDNF_STR("encode.factor", encode_factor),
      FDNF_STR("eval.factors", eval_factors),
      FDNF_STR("manipulate.factor", manipulate_factor),
      FDNF_INT("manipulate.from", manipulate_from),
      FDNF_INT("manipulate.to", manipulate_to),
  };
  return table;
}

#undef FDNF_INT
#undef FDNF_DBL
#undef FDNF_STR

const Entry &Find(const std::string &key) {
  for (const auto &e : Table())
    if (e.key == key) return e;
  throw ValidationError("unknown config key '" + key + "'");
}

std::string JoinPath(const std::string &dir, const std::string &name) {
  if (dir.empty()) return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

}  // namespace

RunConfig::RunConfig() { train.epochs = 120; }

const std::vector<std::string> &RunConfig::Keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto &e : Table()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void RunConfig::Set(const std::string &key, const std::string &value) {
  const Entry &e = Find(key);
  try {
    e.set(this, Trim(value));
  } catch (const FormatError &err) {
    throw ValidationError("bad value '" + value + "' for '" + key + "': " + err.what());
  }
}

std::string RunConfig::Get(const std::string &key) const { return Find(key).get(*this); }

std::string RunConfig::Serialize() const {
  std::string s;
  for (const auto &e : Table()) s += e.key + " = " + e.get(*this) + "\n";
  return s;
}

std::string RunConfig::Hash() const {
  std::string s;
  for (const auto &e : Table())
    if (e.hashed) s += e.key + "=" + e.get(*this) + "\n";
  return HexDigest(Fnv1a64(s));
}

void RunConfig::Validate() const {
  if (out.empty()) throw ValidationError("out must not be empty");
  if (threads < 0) throw ValidationError("threads must not be negative");
  synthetic.Validate();
  if (train_per_cell < 1 || test_per_cell < 1)
    throw ValidationError("samples per cell must be positive");
  if (data_encoding != "text" && data_encoding != "binary")
    throw ValidationError("data.encoding must be text or binary");
  FlowConfig fc;
  fc.dim = synthetic.obs_dim;
  fc.blocks = blocks;
  fc.hidden = hidden;
  fc.scale_bound = scale_bound;
  fc.bn_momentum = bn_momentum;
  fc.bn_epsilon = bn_epsilon;
  fc.Validate();
  ParseRegime(regime);
  if (!partition.empty()) {
    for (const auto &item : SplitString(partition, ',')) {
      auto parts = SplitString(Trim(item), ':');
      if (parts.size() != 2) throw ValidationError("model.partition expects name:width,...");
      try {
        ParseInt(Trim(parts[1]));
      } catch (const FormatError &) {
        throw ValidationError("model.partition width '" + parts[1] + "' is not an integer");
      }
    }
  }
  if (!(mean_init_stddev >= 0.0)) throw ValidationError("model.mean_init_stddev must be >= 0");
  train.Validate();
  if (train.checkpoint_every < 0) throw ValidationError("train.checkpoint_every must be >= 0");
  classifier.Validate();
  if (manipulate_from < 0 || manipulate_to < 0)
    throw ValidationError("manipulate classes must not be negative");
}

std::string RunConfig::TrainDataPath() const {
  if (!train_data.empty()) return train_data;
  return JoinPath(out, data_encoding == "binary" ? "train.bin" : "train.txt");
}

std::string RunConfig::TestDataPath() const {
  if (!test_data.empty()) return test_data;
  return JoinPath(out, data_encoding == "binary" ? "test.bin" : "test.txt");
}

std::string RunConfig::CheckpointPath() const {
  return checkpoint.empty() ? JoinPath(out, "model.ckpt") : checkpoint;
}

std::string RunConfig::InputPath() const { return input.empty() ? TestDataPath() : input; }

std::vector<std::string> RunConfig::EvalFactors(const std::vector<std::string> &available) const {
  if (eval_factors.empty()) return available;
  std::vector<std::string> out;
  for (const auto &f : SplitString(eval_factors, ',')) {
    std::string name = Trim(f);
    if (std::find(available.begin(), available.end(), name) == available.end())
      throw ValidationError("eval factor '" + name + "' is not in the data");
    out.push_back(name);
  }
  return out;
}

void LoadConfigFile(const std::string &path, RunConfig *config) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = Trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key = value");
    config->Set(Trim(t.substr(0, eq)), Trim(t.substr(eq + 1)));
  }
}

std::uint64_t DeriveSeed(std::uint64_t seed, const std::string &tag) {
  return Fnv1a64(tag + ":" + std::to_string(seed));
}

}  // namespace fdnf
