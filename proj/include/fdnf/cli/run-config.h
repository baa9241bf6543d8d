// include/fdnf/cli/run-config.h

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

#ifndef FDNF_CLI_RUN_CONFIG_H_
#define FDNF_CLI_RUN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fdnf/data/synthetic.h"
#include "fdnf/eval/mlp-classifier.h"
#include "fdnf/flow/flow-model.h"
#include "fdnf/train/adam.h"

namespace fdnf {

/// Everything a command needs, merged from the key=value config file and
/// command-line overrides. Paths left empty resolve under `out`.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out = "fdnf-out";
  int threads = 0;
  bool overwrite = false;

  // Synthetic data.
  SyntheticConfig synthetic;
  int train_per_cell = 200;
  int test_per_cell = 50;
  std::string data_encoding = "text";
  std::string train_data;
  std::string test_data;

  // Flow and prior.
  int blocks = 6;
  int hidden = 64;
  double scale_bound = 2.0;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
  std::string regime = "factorial";
  std::string partition;       // name:width,...; empty splits D evenly over the data factors
  std::string target_factor;   // discriminative regime; empty means the first data factor
  double mean_init_stddev = 1.0;

  TrainConfig train;
  std::string resume;
  std::string checkpoint;      // empty means <out>/model.ckpt

  MlpConfig classifier;

  std::string input;           // encode/manipulate input; empty means the test data
  std::string encode_factor;   // export only this partial code
  std::string eval_factors;    // comma list; empty means every data factor
  std::string manipulate_factor;
  int manipulate_from = 0;
  int manipulate_to = 0;

  RunConfig();

  /// Throws ValidationError on the first bad field.
  void Validate() const;

  /// Sets one key from its text form. Unknown keys and unparsable values
  /// throw ValidationError.
  void Set(const std::string &key, const std::string &value);
  std::string Get(const std::string &key) const;
  static const std::vector<std::string> &Keys();

  /// Canonical "key = value" lines for every key, in Keys() order.
  std::string Serialize() const;
  /// FNV-1a of the canonical form, leaving out keys that do not change
  /// results (out, threads, overwrite).
  std::string Hash() const;

  std::string TrainDataPath() const;
  std::string TestDataPath() const;
  std::string CheckpointPath() const;
  std::string InputPath() const;
  std::vector<std::string> EvalFactors(const std::vector<std::string> &available) const;
};

/// Reads "key = value" lines; '#' starts a comment. Later lines win.
void LoadConfigFile(const std::string &path, RunConfig *config);

/// Seed for one pipeline stage, derived from the run seed and a tag.
std::uint64_t DeriveSeed(std::uint64_t seed, const std::string &tag);

}  // namespace fdnf

#endif  // FDNF_CLI_RUN_CONFIG_H_
