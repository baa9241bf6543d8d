// include/fdnf/cli/commands.h

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

#ifndef FDNF_CLI_COMMANDS_H_
#define FDNF_CLI_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

#include "fdnf/cli/run-config.h"

namespace fdnf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// Each command validates the config and checks that none of its outputs
/// exist (unless overwrite is set) before touching the file system.
/// Errors are thrown; RunCli() maps them to exit codes.

/// train.txt/test.txt (or .bin), synthetic-spec.json, config.txt.
void CmdGenData(const RunConfig &config, std::ostream &log);
/// Checkpoint (plus periodic ones) and train.log.
void CmdTrain(const RunConfig &config, std::ostream &log);
/// codes.csv and projection.csv for the input dataset.
void CmdEncode(const RunConfig &config, std::ostream &log);
/// manipulated.txt: the input rows of class manipulate.from, moved to
/// manipulate.to, with that label updated.
void CmdManipulate(const RunConfig &config, std::ostream &log);
/// report.md and report.csv for one checkpoint.
void CmdEval(const RunConfig &config, std::ostream &log);
/// Data, the NF/DNF/f-DNF models and the comparative report.
void CmdBench(const RunConfig &config, std::ostream &log);

/// Full command line: `fdnf <command> [--config F] [--seed N] [--out DIR]
/// [--threads N] [--overwrite] [--set key=value ...]`.
int RunCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace fdnf

#endif  // FDNF_CLI_COMMANDS_H_
