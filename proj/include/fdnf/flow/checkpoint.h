// include/fdnf/flow/checkpoint.h

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

#ifndef FDNF_FLOW_CHECKPOINT_H_
#define FDNF_FLOW_CHECKPOINT_H_

#include <optional>
#include <string>

#include "fdnf/flow/flow-model.h"
#include "fdnf/prior/prior.h"
#include "fdnf/train/trainer.h"

namespace fdnf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  FlowModel model;
  PriorSpec prior;
  std::optional<TrainState> train_state;
  std::string config_hash;
};

/// Binary checkpoint; see docs/file-formats.md for the byte layout. Every
/// number is little-endian; doubles are IEEE-754 binary64, so a
/// save/load round trip is bit-exact.
void SaveCheckpoint(const std::string &path, const FlowModel &model, const PriorSpec &prior,
                    const TrainState *train_state, const std::string &config_hash);
void WriteCheckpoint(std::ostream &os, const FlowModel &model, const PriorSpec &prior,
                     const TrainState *train_state, const std::string &config_hash);

Checkpoint LoadCheckpoint(const std::string &path);
Checkpoint ReadCheckpoint(std::istream &is);

}  // namespace fdnf

#endif  // FDNF_FLOW_CHECKPOINT_H_
