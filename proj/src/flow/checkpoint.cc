// src/flow/checkpoint.cc

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

#include "fdnf/flow/checkpoint.h"

#include <cstring>
#include <fstream>

#include "fdnf/base/binary-io.h"
#include "fdnf/base/error.h"

namespace fdnf {

namespace {

const char kMagic[8] = {'F', 'D', 'N', 'F', 'C', 'K', 'P', 'T'};
const char kEndTag[8] = {'F', 'D', 'N', 'F', '-', 'E', 'N', 'D'};

void WriteTag(std::ostream &os, const char (&tag)[8]) {
  os.write(tag, 8);
  if (!os) throw IoError("write failed");
}

void ExpectTag(std::istream &is, const char (&tag)[8], const char *what) {
  char buf[8];
  is.read(buf, 8);
  if (is.gcount() != 8 || std::memcmp(buf, tag, 8) != 0)
    throw FormatError(std::string("checkpoint: missing ") + what);
}

void WriteVector(std::ostream &os, const Vector &v) {
  WriteF64Array(os, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

Vector ReadVector(std::istream &is, int n) {
  Vector v(n);
  ReadF64Array(is, std::span<double>(v.data(), static_cast<std::size_t>(n)));
  return v;
}

}  // namespace

void WriteCheckpoint(std::ostream &os, const FlowModel &model, const PriorSpec &prior,
                     const TrainState *train_state, const std::string &config_hash) {
  if (model.Dim() != prior.Dim()) throw DimensionError("model and prior dimensions differ");
  const FlowConfig &c = model.config();
  WriteTag(os, kMagic);
  WriteU32(os, kCheckpointVersion);
  WriteU32(os, static_cast<std::uint32_t>(c.dim));
  WriteU32(os, static_cast<std::uint32_t>(c.blocks));
  WriteU32(os, static_cast<std::uint32_t>(c.hidden));
  WriteF64(os, c.scale_bound);
  WriteF64(os, c.bn_momentum);
  WriteF64(os, c.bn_epsilon);
  WriteU64(os, model.NumParams());
  WriteF64Array(os, model.params());
  for (int b = 0; b < model.NumBlocks(); ++b) {
    const BatchNormLayer &bn = model.batch_norm(b);
    WriteU8(os, bn.stats_initialized() ? 1 : 0);
    WriteVector(os, bn.running_mean());
    WriteVector(os, bn.running_var());
  }

  WriteU32(os, static_cast<std::uint32_t>(prior.regime()));
  WriteU32(os, static_cast<std::uint32_t>(prior.NumFactors()));
  for (int f = 0; f < prior.NumFactors(); ++f) {
    WriteString(os, prior.partition().name(f));
    WriteU32(os, static_cast<std::uint32_t>(prior.partition().width(f)));
    WriteU32(os, static_cast<std::uint32_t>(prior.class_count(f)));
  }
  WriteU64(os, prior.NumMeanParams());
  WriteF64Array(os, prior.means());

  WriteU8(os, train_state != nullptr ? 1 : 0);
  if (train_state != nullptr) {
    WriteU64(os, train_state->adam.step);
    WriteU32(os, static_cast<std::uint32_t>(train_state->epochs_done));
    WriteU64(os, train_state->adam.m.size());
    WriteF64Array(os, train_state->adam.m);
    WriteF64Array(os, train_state->adam.v);
    WriteF64(os, train_state->best_nll);
    WriteU32(os, static_cast<std::uint32_t>(train_state->history.size()));
    for (const EpochRecord &r : train_state->history) {
      WriteU32(os, static_cast<std::uint32_t>(r.epoch));
      WriteF64(os, r.nll);
      WriteF64(os, r.prior_term);
      WriteF64(os, r.entropy_term);
    }
  }
  WriteString(os, config_hash);
  WriteTag(os, kEndTag);
}

void SaveCheckpoint(const std::string &path, const FlowModel &model, const PriorSpec &prior,
                    const TrainState *train_state, const std::string &config_hash) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  WriteCheckpoint(os, model, prior, train_state, config_hash);
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

Checkpoint ReadCheckpoint(std::istream &is) {
  ExpectTag(is, kMagic, "magic");
  std::uint32_t version = ReadU32(is);
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  FlowConfig c;
  c.dim = static_cast<int>(ReadU32(is));
  c.blocks = static_cast<int>(ReadU32(is));
  c.hidden = static_cast<int>(ReadU32(is));
  c.scale_bound = ReadF64(is);
  c.bn_momentum = ReadF64(is);
  c.bn_epsilon = ReadF64(is);
  if (c.dim > (1 << 20) || c.blocks > 4096 || c.hidden > (1 << 20))
    throw FormatError("implausible checkpoint dimensions");
  try {
    c.Validate();
  } catch (const ValidationError &e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }

  Checkpoint ck;
  ck.model = FlowModel(c);
  if (ReadU64(is) != ck.model.NumParams())
    throw FormatError("checkpoint parameter count does not match its architecture");
  ReadF64Array(is, ck.model.mutable_params());
  for (int b = 0; b < ck.model.NumBlocks(); ++b) {
    bool initialized = ReadU8(is) != 0;
    Vector mean = ReadVector(is, c.dim);
    Vector var = ReadVector(is, c.dim);
    if (initialized) ck.model.mutable_batch_norm(b).SetRunningStats(mean, var);
  }

  std::uint32_t regime = ReadU32(is);
  if (regime > 2) throw FormatError("unknown prior regime in checkpoint");
  std::uint32_t num_factors = ReadU32(is);
  if (num_factors < 1 || num_factors > 1024) throw FormatError("implausible factor count");
  std::vector<std::string> names;
  std::vector<int> widths, counts;
  for (std::uint32_t f = 0; f < num_factors; ++f) {
    names.push_back(ReadString(is, 4096));
    widths.push_back(static_cast<int>(ReadU32(is)));
    counts.push_back(static_cast<int>(ReadU32(is)));
  }
  try {
    ck.prior = PriorSpec(static_cast<PriorRegime>(regime), LatentPartition(names, widths), counts);
  } catch (const ValidationError &e) {
    throw FormatError(std::string("checkpoint prior: ") + e.what());
  }
  if (ck.prior.Dim() != c.dim) throw FormatError("checkpoint prior does not match model dimension");
  if (ReadU64(is) != ck.prior.NumMeanParams())
    throw FormatError("checkpoint mean table has the wrong size");
  ReadF64Array(is, ck.prior.mutable_means());

  if (ReadU8(is) != 0) {
    TrainState st;
    st.adam.step = ReadU64(is);
    st.epochs_done = static_cast<int>(ReadU32(is));
    std::uint64_t n = ReadU64(is);
    if (n != NumTrainableParams(ck.model, ck.prior))
      throw FormatError("checkpoint optimizer state does not match the parameters");
    st.adam.m.resize(n);
    st.adam.v.resize(n);
    ReadF64Array(is, st.adam.m);
    ReadF64Array(is, st.adam.v);
    st.best_nll = ReadF64(is);
    std::uint32_t h = ReadU32(is);
    if (h > (1u << 24)) throw FormatError("implausible history length");
    for (std::uint32_t k = 0; k < h; ++k) {
      EpochRecord r;
      r.epoch = static_cast<int>(ReadU32(is));
      r.nll = ReadF64(is);
      r.prior_term = ReadF64(is);
      r.entropy_term = ReadF64(is);
      st.history.push_back(r);
    }
    ck.train_state = std::move(st);
  }
  ck.config_hash = ReadString(is, 256);
  ExpectTag(is, kEndTag, "end tag");
  return ck;
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint '" + path + "'");
  return ReadCheckpoint(is);
}

}  // namespace fdnf
