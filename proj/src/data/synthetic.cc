// src/data/synthetic.cc

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

#include "fdnf/data/synthetic.h"

#include <random>

#include <json.hpp>

#include "fdnf/base/error.h"

namespace fdnf {

void SyntheticConfig::Validate() const {
  if (obs_dim < 1) throw ValidationError("synthetic obs_dim must be positive");
  if (factors.empty()) throw ValidationError("synthetic data needs at least one factor");
  for (const auto &f : factors) {
    if (f.num_classes < 1)
      throw ValidationError("factor '" + f.name + "' needs at least one class (K >= 1)");
    if (f.latent_width < 1)
      throw ValidationError("factor '" + f.name + "' needs a positive latent width");
  }
  if (!(mean_stddev >= 0.0)) throw ValidationError("mean_stddev must be non-negative");
  if (!(loading_stddev > 0.0)) throw ValidationError("loading_stddev must be positive");
  if (!(noise_min > 0.0) || !(noise_max >= noise_min))
    throw ValidationError("noise range must satisfy 0 < noise_min <= noise_max");
}

void SyntheticSpec::Validate() const {
  if (obs_dim < 1) throw ValidationError("synthetic obs_dim must be positive");
  if (factors.empty()) throw ValidationError("synthetic data needs at least one factor");
  if (loadings.size() != factors.size() || class_means.size() != factors.size())
    throw ValidationError("one loading matrix and mean table per factor required");
  if (noise.size() != obs_dim) throw ValidationError("noise diagonal has the wrong length");
  if (!((noise.array() > 0.0).all()) || !noise.allFinite())
    throw ValidationError("noise diagonal entries must be positive");
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const Matrix &m = loadings[f];
    if (m.rows() != obs_dim || m.cols() != factors[f].latent_width)
      throw ValidationError("loading matrix of '" + factors[f].name + "' has the wrong shape");
    if (class_means[f].rows() != factors[f].num_classes ||
        class_means[f].cols() != factors[f].latent_width)
      throw ValidationError("class means of '" + factors[f].name + "' have the wrong shape");
    if (m.isZero(0.0)) continue;
    Eigen::ColPivHouseholderQR<Matrix> qr(m);
    qr.setThreshold(1e-10);
    if (qr.rank() < m.cols())
      throw ValidationError("loading matrix of '" + factors[f].name +
                            "' is rank deficient");
  }
}

Vector SyntheticSpec::CellMean(std::span<const int> labels) const {
  Vector mean = Vector::Zero(obs_dim);
  for (std::size_t f = 0; f < factors.size(); ++f)
    mean += loadings[f] * class_means[f].row(labels[f]).transpose();
  return mean;
}

Matrix SyntheticSpec::CellCovariance() const {
  Matrix cov = noise.array().square().matrix().asDiagonal();
  for (const Matrix &m : loadings) cov += m * m.transpose();
  return cov;
}

std::vector<FactorInfo> SyntheticSpec::FactorInfos() const {
  std::vector<FactorInfo> out;
  for (const auto &f : factors) out.push_back({f.name, f.num_classes});
  return out;
}

SyntheticSpec DrawSyntheticSpec(const SyntheticConfig &config) {
  config.Validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(config.noise_min, config.noise_max);
  SyntheticSpec spec;
  spec.obs_dim = config.obs_dim;
  spec.factors = config.factors;
  spec.seed = config.seed;
  for (const auto &f : config.factors) {
    Matrix m(config.obs_dim, f.latent_width);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = config.loading_stddev * normal(rng);
    spec.loadings.push_back(std::move(m));
  }
  for (const auto &f : config.factors) {
    Matrix means(f.num_classes, f.latent_width);
    for (Eigen::Index i = 0; i < means.rows(); ++i)
      for (Eigen::Index j = 0; j < means.cols(); ++j) means(i, j) = config.mean_stddev * normal(rng);
    spec.class_means.push_back(std::move(means));
  }
  spec.noise.resize(config.obs_dim);
  if (config.noise_min == config.noise_max) {
    spec.noise.setConstant(config.noise_min);
  } else {
    for (int d = 0; d < config.obs_dim; ++d) spec.noise(d) = uniform(rng);
  }
  spec.Validate();
  return spec;
}

LabeledDataset GenerateSynthetic(const SyntheticSpec &spec, int n_per_cell,
                                 std::uint64_t sample_seed) {
  spec.Validate();
  if (n_per_cell < 1) throw ValidationError("n_per_cell must be at least 1");
  const int num_factors = static_cast<int>(spec.factors.size());
  std::size_t num_cells = 1;
  for (const auto &f : spec.factors) num_cells *= static_cast<std::size_t>(f.num_classes);
  const std::size_t n = num_cells * static_cast<std::size_t>(n_per_cell);

  std::mt19937_64 rng(sample_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix features(static_cast<Eigen::Index>(n), spec.obs_dim);
  LabelTable labels(num_factors);
  std::vector<std::string> ids;
  ids.reserve(n);

  std::vector<int> cell(num_factors, 0);
  std::size_t row = 0;
  for (std::size_t c = 0; c < num_cells; ++c) {
    std::string cell_name;
    for (int f = 0; f < num_factors; ++f)
      cell_name += spec.factors[f].name + std::to_string(cell[f]) + "-";
    for (int k = 0; k < n_per_cell; ++k, ++row) {
      Vector x = Vector::Zero(spec.obs_dim);
      for (int f = 0; f < num_factors; ++f) {
        Vector v = spec.class_means[f].row(cell[f]).transpose();
        for (Eigen::Index j = 0; j < v.size(); ++j) v(j) += normal(rng);
        x += spec.loadings[f] * v;
      }
      for (int d = 0; d < spec.obs_dim; ++d) x(d) += spec.noise(d) * normal(rng);
      features.row(static_cast<Eigen::Index>(row)) = x.transpose();
      for (int f = 0; f < num_factors; ++f) labels[f].push_back(cell[f]);
      ids.push_back(cell_name + std::to_string(k));
    }
    for (int f = num_factors - 1; f >= 0; --f) {
      if (++cell[f] < spec.factors[f].num_classes) break;
      cell[f] = 0;
    }
  }
  return LabeledDataset(spec.FactorInfos(), std::move(ids), std::move(features),
                        std::move(labels));
}

namespace {

nlohmann::json MatrixToJson(const Matrix &m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix MatrixFromJson(const nlohmann::json &j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw FormatError("matrix has the wrong number of rows");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw FormatError("matrix has the wrong number of columns");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

}  // namespace

std::string SyntheticSpecToJson(const SyntheticSpec &spec) {
  nlohmann::json j;
  j["format"] = "factorial-synthetic-spec v1";
  j["obs_dim"] = spec.obs_dim;
  j["seed"] = spec.seed;
  j["noise"] = std::vector<double>(spec.noise.data(), spec.noise.data() + spec.noise.size());
  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    nlohmann::json jf;
    jf["name"] = spec.factors[f].name;
    jf["num_classes"] = spec.factors[f].num_classes;
    jf["latent_width"] = spec.factors[f].latent_width;
    jf["loading"] = MatrixToJson(spec.loadings[f]);
    jf["class_means"] = MatrixToJson(spec.class_means[f]);
    j["factors"].push_back(jf);
  }
  return j.dump(2) + "\n";
}

SyntheticSpec SyntheticSpecFromJson(const std::string &text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format") != "factorial-synthetic-spec v1")
      throw FormatError("unknown synthetic spec format");
    SyntheticSpec spec;
    spec.obs_dim = j.at("obs_dim").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    auto noise = j.at("noise").get<std::vector<double>>();
    spec.noise = Eigen::Map<Vector>(noise.data(), static_cast<Eigen::Index>(noise.size()));
    for (const auto &jf : j.at("factors")) {
      SyntheticFactor f{jf.at("name").get<std::string>(), jf.at("num_classes").get<int>(),
                        jf.at("latent_width").get<int>()};
      spec.loadings.push_back(MatrixFromJson(jf.at("loading"), spec.obs_dim, f.latent_width));
      spec.class_means.push_back(
          MatrixFromJson(jf.at("class_means"), f.num_classes, f.latent_width));
      spec.factors.push_back(f);
    }
    spec.Validate();
    return spec;
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("malformed synthetic spec: ") + e.what());
  }
}

}  // namespace fdnf
