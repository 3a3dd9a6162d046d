// Copyright 2026 The pscp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#ifndef PSCP_EXPERIMENT_HPP
#define PSCP_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pscp/data.hpp"
#include "pscp/priors.hpp"

namespace pscp {

// Experiment configuration, read from a JSON file with strict schema
// checking: unknown keys anywhere in the document are rejected before
// any compute happens.

struct ModelSpec {
  std::string kind = "flow";  // "flow" | "vae"
  std::size_t dim = 2;
  std::size_t couplings = 4;
  std::size_t hidden = 64;
  std::size_t latent = 0;  // 0: same as dim
};

struct PriorSpec {
  std::string kind = "standard";  // "standard" | "gaussian" | "gen_gaussian"
  std::size_t k = 1;
  double distance = 8.0;  // mode spacing along the first axis
  double variance = 1.0;  // per-dim, gaussian kind
  double beta = 4.0;      // gen_gaussian shape (unit variance per dim)
  std::optional<std::vector<std::vector<double>>> means;  // overrides spacing

  MixturePrior build(std::size_t dim) const;
  std::vector<std::vector<double>> mode_means(std::size_t dim) const;
};

struct DataSpec {
  // Defaults follow the two-mode setup: means [+-3.5, 0, ...], variance
  // diag [0.5, 1, ..., 1], 10k rows per component, 5k OOD rows at
  // variance 0.01.
  std::optional<std::vector<std::vector<double>>> means;
  std::optional<std::vector<std::vector<double>>> variances;
  std::size_t n_per_component = 10000;
  std::size_t ood_n = 5000;
  double ood_var = 0.01;
  std::optional<std::string> in_csv;   // load instead of generating
  std::optional<std::string> ood_csv;

  SyntheticSpec synthetic(std::size_t dim, std::uint64_t seed) const;
};

struct TrainSpec {
  std::size_t epochs = 150;
  std::size_t batch = 256;
  double lr = 1e-3;
  double beta1 = 0.9;
};

struct EvalSpec {
  std::size_t bins = 80;
  std::size_t iw_samples = 1000;
};

struct AnalysisSpec {
  double g = 1.0;  // uniform channel factor
  std::optional<double> sigma2_psi;  // default: prior component variance
  std::size_t mean_image_samples = 10000;
};

struct ExperimentConfig {
  ModelSpec model;
  PriorSpec prior;
  DataSpec data;
  std::string assignment = "labels";  // "labels" | "kmeans" | "none"
  TrainSpec train;
  EvalSpec eval;
  AnalysisSpec analysis;
  std::vector<double> sweep_distances = {2, 4, 8, 16, 32};
  std::uint64_t seed = 0;
  std::string config_hash;  // FNV-1a of canonical config + seed

  std::size_t latent_dim() const {
    return model.latent ? model.latent : model.dim;
  }
};

ExperimentConfig load_config(const std::string& path,
                             std::optional<std::uint64_t> seed_override);
ExperimentConfig parse_config(const std::string& json_text,
                              std::optional<std::uint64_t> seed_override);

// Subcommand bodies. All paths are created under out_dir; each throws
// ConfigError for bad inputs and NumericFailure for failed numerics.
void cmd_gen_data(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_train(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_eval(const ExperimentConfig& cfg, const std::string& model_path,
              const std::string& out_dir);
void cmd_sweep_distance(const ExperimentConfig& cfg,
                        const std::string& out_dir);
void cmd_analyze(const ExperimentConfig& cfg, const std::string& model_path,
                 const std::string& out_dir);
void cmd_kmeans(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace pscp

#endif  // PSCP_EXPERIMENT_HPP
