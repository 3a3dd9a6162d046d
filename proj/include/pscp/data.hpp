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

#ifndef PSCP_DATA_HPP
#define PSCP_DATA_HPP

#include <optional>
#include <string>
#include <vector>

#include "pscp/priors.hpp"
#include "pscp/rng.hpp"
#include "pscp/tensor.hpp"

namespace pscp {

// Row-major sample matrix with optional ground-truth component labels.
struct Dataset {
  Tensor rows;                             // [n, d]
  std::optional<std::vector<int>> labels;  // per-row, in [0, #components)
  std::string source;

  std::size_t size() const { return rows.rank() == 2 ? rows.rows() : 0; }
  std::size_t dim() const { return rows.rank() == 2 ? rows.cols() : 0; }
  std::span<const double> row(std::size_t i) const {
    return {rows.data() + i * dim(), dim()};
  }
};

struct SyntheticSpec {
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> variances;  // diagonal
  std::size_t n_per_component = 10000;
  std::uint64_t seed = 0;
};

// n points per component from a diagonal-covariance Gaussian mixture,
// labels recorded.
Dataset gen_mixture(const SyntheticSpec& spec);

// n i.i.d. draws from N(0, var * I); the adversarial distribution.
Dataset gen_ood(std::size_t dim, std::uint64_t seed, std::size_t n,
                double var = 0.01);

struct KMeansResult {
  Tensor centroids;  // [k, d]
  ComponentAssignment assignment;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

// Lloyd iterations from a k-means++ (D^2-sampled) initialization, run to
// assignment fixpoint or max_iter. An emptied cluster is re-seeded at the
// point farthest from its nearest centroid.
KMeansResult kmeans(const Dataset& data, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 100);

enum class AssignMode { kLabels, kKMeans };

// Component assignment for training. kLabels uses the stored generator
// labels; kKMeans clusters and canonicalizes cluster order by ascending
// centroid first coordinate so component 0 is always the leftmost mode.
ComponentAssignment assign_components(const Dataset& data, AssignMode mode,
                                      std::size_t k = 0, std::uint64_t seed = 0);

// CSV with header x0,...,x{d-1}[,label]; 17 significant digits so f64
// round-trips losslessly. Reading streams row by row.
void csv_write(const std::string& path, const Dataset& data);
Dataset csv_read(const std::string& path);

}  // namespace pscp

#endif  // PSCP_DATA_HPP
