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

#ifndef PSCP_FLOW_HPP
#define PSCP_FLOW_HPP

#include <cstdint>
#include <vector>

#include "pscp/data.hpp"
#include "pscp/graph.hpp"
#include "pscp/priors.hpp"

namespace pscp {

// Coupling-layer normalizing flow: affine couplings interleaved with
// feature reversals. The passthrough part A is the first ceil(dim/2)
// dims; part B is scaled and shifted by two small tanh MLPs of A. The
// effective scale is exp(clamp(s_raw)) + scale_offset, so it is bounded
// away from zero and from overflow.

struct FlowConfig {
  std::size_t dim = 2;
  std::size_t n_couplings = 4;
  std::size_t hidden = 64;
  double scale_offset = 0.1;
  double s_clamp = 7.0;

  std::size_t split_point() const { return (dim + 1) / 2; }
};

struct FlowModel {
  FlowConfig cfg;
  ParamSet params;

  // Hidden weights get scaled-normal init, output layers start at zero
  // so the initial map is x -> (1 + scale_offset) * x on part B.
  static FlowModel init(const FlowConfig& cfg, std::uint64_t seed);
};

struct FlowForward {
  Tensor z;                     // [n, dim]
  std::vector<double> log_det;  // per sample
};

// Numeric forward pass (no graph, no gradients).
FlowForward flow_forward(const FlowModel& model, const Tensor& x);

// Exact inverse; flow_forward(flow_inverse(z)).z == z to ~1e-6.
Tensor flow_inverse(const FlowModel& model, const Tensor& z);

// log p(x) = log p_prior(z) + log|det dz/dx|, full mixture prior.
std::vector<double> flow_log_likelihood(const FlowModel& model,
                                        const MixturePrior& prior,
                                        const Tensor& x);

// x = flow_inverse(z), z ~ prior. Seeded.
Tensor flow_sample(const FlowModel& model, const MixturePrior& prior,
                   std::size_t n, std::uint64_t seed);
// Same, but drawing from one fixed mixture component.
Tensor flow_sample_component(const FlowModel& model, const MixturePrior& prior,
                             std::size_t component, std::size_t n,
                             std::uint64_t seed);

// Graph-side forward for training. param_ids aligns with
// model.params.entries() (all entries are trainable).
struct FlowGraphOut {
  Graph::Id z;
  Graph::Id log_det;  // [n]
};
FlowGraphOut flow_forward_node(Graph& g, const FlowModel& model,
                               const std::vector<Graph::Id>& param_ids,
                               Graph::Id x);

struct TrainConfig {
  std::size_t epochs = 2000;
  std::size_t batch = 256;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> loss_trace;  // mean NLL (or -ELBO) per epoch
};

// Minimizes mean NLL by Adam. For a mixture prior each row's likelihood
// is evaluated against its assigned component only; pass nullptr for a
// unimodal prior. Deterministic given config + seed.
TrainResult train_flow(FlowModel& model, const MixturePrior& prior,
                       const Dataset& data, const ComponentAssignment* assign,
                       const TrainConfig& cfg);

}  // namespace pscp

#endif  // PSCP_FLOW_HPP
