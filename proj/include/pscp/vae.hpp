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

#ifndef PSCP_VAE_HPP
#define PSCP_VAE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pscp/flow.hpp"  // TrainConfig / TrainResult
#include "pscp/graph.hpp"
#include "pscp/priors.hpp"

namespace pscp {

// MLP VAE with a frozen (possibly mixture) prior. Encoder maps x to a
// diagonal Gaussian posterior (mean, log-variance); decoder maps z to a
// diagonal Gaussian over observations. Both log-variances are clamped so
// variances stay in [1e-4, 1e4].

struct VaeConfig {
  std::size_t dim = 2;     // observation dim
  std::size_t latent = 2;  // latent dim, equal to dim by default
  std::size_t hidden = 64;

  static constexpr double kLogVarLo = -9.210340371976182;  // ln 1e-4
  static constexpr double kLogVarHi = 9.210340371976184;   // ln 1e4
};

struct VaeModel {
  VaeConfig cfg;
  ParamSet params;

  // Output layers start at zero, so the initial posterior is N(0, I) for
  // every input and the initial decoder is N(0, I).
  static VaeModel init(const VaeConfig& cfg, std::uint64_t seed);
};

struct ElboEstimate {
  double reconstruction = 0.0;  // E_q[log p(x|z)], batch mean
  double kl = 0.0;              // KL(q || p_assigned), batch mean
  double total = 0.0;           // reconstruction - kl
  std::size_t n_mc = 0;
};

// Graph-side ELBO for training and gradient checks. eps holds n_mc
// reparameterization draws, each [n, latent], passed in so callers
// control the randomness (common random numbers for finite differences).
// Gaussian components use the closed-form KL; generalized-Gaussian
// components use an MC estimate from the same draws.
struct VaeElboNodes {
  Graph::Id recon;  // scalar
  Graph::Id kl;     // scalar
  Graph::Id total;  // scalar
};
VaeElboNodes vae_elbo_node(Graph& g, const VaeModel& model,
                           const std::vector<Graph::Id>& param_ids,
                           const Tensor& x, const MixturePrior& prior,
                           std::span<const int> assign,
                           const std::vector<Tensor>& eps);

// Numeric ELBO estimate (no gradients kept).
ElboEstimate vae_elbo(const VaeModel& model, const MixturePrior& prior,
                      const Tensor& x, std::span<const int> assign,
                      std::size_t n_mc, std::uint64_t seed);

// Importance-sampled log-likelihood per row:
//   log (1/S) sum_s p(x|z_s) p_mix(z_s) / q(z_s|x)
// with a streaming log-sum-exp over s. The prior term is the full
// mixture regardless of how the model was trained.
std::vector<double> vae_iw_log_likelihood(const VaeModel& model,
                                          const MixturePrior& prior,
                                          const Tensor& x, std::size_t S,
                                          std::uint64_t seed);

// Posterior mean [n, latent]; the latent embedding used downstream.
Tensor vae_encode_mean(const VaeModel& model, const Tensor& x);

// Decoder mean [n, dim] at given latents. Pure function of (model, z).
Tensor vae_decode_mean(const VaeModel& model, const Tensor& z);

// Decoder mean plus decoder-variance noise.
Tensor vae_sample(const VaeModel& model, const Tensor& z, std::uint64_t seed);

// Maximizes the mean ELBO (n_mc = 1 per step) with Adam. Mixture priors
// need a per-row assignment, as in train_flow. Loss trace records -ELBO.
TrainResult train_vae(VaeModel& model, const MixturePrior& prior,
                      const Dataset& data, const ComponentAssignment* assign,
                      const TrainConfig& cfg);

}  // namespace pscp

#endif  // PSCP_VAE_HPP
