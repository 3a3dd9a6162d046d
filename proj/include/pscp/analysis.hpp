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

#ifndef PSCP_ANALYSIS_HPP
#define PSCP_ANALYSIS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "pscp/data.hpp"
#include "pscp/flow.hpp"
#include "pscp/priors.hpp"
#include "pscp/vae.hpp"

namespace pscp {

// Second-order likelihood-gap analysis: how much the expected
// log-likelihood of one dataset exceeds another's, to second order in
// the deviation statistics around per-component mean images.

// Per-component squared-deviation statistics of a dataset under an
// allocation. sigma2[i] is empty when component i received no rows.
struct ComponentStats {
  std::vector<std::vector<double>> mean_image;  // [k][dim], as supplied
  std::vector<std::vector<double>> sigma2;      // [k][dim] mean sq deviation
  std::vector<double> w;                        // allocation ratio, sums to 1
  std::vector<std::size_t> n;                   // rows per component

  std::size_t k() const { return w.size(); }
  std::size_t dim() const { return mean_image.empty() ? 0 : mean_image[0].size(); }
  bool occupied(std::size_t i) const { return n[i] > 0; }
};

// Per-channel multipliers g_c with a map from flat dims to channels.
// Default: every dim its own channel with g = 1.
struct ChannelFactors {
  std::vector<double> g;
  std::vector<std::size_t> channel_of;  // dim -> channel

  static ChannelFactors unit(std::size_t dim);
  void validate(std::size_t dim) const;
};

struct SecondOrderReport {
  ComponentStats in_stats;   // D*: the reference (in-distribution) data
  ComponentStats out_stats;  // D: the data being compared against it
  double delta = 0.0;
  bool has_bound = false;
  double bound = 0.0;
  std::size_t argmax_out = 0;  // component of D minimizing its deviation
  std::size_t argmax_in = 0;   // component of D* maximizing its deviation
  double sigma2_psi = 1.0;
};

// Nearest-component-mean allocation by Euclidean distance in latent
// space; ties go to the lowest index. K=1 allocates everything to 0.
ComponentAssignment allocate_nearest(const Tensor& latents,
                                     const MixturePrior& prior);
ComponentAssignment allocate_nearest(const FlowModel& model,
                                     const MixturePrior& prior,
                                     const Tensor& x);
ComponentAssignment allocate_nearest(const VaeModel& model,
                                     const MixturePrior& prior,
                                     const Tensor& x);

// Observation-space mean of component i: the elementwise mean of
// n_samples decoded draws, plus a deterministic alternative (the decode
// of the component mean itself).
struct MeanImage {
  std::vector<double> sampled;  // mean of decoded draws
  std::vector<double> decoded;  // flow_inverse(mu_i) / decode_mean(mu_i)
};
MeanImage component_mean_image(const FlowModel& model,
                               const MixturePrior& prior, std::size_t i,
                               std::size_t n_samples, std::uint64_t seed);
MeanImage component_mean_image(const VaeModel& model,
                               const MixturePrior& prior, std::size_t i,
                               std::size_t n_samples, std::uint64_t seed);

// sigma2[i][dim] = mean over rows allocated to i of (x - mean_image_i)^2.
// Deviations are taken from the supplied mean images, not the data means,
// so these are not variances in general.
ComponentStats component_sigma(const Dataset& data,
                               const ComponentAssignment& assignment,
                               const std::vector<std::vector<double>>& mean_images);

// delta = -(1/(2 sigma2_psi)) sum_c g_c sum_{dims in c} sum_i
//           (w_i sigma2_out[i] - w*_i sigma2_in[i]).
// Positive delta: the out dataset is assigned higher expected
// log-likelihood than the reference.
double second_order_delta(const ComponentStats& in_stats,
                          const ComponentStats& out_stats,
                          const ChannelFactors& factors, double sigma2_psi);

// Upper bound: maximize the unweighted pair difference over components
// (i of out, i' of in). Every component must be occupied on both sides.
// Returns {bound, {argmax_out, argmax_in}}.
std::pair<double, std::pair<std::size_t, std::size_t>> second_order_bound(
    const ComponentStats& in_stats, const ComponentStats& out_stats,
    const ChannelFactors& factors, double sigma2_psi);

// Full report; bound omitted (has_bound = false) when a component is
// empty on either side. delta <= bound is enforced when both exist.
SecondOrderReport second_order_report(const ComponentStats& in_stats,
                                      const ComponentStats& out_stats,
                                      const ChannelFactors& factors,
                                      double sigma2_psi);

// Fraction of latent rows lying within 3 sqrt(sigma2_psi) of the nearest
// mixture mean on every dim, with the latents kept for histogramming.
struct ForceOutResult {
  double fraction = 0.0;
  Tensor latents;  // [n, dim]
};
ForceOutResult latent_forceout(const Tensor& latents,
                               const MixturePrior& prior);

}  // namespace pscp

#endif  // PSCP_ANALYSIS_HPP
