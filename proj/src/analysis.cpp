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

#include "pscp/analysis.hpp"

#include <cmath>
#include <limits>

#include "pscp/errors.hpp"

namespace pscp {

ChannelFactors ChannelFactors::unit(std::size_t dim) {
  ChannelFactors f;
  f.g.assign(dim, 1.0);
  f.channel_of.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) f.channel_of[i] = i;
  return f;
}

void ChannelFactors::validate(std::size_t dim) const {
  if (channel_of.size() != dim) {
    throw ShapeError("ChannelFactors: channel map does not cover dims");
  }
  for (std::size_t c : channel_of) {
    if (c >= g.size()) throw ShapeError("ChannelFactors: channel out of range");
  }
  for (double v : g) {
    if (!(v >= 0.0)) throw ShapeError("ChannelFactors: g must be >= 0");
  }
}

ComponentAssignment allocate_nearest(const Tensor& latents,
                                     const MixturePrior& prior) {
  const std::size_t n = latents.rows(), d = latents.cols();
  if (d != prior.dim()) throw ShapeError("allocate_nearest: dim mismatch");
  ComponentAssignment out;
  out.index.assign(n, 0);
  if (prior.num_components() == 1) return out;
  for (std::size_t r = 0; r < n; ++r) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prior.num_components(); ++i) {
      const std::vector<double>& mu = prior.component_mean(i);
      double d2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = latents.at(r, j) - mu[j];
        d2 += diff * diff;
      }
      if (d2 < best) {  // strict: ties stay at the lower index
        best = d2;
        out.index[r] = static_cast<int>(i);
      }
    }
  }
  return out;
}

ComponentAssignment allocate_nearest(const FlowModel& model,
                                     const MixturePrior& prior,
                                     const Tensor& x) {
  return allocate_nearest(flow_forward(model, x).z, prior);
}

ComponentAssignment allocate_nearest(const VaeModel& model,
                                     const MixturePrior& prior,
                                     const Tensor& x) {
  return allocate_nearest(vae_encode_mean(model, x), prior);
}

namespace {

std::vector<double> column_means(const Tensor& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> m(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) m[j] += x.at(i, j);
  }
  for (double& v : m) v /= static_cast<double>(n);
  return m;
}

Tensor mean_tensor(const std::vector<double>& mu) {
  Tensor t({1, mu.size()});
  for (std::size_t j = 0; j < mu.size(); ++j) t.at(0, j) = mu[j];
  return t;
}

}  // namespace

MeanImage component_mean_image(const FlowModel& model,
                               const MixturePrior& prior, std::size_t i,
                               std::size_t n_samples, std::uint64_t seed) {
  MeanImage out;
  out.sampled =
      column_means(flow_sample_component(model, prior, i, n_samples, seed));
  out.decoded =
      column_means(flow_inverse(model, mean_tensor(prior.component_mean(i))));
  return out;
}

MeanImage component_mean_image(const VaeModel& model,
                               const MixturePrior& prior, std::size_t i,
                               std::size_t n_samples, std::uint64_t seed) {
  Rng rng(seed);
  Tensor z = component_sample(prior, i, n_samples, rng);
  MeanImage out;
  out.sampled = column_means(vae_decode_mean(model, z));
  out.decoded =
      column_means(vae_decode_mean(model, mean_tensor(prior.component_mean(i))));
  return out;
}

ComponentStats component_sigma(
    const Dataset& data, const ComponentAssignment& assignment,
    const std::vector<std::vector<double>>& mean_images) {
  const std::size_t n = data.size(), d = data.dim();
  const std::size_t k = mean_images.size();
  if (k == 0) throw ShapeError("component_sigma: no components");
  assignment.validate(n, k);
  for (const auto& m : mean_images) {
    if (m.size() != d) throw ShapeError("component_sigma: mean image dim");
  }

  ComponentStats st;
  st.mean_image = mean_images;
  st.sigma2.assign(k, {});
  st.w.assign(k, 0.0);
  st.n.assign(k, 0);
  std::vector<std::vector<double>> acc(k, std::vector<double>(d, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = static_cast<std::size_t>(assignment.index[r]);
    ++st.n[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = data.rows.at(r, j) - mean_images[i][j];
      acc[i][j] += diff * diff;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    st.w[i] = static_cast<double>(st.n[i]) / static_cast<double>(n);
    if (st.n[i] > 0) {
      st.sigma2[i] = std::move(acc[i]);
      for (double& v : st.sigma2[i]) v /= static_cast<double>(st.n[i]);
    }
  }
  return st;
}

namespace {

void check_pair(const ComponentStats& in_stats, const ComponentStats& out_stats,
                const ChannelFactors& factors, double sigma2_psi) {
  if (in_stats.k() != out_stats.k()) {
    throw ShapeError("second-order stats: component count mismatch");
  }
  if (in_stats.dim() != out_stats.dim()) {
    throw ShapeError("second-order stats: dim mismatch");
  }
  factors.validate(in_stats.dim());
  if (!(sigma2_psi > 0.0)) {
    throw ShapeError("second-order stats: sigma2_psi must be > 0");
  }
}

}  // namespace

double second_order_delta(const ComponentStats& in_stats,
                          const ComponentStats& out_stats,
                          const ChannelFactors& factors, double sigma2_psi) {
  check_pair(in_stats, out_stats, factors, sigma2_psi);
  const std::size_t d = in_stats.dim(), k = in_stats.k();
  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double dim_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (out_stats.occupied(i)) {
        dim_sum += out_stats.w[i] * out_stats.sigma2[i][j];
      }
      if (in_stats.occupied(i)) {
        dim_sum -= in_stats.w[i] * in_stats.sigma2[i][j];
      }
    }
    total += factors.g[factors.channel_of[j]] * dim_sum;
  }
  return -total / (2.0 * sigma2_psi);
}

std::pair<double, std::pair<std::size_t, std::size_t>> second_order_bound(
    const ComponentStats& in_stats, const ComponentStats& out_stats,
    const ChannelFactors& factors, double sigma2_psi) {
  check_pair(in_stats, out_stats, factors, sigma2_psi);
  const std::size_t d = in_stats.dim(), k = in_stats.k();
  for (std::size_t i = 0; i < k; ++i) {
    if (!in_stats.occupied(i) || !out_stats.occupied(i)) {
      throw ShapeError("second_order_bound: empty component " +
                       std::to_string(i));
    }
  }
  // Weighted per-dim deviation of each candidate pair.
  double best = -std::numeric_limits<double>::infinity();
  std::pair<std::size_t, std::size_t> arg{0, 0};
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      double total = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        total += factors.g[factors.channel_of[j]] *
                 (out_stats.sigma2[a][j] - in_stats.sigma2[b][j]);
      }
      const double v = -total / (2.0 * sigma2_psi);
      if (v > best) {
        best = v;
        arg = {a, b};
      }
    }
  }
  return {best, arg};
}

SecondOrderReport second_order_report(const ComponentStats& in_stats,
                                      const ComponentStats& out_stats,
                                      const ChannelFactors& factors,
                                      double sigma2_psi) {
  SecondOrderReport rep;
  rep.in_stats = in_stats;
  rep.out_stats = out_stats;
  rep.sigma2_psi = sigma2_psi;
  rep.delta = second_order_delta(in_stats, out_stats, factors, sigma2_psi);
  try {
    auto [bound, arg] =
        second_order_bound(in_stats, out_stats, factors, sigma2_psi);
    rep.has_bound = true;
    rep.bound = bound;
    rep.argmax_out = arg.first;
    rep.argmax_in = arg.second;
  } catch (const ShapeError&) {
    rep.has_bound = false;
  }
  if (rep.has_bound && rep.delta > rep.bound + 1e-9) {
    throw NumericFailure("second_order_report: delta exceeds its bound");
  }
  return rep;
}

ForceOutResult latent_forceout(const Tensor& latents,
                               const MixturePrior& prior) {
  const std::size_t n = latents.rows(), d = latents.cols();
  if (d != prior.dim()) throw ShapeError("latent_forceout: dim mismatch");
  const double radius = 3.0 * std::sqrt(prior.component_variance());
  std::size_t within = 0;
  for (std::size_t r = 0; r < n; ++r) {
    bool hit = false;
    for (std::size_t i = 0; i < prior.num_components() && !hit; ++i) {
      const std::vector<double>& mu = prior.component_mean(i);
      bool all = true;
      for (std::size_t j = 0; j < d; ++j) {
        if (std::fabs(latents.at(r, j) - mu[j]) > radius) {
          all = false;
          break;
        }
      }
      hit = all;
    }
    if (hit) ++within;
  }
  ForceOutResult out;
  out.fraction = n ? static_cast<double>(within) / static_cast<double>(n) : 0.0;
  out.latents = latents;
  return out;
}

}  // namespace pscp
