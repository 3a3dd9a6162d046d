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

#include "pscp/vae.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "pscp/mlp.hpp"

namespace pscp {

namespace {

constexpr double kLn2Pi = 1.8378770664093453;

Tensor take_cols(const Tensor& x, std::size_t from, std::size_t to) {
  const std::size_t n = x.rows(), d = x.cols(), w = to - from;
  Tensor out({n, w});
  for (std::size_t i = 0; i < n; ++i) {
    std::memcpy(out.data() + i * w, x.data() + i * d + from,
                w * sizeof(double));
  }
  return out;
}

double clampd(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// Per-row Gaussian log-density node: -0.5 sum_j [(x-mu)^2 e^{-lv} + lv +
// ln 2pi], all operands [n, d] nodes. Returns [n].
Graph::Id gauss_logpdf_node(Graph& g, Graph::Id x, Graph::Id mu,
                            Graph::Id logvar) {
  Graph::Id quad = g.mul(g.square(g.sub(x, mu)), g.exp(g.neg(logvar)));
  Graph::Id per = g.add_const(g.add(quad, logvar), kLn2Pi);
  return g.scale(g.reduce_sum(per, 1), -0.5);
}

struct EncDec {
  MlpSlot enc, dec;
};

EncDec slots(const VaeModel& m) {
  return {mlp_slot(m.params, "enc"), mlp_slot(m.params, "dec")};
}

}  // namespace

VaeModel VaeModel::init(const VaeConfig& cfg, std::uint64_t seed) {
  if (cfg.dim < 1 || cfg.latent < 1) {
    throw ShapeError("VaeModel: dim and latent must be >= 1");
  }
  VaeModel m;
  m.cfg = cfg;
  Rng rng(seed);
  mlp_init(m.params, "enc", cfg.dim, cfg.hidden, 2 * cfg.latent, rng);
  mlp_init(m.params, "dec", cfg.latent, cfg.hidden, 2 * cfg.dim, rng);
  return m;
}

VaeElboNodes vae_elbo_node(Graph& g, const VaeModel& model,
                           const std::vector<Graph::Id>& param_ids,
                           const Tensor& x, const MixturePrior& prior,
                           std::span<const int> assign,
                           const std::vector<Tensor>& eps) {
  const std::size_t n = x.rows(), L = model.cfg.latent;
  if (x.cols() != model.cfg.dim || prior.dim() != L) {
    throw ShapeError("vae_elbo_node: dim mismatch");
  }
  if (assign.size() != n) {
    throw ShapeError("vae_elbo_node: assignment size != batch size");
  }
  if (eps.empty()) throw ShapeError("vae_elbo_node: need n_mc >= 1");
  for (const Tensor& e : eps) {
    if (e.rank() != 2 || e.rows() != n || e.cols() != L) {
      throw ShapeError("vae_elbo_node: eps must be [n, latent]");
    }
  }
  const EncDec sl = slots(model);
  const double inv_mc = 1.0 / static_cast<double>(eps.size());

  Graph::Id xin = g.input(x);
  auto [mu_q, lv_raw] = g.split_cols(mlp_node(g, param_ids, sl.enc, xin), L);
  Graph::Id lv_q =
      g.clamp(lv_raw, VaeConfig::kLogVarLo, VaeConfig::kLogVarHi);
  Graph::Id sigma_q = g.exp(g.scale(lv_q, 0.5));

  Graph::Id recon = 0;
  Graph::Id kl_mc = 0;  // only for non-Gaussian priors
  bool first = true;
  for (const Tensor& e : eps) {
    Graph::Id z = g.add(mu_q, g.mul(sigma_q, g.input(e)));
    auto [mu_x, lvx_raw] =
        g.split_cols(mlp_node(g, param_ids, sl.dec, z), model.cfg.dim);
    Graph::Id lv_x =
        g.clamp(lvx_raw, VaeConfig::kLogVarLo, VaeConfig::kLogVarHi);
    Graph::Id r = gauss_logpdf_node(g, xin, mu_x, lv_x);
    recon = first ? r : g.add(recon, r);
    if (!prior.is_gaussian()) {
      Graph::Id log_q = gauss_logpdf_node(g, z, mu_q, lv_q);
      Graph::Id log_p = assigned_log_pdf_node(g, z, prior, assign);
      Graph::Id k = g.sub(log_q, log_p);
      kl_mc = first ? k : g.add(kl_mc, k);
    }
    first = false;
  }
  recon = g.mean_all(g.scale(recon, inv_mc));

  Graph::Id kl;
  if (prior.is_gaussian()) {
    // Closed form per row against the assigned component:
    //   0.5 sum_j [ (e^{lv} + (mu - mu_p)^2) / var_p - lv + ln var_p - 1 ]
    Tensor mup({n, L}), inv_varp({n, L}), cterm({n, L});
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = std::get<GaussianComponent>(
          prior.component(static_cast<std::size_t>(assign[i])));
      for (std::size_t j = 0; j < L; ++j) {
        mup.at(i, j) = c.mu[j];
        inv_varp.at(i, j) = 1.0 / c.var[j];
        cterm.at(i, j) = std::log(c.var[j]) - 1.0;
      }
    }
    Graph::Id spread = g.mul(
        g.add(g.exp(lv_q), g.square(g.sub(mu_q, g.input(mup)))),
        g.input(inv_varp));
    Graph::Id per = g.add(g.sub(spread, lv_q), g.input(cterm));
    kl = g.mean_all(g.scale(g.reduce_sum(per, 1), 0.5));
  } else {
    kl = g.mean_all(g.scale(kl_mc, inv_mc));
  }
  return {recon, kl, g.sub(recon, kl)};
}

ElboEstimate vae_elbo(const VaeModel& model, const MixturePrior& prior,
                      const Tensor& x, std::span<const int> assign,
                      std::size_t n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw ShapeError("vae_elbo: n_mc must be >= 1");
  Rng rng(seed);
  std::vector<Tensor> eps;
  eps.reserve(n_mc);
  for (std::size_t s = 0; s < n_mc; ++s) {
    Tensor e({x.rows(), model.cfg.latent});
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = rng.normal();
    eps.push_back(std::move(e));
  }
  Graph g;
  BoundParams bound = bind_params(g, model.params);
  VaeElboNodes nodes = vae_elbo_node(g, model, bound.ids, x, prior, assign, eps);
  ElboEstimate out;
  out.reconstruction = g.value(nodes.recon).item();
  out.kl = g.value(nodes.kl).item();
  out.total = out.reconstruction - out.kl;
  out.n_mc = n_mc;
  return out;
}

std::vector<double> vae_iw_log_likelihood(const VaeModel& model,
                                          const MixturePrior& prior,
                                          const Tensor& x, std::size_t S,
                                          std::uint64_t seed) {
  if (S < 1) throw ShapeError("vae_iw_log_likelihood: S must be >= 1");
  const std::size_t n = x.rows(), L = model.cfg.latent, D = model.cfg.dim;
  if (x.cols() != D || prior.dim() != L) {
    throw ShapeError("vae_iw_log_likelihood: dim mismatch");
  }
  const EncDec sl = slots(model);
  const Tensor enc = mlp_eval(model.params, sl.enc, x);
  Rng rng(seed);

  // Streaming log-sum-exp over the S draws.
  std::vector<double> mx(n, -std::numeric_limits<double>::infinity());
  std::vector<double> acc(n, 0.0);
  Tensor z({n, L});
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < L; ++j) {
        const double mu = enc.at(i, j);
        const double lv = clampd(enc.at(i, L + j), VaeConfig::kLogVarLo,
                                 VaeConfig::kLogVarHi);
        z.at(i, j) = mu + std::exp(0.5 * lv) * rng.normal();
      }
    }
    const Tensor dec = mlp_eval(model.params, sl.dec, z);
    for (std::size_t i = 0; i < n; ++i) {
      double log_w =
          mixture_log_pdf(prior, std::span<const double>(z.data() + i * L, L));
      for (std::size_t j = 0; j < L; ++j) {
        const double mu = enc.at(i, j);
        const double lv = clampd(enc.at(i, L + j), VaeConfig::kLogVarLo,
                                 VaeConfig::kLogVarHi);
        const double diff = z.at(i, j) - mu;
        log_w += 0.5 * (diff * diff * std::exp(-lv) + lv + kLn2Pi);
      }
      for (std::size_t j = 0; j < D; ++j) {
        const double mu = dec.at(i, j);
        const double lv = clampd(dec.at(i, D + j), VaeConfig::kLogVarLo,
                                 VaeConfig::kLogVarHi);
        const double diff = x.at(i, j) - mu;
        log_w -= 0.5 * (diff * diff * std::exp(-lv) + lv + kLn2Pi);
      }
      if (log_w <= mx[i]) {
        acc[i] += std::exp(log_w - mx[i]);
      } else {
        acc[i] = acc[i] * std::exp(mx[i] - log_w) + 1.0;
        mx[i] = log_w;
      }
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = mx[i] + std::log(acc[i]) - std::log(static_cast<double>(S));
    if (!std::isfinite(out[i])) {
      throw NumericFailure("vae_iw_log_likelihood: non-finite estimate");
    }
  }
  return out;
}

Tensor vae_encode_mean(const VaeModel& model, const Tensor& x) {
  const EncDec sl = slots(model);
  return take_cols(mlp_eval(model.params, sl.enc, x), 0, model.cfg.latent);
}

Tensor vae_decode_mean(const VaeModel& model, const Tensor& z) {
  const EncDec sl = slots(model);
  return take_cols(mlp_eval(model.params, sl.dec, z), 0, model.cfg.dim);
}

Tensor vae_sample(const VaeModel& model, const Tensor& z, std::uint64_t seed) {
  const EncDec sl = slots(model);
  const std::size_t n = z.rows(), D = model.cfg.dim;
  const Tensor dec = mlp_eval(model.params, sl.dec, z);
  Rng rng(seed);
  Tensor out({n, D});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < D; ++j) {
      const double lv = clampd(dec.at(i, D + j), VaeConfig::kLogVarLo,
                               VaeConfig::kLogVarHi);
      out.at(i, j) = dec.at(i, j) + std::exp(0.5 * lv) * rng.normal();
    }
  }
  return out;
}

TrainResult train_vae(VaeModel& model, const MixturePrior& prior,
                      const Dataset& data, const ComponentAssignment* assign,
                      const TrainConfig& cfg) {
  if (prior.dim() != model.cfg.latent || data.dim() != model.cfg.dim) {
    throw ShapeError("train_vae: dim mismatch");
  }
  const std::size_t n = data.size(), d = model.cfg.dim, L = model.cfg.latent;
  std::vector<int> assignment;
  if (prior.num_components() > 1) {
    if (!assign) {
      throw ShapeError("train_vae: mixture prior requires an assignment");
    }
    assign->validate(n, prior.num_components());
    assignment = assign->index;
  } else {
    assignment.assign(n, 0);
  }

  Rng rng(derive_seed(cfg.seed, 0, "train_vae"));
  Adam opt(cfg.adam);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult res;
  res.loss_trace.reserve(cfg.epochs);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch, ++step) {
      const std::size_t b = std::min(cfg.batch, n - start);
      Tensor xb({b, d});
      std::vector<int> ab(b);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t r = order[start + i];
        std::memcpy(xb.data() + i * d, data.rows.data() + r * d,
                    d * sizeof(double));
        ab[i] = assignment[r];
      }
      Tensor e({b, L});
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = rng.normal();
      try {
        Graph g;
        BoundParams bound = bind_params(g, model.params);
        VaeElboNodes nodes =
            vae_elbo_node(g, model, bound.ids, xb, prior, ab, {e});
        Graph::Id loss = g.neg(nodes.total);
        g.backward(loss);
        opt.step(model.params, collect_grads(g, bound));
        epoch_loss += g.value(loss).item() * static_cast<double>(b);
        seen += b;
      } catch (const NumericFailure& err) {
        throw NumericFailure("train_vae: step " + std::to_string(step) + ": " +
                             err.what());
      }
    }
    res.loss_trace.push_back(epoch_loss / static_cast<double>(seen));
  }
  return res;
}

}  // namespace pscp
