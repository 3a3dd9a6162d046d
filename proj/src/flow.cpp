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

#include "pscp/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "pscp/kernels.hpp"
#include "pscp/mlp.hpp"

namespace pscp {

namespace {

std::string coupling_prefix(std::size_t layer, const char* net) {
  return "c" + std::to_string(layer) + "." + net;
}

void reverse_rows_inplace(Tensor& x) {
  const std::size_t n = x.rows(), d = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* row = x.data() + i * d;
    std::reverse(row, row + d);
  }
}

Tensor take_cols(const Tensor& x, std::size_t from, std::size_t to) {
  const std::size_t n = x.rows(), d = x.cols(), w = to - from;
  Tensor out({n, w});
  for (std::size_t i = 0; i < n; ++i) {
    std::memcpy(out.data() + i * w, x.data() + i * d + from,
                w * sizeof(double));
  }
  return out;
}

double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace

FlowModel FlowModel::init(const FlowConfig& cfg, std::uint64_t seed) {
  if (cfg.dim < 2) throw ShapeError("FlowModel: dim must be >= 2");
  FlowModel m;
  m.cfg = cfg;
  Rng rng(seed);
  const std::size_t da = cfg.split_point();
  const std::size_t db = cfg.dim - da;
  for (std::size_t l = 0; l < cfg.n_couplings; ++l) {
    mlp_init(m.params, coupling_prefix(l, "s"), da, cfg.hidden, db, rng);
    mlp_init(m.params, coupling_prefix(l, "t"), da, cfg.hidden, db, rng);
  }
  return m;
}

FlowForward flow_forward(const FlowModel& model, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != model.cfg.dim) {
    throw ShapeError("flow_forward: x must be [n, dim]");
  }
  if (!x.all_finite()) throw NumericFailure("flow_forward: non-finite input");
  const FlowConfig& cfg = model.cfg;
  const std::size_t n = x.rows(), d = cfg.dim;
  const std::size_t da = cfg.split_point(), db = d - da;

  Tensor cur = x;
  FlowForward out;
  out.log_det.assign(n, 0.0);
  for (std::size_t l = 0; l < cfg.n_couplings; ++l) {
    const Tensor xa = take_cols(cur, 0, da);
    const MlpSlot snet = mlp_slot(model.params, coupling_prefix(l, "s"));
    const MlpSlot tnet = mlp_slot(model.params, coupling_prefix(l, "t"));
    const Tensor s_raw = mlp_eval(model.params, snet, xa);
    const Tensor t = mlp_eval(model.params, tnet, xa);
    for (std::size_t i = 0; i < n; ++i) {
      double* row = cur.data() + i * d + da;
      for (std::size_t j = 0; j < db; ++j) {
        const double s =
            std::exp(clamp(s_raw.at(i, j), -cfg.s_clamp, cfg.s_clamp)) +
            cfg.scale_offset;
        row[j] = row[j] * s + t.at(i, j);
        out.log_det[i] += std::log(s);
      }
    }
    reverse_rows_inplace(cur);
  }
  if (!cur.all_finite()) {
    throw NumericFailure("flow_forward: non-finite activation");
  }
  out.z = std::move(cur);
  return out;
}

Tensor flow_inverse(const FlowModel& model, const Tensor& z) {
  if (z.rank() != 2 || z.cols() != model.cfg.dim) {
    throw ShapeError("flow_inverse: z must be [n, dim]");
  }
  if (!z.all_finite()) throw NumericFailure("flow_inverse: non-finite input");
  const FlowConfig& cfg = model.cfg;
  const std::size_t n = z.rows(), d = cfg.dim;
  const std::size_t da = cfg.split_point(), db = d - da;

  Tensor cur = z;
  for (std::size_t l = cfg.n_couplings; l-- > 0;) {
    reverse_rows_inplace(cur);
    const Tensor xa = take_cols(cur, 0, da);
    const MlpSlot snet = mlp_slot(model.params, coupling_prefix(l, "s"));
    const MlpSlot tnet = mlp_slot(model.params, coupling_prefix(l, "t"));
    const Tensor s_raw = mlp_eval(model.params, snet, xa);
    const Tensor t = mlp_eval(model.params, tnet, xa);
    for (std::size_t i = 0; i < n; ++i) {
      double* row = cur.data() + i * d + da;
      for (std::size_t j = 0; j < db; ++j) {
        const double s =
            std::exp(clamp(s_raw.at(i, j), -cfg.s_clamp, cfg.s_clamp)) +
            cfg.scale_offset;
        row[j] = (row[j] - t.at(i, j)) / s;
      }
    }
  }
  if (!cur.all_finite()) {
    throw NumericFailure("flow_inverse: non-finite result");
  }
  return cur;
}

std::vector<double> flow_log_likelihood(const FlowModel& model,
                                        const MixturePrior& prior,
                                        const Tensor& x) {
  if (prior.dim() != model.cfg.dim) {
    throw ShapeError("flow_log_likelihood: prior dim != model dim");
  }
  FlowForward fwd = flow_forward(model, x);
  const std::size_t n = x.rows(), d = model.cfg.dim;
  std::vector<double> ll(n);
  for (std::size_t i = 0; i < n; ++i) {
    ll[i] = mixture_log_pdf(prior,
                            std::span<const double>(fwd.z.data() + i * d, d)) +
            fwd.log_det[i];
  }
  return ll;
}

Tensor flow_sample(const FlowModel& model, const MixturePrior& prior,
                   std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PriorSample s = prior_sample(prior, n, rng);
  if (n == 0) return Tensor({0, model.cfg.dim});
  return flow_inverse(model, s.z);
}

Tensor flow_sample_component(const FlowModel& model, const MixturePrior& prior,
                             std::size_t component, std::size_t n,
                             std::uint64_t seed) {
  Rng rng(seed);
  Tensor z = component_sample(prior, component, n, rng);
  if (n == 0) return Tensor({0, model.cfg.dim});
  return flow_inverse(model, z);
}

FlowGraphOut flow_forward_node(Graph& g, const FlowModel& model,
                               const std::vector<Graph::Id>& param_ids,
                               Graph::Id x) {
  const FlowConfig& cfg = model.cfg;
  const std::size_t da = cfg.split_point();
  const std::size_t n = g.value(x).rows();

  Graph::Id cur = x;
  Graph::Id log_det = g.input(Tensor({n}));  // zeros
  for (std::size_t l = 0; l < cfg.n_couplings; ++l) {
    auto [xa, xb] = g.split_cols(cur, da);
    const MlpSlot snet = mlp_slot(model.params, coupling_prefix(l, "s"));
    const MlpSlot tnet = mlp_slot(model.params, coupling_prefix(l, "t"));
    Graph::Id s_raw =
        g.clamp(mlp_node(g, param_ids, snet, xa), -cfg.s_clamp, cfg.s_clamp);
    Graph::Id s = g.add_const(g.exp(s_raw), cfg.scale_offset);
    Graph::Id t = mlp_node(g, param_ids, tnet, xa);
    Graph::Id zb = g.add(g.mul(xb, s), t);
    log_det = g.add(log_det, g.reduce_sum(g.log(s), 1));
    cur = g.reverse_cols(g.concat_cols(xa, zb));
  }
  return {cur, log_det};
}

TrainResult train_flow(FlowModel& model, const MixturePrior& prior,
                       const Dataset& data, const ComponentAssignment* assign,
                       const TrainConfig& cfg) {
  if (prior.dim() != model.cfg.dim || data.dim() != model.cfg.dim) {
    throw ShapeError("train_flow: dim mismatch");
  }
  const std::size_t n = data.size(), d = model.cfg.dim;
  std::vector<int> assignment;
  if (prior.num_components() > 1) {
    if (!assign) {
      throw ShapeError("train_flow: mixture prior requires an assignment");
    }
    assign->validate(n, prior.num_components());
    assignment = assign->index;
  } else {
    assignment.assign(n, 0);
  }

  Rng rng(derive_seed(cfg.seed, 0, "train_flow"));
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
      try {
        Graph g;
        BoundParams bound = bind_params(g, model.params);
        FlowGraphOut fwd = flow_forward_node(g, model, bound.ids, g.input(xb));
        Graph::Id lp = assigned_log_pdf_node(g, fwd.z, prior, ab);
        Graph::Id loss = g.neg(g.mean_all(g.add(lp, fwd.log_det)));
        g.backward(loss);
        opt.step(model.params, collect_grads(g, bound));
        epoch_loss += g.value(loss).item() * static_cast<double>(b);
        seen += b;
      } catch (const NumericFailure& e) {
        throw NumericFailure("train_flow: step " + std::to_string(step) +
                             ": " + e.what());
      }
    }
    res.loss_trace.push_back(epoch_loss / static_cast<double>(seen));
  }
  return res;
}

}  // namespace pscp
