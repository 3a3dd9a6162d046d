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

#include "pscp/mlp.hpp"

#include <cmath>

#include "pscp/kernels.hpp"

namespace pscp {

namespace {

Tensor normal_init(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor w({rows, cols});
  const double sd = 1.0 / std::sqrt(static_cast<double>(rows));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = sd * rng.normal();
  return w;
}

// y[n,out] = x[n,in] W[in,out] + b, then optionally tanh in place.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b, bool act) {
  const std::size_t n = x.rows(), in = x.cols(), out = w.cols();
  Tensor y({n, out});
  kern::matmul(y.data(), x.data(), w.data(), n, in, out);
  for (std::size_t i = 0; i < n; ++i) {
    kern::add(y.data() + i * out, y.data() + i * out, b.data(), out);
  }
  if (act) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
  }
  return y;
}

}  // namespace

MlpSlot mlp_init(ParamSet& params, const std::string& prefix,
                 std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                 Rng& rng) {
  MlpSlot s;
  s.w0 = params.size();
  params.add(prefix + ".W0", normal_init(in_dim, hidden, rng));
  s.b0 = params.size();
  params.add(prefix + ".b0", Tensor::zeros({hidden}));
  s.w1 = params.size();
  params.add(prefix + ".W1", normal_init(hidden, hidden, rng));
  s.b1 = params.size();
  params.add(prefix + ".b1", Tensor::zeros({hidden}));
  s.w2 = params.size();
  params.add(prefix + ".W2", Tensor::zeros({hidden, out_dim}));
  s.b2 = params.size();
  params.add(prefix + ".b2", Tensor::zeros({out_dim}));
  return s;
}

MlpSlot mlp_slot(const ParamSet& params, const std::string& prefix) {
  return MlpSlot{params.index_of(prefix + ".W0"), params.index_of(prefix + ".b0"),
                 params.index_of(prefix + ".W1"), params.index_of(prefix + ".b1"),
                 params.index_of(prefix + ".W2"), params.index_of(prefix + ".b2")};
}

Tensor mlp_eval(const ParamSet& params, const MlpSlot& slot, const Tensor& x) {
  const auto& e = params.entries();
  Tensor h = linear(x, e[slot.w0].value, e[slot.b0].value, true);
  h = linear(h, e[slot.w1].value, e[slot.b1].value, true);
  return linear(h, e[slot.w2].value, e[slot.b2].value, false);
}

Graph::Id mlp_node(Graph& g, const std::vector<Graph::Id>& param_ids,
                   const MlpSlot& slot, Graph::Id x) {
  Graph::Id h =
      g.tanh(g.add(g.matmul(x, param_ids[slot.w0]), param_ids[slot.b0]));
  h = g.tanh(g.add(g.matmul(h, param_ids[slot.w1]), param_ids[slot.b1]));
  return g.add(g.matmul(h, param_ids[slot.w2]), param_ids[slot.b2]);
}

}  // namespace pscp
