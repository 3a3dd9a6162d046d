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

#ifndef PSCP_MLP_HPP
#define PSCP_MLP_HPP

#include <string>
#include <vector>

#include "pscp/graph.hpp"
#include "pscp/rng.hpp"

namespace pscp {

// Two-hidden-layer tanh MLP stored as six named tensors in a ParamSet
// under a common prefix (<prefix>.W0 ... <prefix>.b2). Both the plain
// numeric forward and the graph forward are provided; the numeric path
// serves the hot evaluation loops (flow inverse, IW sampling) where no
// gradients are needed.

// Entry indices of one MLP inside a ParamSet.
struct MlpSlot {
  std::size_t w0, b0, w1, b1, w2, b2;
};

// Registers the six tensors. Hidden weights: normal / sqrt(fan_in);
// output layer zero so the net starts as the zero function.
MlpSlot mlp_init(ParamSet& params, const std::string& prefix,
                 std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                 Rng& rng);

MlpSlot mlp_slot(const ParamSet& params, const std::string& prefix);

// y = tanh(tanh(x W0 + b0) W1 + b1) W2 + b2
Tensor mlp_eval(const ParamSet& params, const MlpSlot& slot, const Tensor& x);

Graph::Id mlp_node(Graph& g, const std::vector<Graph::Id>& param_ids,
                   const MlpSlot& slot, Graph::Id x);

}  // namespace pscp

#endif  // PSCP_MLP_HPP
