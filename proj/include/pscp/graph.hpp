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

#ifndef PSCP_GRAPH_HPP
#define PSCP_GRAPH_HPP

#include <functional>
#include <utility>
#include <vector>

#include "pscp/tensor.hpp"

namespace pscp {

// Define-by-run reverse-mode autodiff over Tensor. A Graph is a tape:
// nodes are appended in topological order, backward() walks the tape in
// reverse accumulating gradients. Graphs are rebuilt per minibatch and
// discarded; no caching.
//
// Broadcast rule for add/sub/mul: operands are elementwise same-shape, or
// the right operand is a rank-1 vector broadcast over the rows of a rank-2
// left operand, or the right operand is a scalar.
//
// Every forward result is checked for NaN/Inf; a non-finite value raises
// NumericFailure naming the op.
class Graph {
 public:
  using Id = int;

  // Leaf holding a constant (no gradient tracked).
  Id input(Tensor t);
  // Leaf with gradient tracked.
  Id param(Tensor t);

  const Tensor& value(Id id) const { return nodes_[id].value; }
  const Tensor& grad(Id id) const { return nodes_[id].grad; }

  Id matmul(Id a, Id b);
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  Id neg(Id a);
  Id exp(Id a);
  Id log(Id a);
  Id tanh(Id a);
  Id abs(Id a);
  Id square(Id a);
  Id pow_const(Id a, double e);
  Id scale(Id a, double c);
  Id add_const(Id a, double c);
  Id clamp(Id a, double lo, double hi);

  // Rank-2 only: axis 0 collapses rows -> [cols], axis 1 collapses
  // columns -> [rows].
  Id reduce_sum(Id a, int axis);
  Id reduce_sum_all(Id a);
  Id mean_all(Id a);

  Id concat_cols(Id a, Id b);
  std::pair<Id, Id> split_cols(Id a, std::size_t at);
  // Rank-2 only: reverses column order (self-inverse permutation).
  Id reverse_cols(Id a);

  // Reverse sweep from a scalar root. Gradients of all requires-grad
  // nodes reachable from the root are accumulated; everything else stays
  // zero.
  void backward(Id root);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<Id> parents;
    std::function<void(Graph&, Id)> back;
  };

  Id emplace(Tensor value, const char* op, std::vector<Id> parents,
             std::function<void(Graph&, Id)> back);
  void check_finite(const Tensor& t, const char* op) const;
  Tensor& grad_ref(Id id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

// Named parameter collection. Frozen (non-trainable) tensors may be
// stored but are skipped by optimizers and gradient collection.
class ParamSet {
 public:
  Tensor& add(const std::string& name, Tensor value, bool trainable = true);
  Tensor& operator[](const std::string& name);
  const Tensor& operator[](const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  struct Entry {
    std::string name;
    Tensor value;
    bool trainable;
  };

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Number of trainable scalars.
  std::size_t num_scalars() const;

 private:
  std::vector<Entry> entries_;
};

// Param nodes registered on a graph, aligned with the trainable entries
// of the ParamSet they were built from.
struct BoundParams {
  std::vector<Graph::Id> ids;         // one per trainable entry
  std::vector<std::size_t> entry_idx; // index into ParamSet::entries()
};

BoundParams bind_params(Graph& g, const ParamSet& params);

// Gradients for the trainable entries after backward(), in entry order.
std::vector<Tensor> collect_grads(const Graph& g, const BoundParams& bound);

// Builds a scalar loss from param nodes (one per trainable entry, in
// ParamSet order).
using LossBuilder =
    std::function<Graph::Id(Graph&, const std::vector<Graph::Id>&)>;

// Max over all trainable scalars of the relative difference between the
// analytic gradient and a central finite difference with step h.
double gradient_check(const ParamSet& params, const LossBuilder& f,
                      double h = 1e-5);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Standard Adam with bias correction, one moment pair per trainable
// entry.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // grads must align with the trainable entries of params (the layout
  // produced by collect_grads).
  void step(ParamSet& params, const std::vector<Tensor>& grads);

  long step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace pscp

#endif  // PSCP_GRAPH_HPP
