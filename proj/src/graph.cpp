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

#include "pscp/graph.hpp"

#include <cmath>
#include <cstring>

#include "pscp/kernels.hpp"

namespace pscp {

namespace {

enum class Bcast { kSame, kRowVector, kScalar };

Bcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.same_shape(b)) return Bcast::kSame;
  if (b.size() == 1) return Bcast::kScalar;
  if (a.rank() == 2 && b.rank() == 1 && b.shape()[0] == a.shape()[1]) {
    return Bcast::kRowVector;
  }
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   Tensor::shape_str(a.shape()) + " vs " +
                   Tensor::shape_str(b.shape()));
}

// dst (shape of b under bcast) += reduction of g (shape of a).
void reduce_into(Tensor& dst, const Tensor& g, Bcast bc, double sign) {
  switch (bc) {
    case Bcast::kSame:
      kern::axpy(dst.data(), sign, g.data(), g.size());
      break;
    case Bcast::kScalar:
      dst[0] += sign * kern::sum(g.data(), g.size());
      break;
    case Bcast::kRowVector: {
      const std::size_t n = g.rows(), d = g.cols();
      for (std::size_t i = 0; i < n; ++i) {
        kern::axpy(dst.data(), sign, g.data() + i * d, d);
      }
      break;
    }
  }
}

}  // namespace

Graph::Id Graph::emplace(Tensor value, const char* op, std::vector<Id> parents,
                         std::function<void(Graph&, Id)> back) {
  check_finite(value, op);
  Node n;
  n.op = op;
  n.parents = std::move(parents);
  for (Id p : n.parents) {
    if (nodes_[p].requires_grad) {
      n.requires_grad = true;
      break;
    }
  }
  n.grad = Tensor::zeros(value.shape());
  n.value = std::move(value);
  if (n.requires_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

void Graph::check_finite(const Tensor& t, const char* op) const {
  if (!t.all_finite()) {
    throw NumericFailure(std::string("non-finite value in op '") + op + "'");
  }
}

Graph::Id Graph::input(Tensor t) {
  check_finite(t, "input");
  Node n;
  n.op = "input";
  n.grad = Tensor::zeros(t.shape());
  n.value = std::move(t);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Graph::Id Graph::param(Tensor t) {
  Id id = input(std::move(t));
  nodes_[id].op = "param";
  nodes_[id].requires_grad = true;
  return id;
}

Graph::Id Graph::matmul(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    throw ShapeError("matmul: incompatible shapes " +
                     Tensor::shape_str(av.shape()) + " x " +
                     Tensor::shape_str(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out({m, n});
  kern::matmul(out.data(), av.data(), bv.data(), m, k, n);
  return emplace(std::move(out), "matmul", {a, b}, [a, b, m, k, n](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    if (g.nodes_[a].requires_grad) {
      kern::matmul_nt(g.grad_ref(a).data(), gout.data(), g.value(b).data(),
                      m, n, k);
    }
    if (g.nodes_[b].requires_grad) {
      kern::matmul_tn(g.grad_ref(b).data(), g.value(a).data(), gout.data(),
                      k, m, n);
    }
  });
}

Graph::Id Graph::add(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  const Bcast bc = broadcast_kind(av, bv, "add");
  Tensor out(av.shape());
  switch (bc) {
    case Bcast::kSame:
      kern::add(out.data(), av.data(), bv.data(), av.size());
      break;
    case Bcast::kScalar:
      for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[0];
      break;
    case Bcast::kRowVector: {
      const std::size_t n = av.rows(), d = av.cols();
      for (std::size_t i = 0; i < n; ++i) {
        kern::add(out.data() + i * d, av.data() + i * d, bv.data(), d);
      }
      break;
    }
  }
  return emplace(std::move(out), "add", {a, b}, [a, b, bc](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    if (g.nodes_[a].requires_grad) {
      kern::axpy(g.grad_ref(a).data(), 1.0, gout.data(), gout.size());
    }
    if (g.nodes_[b].requires_grad) {
      reduce_into(g.grad_ref(b), gout, bc, 1.0);
    }
  });
}

Graph::Id Graph::sub(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  const Bcast bc = broadcast_kind(av, bv, "sub");
  Tensor out(av.shape());
  switch (bc) {
    case Bcast::kSame:
      kern::sub(out.data(), av.data(), bv.data(), av.size());
      break;
    case Bcast::kScalar:
      for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[0];
      break;
    case Bcast::kRowVector: {
      const std::size_t n = av.rows(), d = av.cols();
      for (std::size_t i = 0; i < n; ++i) {
        kern::sub(out.data() + i * d, av.data() + i * d, bv.data(), d);
      }
      break;
    }
  }
  return emplace(std::move(out), "sub", {a, b}, [a, b, bc](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    if (g.nodes_[a].requires_grad) {
      kern::axpy(g.grad_ref(a).data(), 1.0, gout.data(), gout.size());
    }
    if (g.nodes_[b].requires_grad) {
      reduce_into(g.grad_ref(b), gout, bc, -1.0);
    }
  });
}

Graph::Id Graph::mul(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  const Bcast bc = broadcast_kind(av, bv, "mul");
  Tensor out(av.shape());
  switch (bc) {
    case Bcast::kSame:
      kern::mul(out.data(), av.data(), bv.data(), av.size());
      break;
    case Bcast::kScalar:
      kern::scale(out.data(), bv[0], av.data(), av.size());
      break;
    case Bcast::kRowVector: {
      const std::size_t n = av.rows(), d = av.cols();
      for (std::size_t i = 0; i < n; ++i) {
        kern::mul(out.data() + i * d, av.data() + i * d, bv.data(), d);
      }
      break;
    }
  }
  return emplace(std::move(out), "mul", {a, b}, [a, b, bc](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    if (g.nodes_[a].requires_grad) {
      Tensor& ga = g.grad_ref(a);
      switch (bc) {
        case Bcast::kSame:
          for (std::size_t i = 0; i < gout.size(); ++i) {
            ga[i] += gout[i] * bv[i];
          }
          break;
        case Bcast::kScalar:
          kern::axpy(ga.data(), bv[0], gout.data(), gout.size());
          break;
        case Bcast::kRowVector: {
          const std::size_t n = av.rows(), d = av.cols();
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
              ga[i * d + j] += gout[i * d + j] * bv[j];
            }
          }
          break;
        }
      }
    }
    if (g.nodes_[b].requires_grad) {
      Tensor prod(gout.shape());
      kern::mul(prod.data(), gout.data(), av.data(), gout.size());
      reduce_into(g.grad_ref(b), prod, bc, 1.0);
    }
  });
}

Graph::Id Graph::neg(Id a) { return scale(a, -1.0); }

Graph::Id Graph::exp(Id a) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::exp(av[i]);
  return emplace(std::move(out), "exp", {a}, [a](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    const Tensor& y = g.value(self);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] * y[i];
  });
}

Graph::Id Graph::log(Id a) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::log(av[i]);
  return emplace(std::move(out), "log", {a}, [a](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    const Tensor& x = g.value(a);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] / x[i];
  });
}

Graph::Id Graph::tanh(Id a) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::tanh(av[i]);
  return emplace(std::move(out), "tanh", {a}, [a](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    const Tensor& y = g.value(self);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < gout.size(); ++i) {
      ga[i] += gout[i] * (1.0 - y[i] * y[i]);
    }
  });
}

Graph::Id Graph::abs(Id a) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::fabs(av[i]);
  return emplace(std::move(out), "abs", {a}, [a](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    const Tensor& x = g.value(a);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < gout.size(); ++i) {
      // sign(0) = 0; subgradient at the kink.
      ga[i] += gout[i] * (x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0));
    }
  });
}

Graph::Id Graph::square(Id a) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  kern::mul(out.data(), av.data(), av.data(), av.size());
  return emplace(std::move(out), "square", {a}, [a](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    const Tensor& x = g.value(a);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < gout.size(); ++i) {
      ga[i] += 2.0 * gout[i] * x[i];
    }
  });
}

Graph::Id Graph::pow_const(Id a, double e) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::pow(av[i], e);
  return emplace(std::move(out), "pow_const", {a}, [a, e](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    const Tensor& x = g.value(a);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < gout.size(); ++i) {
      ga[i] += gout[i] * e * std::pow(x[i], e - 1.0);
    }
  });
}

Graph::Id Graph::scale(Id a, double c) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  kern::scale(out.data(), c, av.data(), av.size());
  return emplace(std::move(out), "scale", {a}, [a, c](Graph& g, Id self) {
    kern::axpy(g.grad_ref(a).data(), c, g.grad(self).data(),
               g.grad(self).size());
  });
}

Graph::Id Graph::add_const(Id a, double c) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + c;
  return emplace(std::move(out), "add_const", {a}, [a](Graph& g, Id self) {
    kern::axpy(g.grad_ref(a).data(), 1.0, g.grad(self).data(),
               g.grad(self).size());
  });
}

Graph::Id Graph::clamp(Id a, double lo, double hi) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) {
    out[i] = av[i] < lo ? lo : (av[i] > hi ? hi : av[i]);
  }
  return emplace(std::move(out), "clamp", {a}, [a, lo, hi](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    const Tensor& x = g.value(a);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < gout.size(); ++i) {
      if (x[i] >= lo && x[i] <= hi) ga[i] += gout[i];
    }
  });
}

Graph::Id Graph::reduce_sum(Id a, int axis) {
  const Tensor& av = value(a);
  if (av.rank() != 2) throw ShapeError("reduce_sum: rank-2 input required");
  const std::size_t n = av.rows(), d = av.cols();
  if (axis == 1) {
    Tensor out({n});
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = kern::sum(av.data() + i * d, d);
    }
    return emplace(std::move(out), "reduce_sum", {a}, [a, n, d](Graph& g, Id self) {
      const Tensor& gout = g.grad(self);
      Tensor& ga = g.grad_ref(a);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ga[i * d + j] += gout[i];
      }
    });
  }
  if (axis == 0) {
    Tensor out({d});
    for (std::size_t i = 0; i < n; ++i) {
      kern::axpy(out.data(), 1.0, av.data() + i * d, d);
    }
    return emplace(std::move(out), "reduce_sum", {a}, [a, n, d](Graph& g, Id self) {
      const Tensor& gout = g.grad(self);
      Tensor& ga = g.grad_ref(a);
      for (std::size_t i = 0; i < n; ++i) {
        kern::axpy(ga.data() + i * d, 1.0, gout.data(), d);
      }
    });
  }
  throw ShapeError("reduce_sum: axis must be 0 or 1");
}

Graph::Id Graph::reduce_sum_all(Id a) {
  const Tensor& av = value(a);
  Tensor out = Tensor::scalar(kern::sum(av.data(), av.size()));
  return emplace(std::move(out), "reduce_sum_all", {a}, [a](Graph& g, Id self) {
    const double gs = g.grad(self)[0];
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gs;
  });
}

Graph::Id Graph::mean_all(Id a) {
  const Tensor& av = value(a);
  const double inv = 1.0 / static_cast<double>(av.size());
  Tensor out = Tensor::scalar(kern::sum(av.data(), av.size()) * inv);
  return emplace(std::move(out), "mean_all", {a}, [a, inv](Graph& g, Id self) {
    const double gs = g.grad(self)[0] * inv;
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gs;
  });
}

Graph::Id Graph::concat_cols(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.rows() != bv.rows()) {
    throw ShapeError("concat_cols: incompatible shapes");
  }
  const std::size_t n = av.rows(), da = av.cols(), db = bv.cols();
  Tensor out({n, da + db});
  for (std::size_t i = 0; i < n; ++i) {
    std::memcpy(out.data() + i * (da + db), av.data() + i * da,
                da * sizeof(double));
    std::memcpy(out.data() + i * (da + db) + da, bv.data() + i * db,
                db * sizeof(double));
  }
  return emplace(std::move(out), "concat_cols", {a, b},
                 [a, b, n, da, db](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    if (g.nodes_[a].requires_grad) {
      Tensor& ga = g.grad_ref(a);
      for (std::size_t i = 0; i < n; ++i) {
        kern::axpy(ga.data() + i * da, 1.0, gout.data() + i * (da + db), da);
      }
    }
    if (g.nodes_[b].requires_grad) {
      Tensor& gb = g.grad_ref(b);
      for (std::size_t i = 0; i < n; ++i) {
        kern::axpy(gb.data() + i * db, 1.0,
                   gout.data() + i * (da + db) + da, db);
      }
    }
  });
}

std::pair<Graph::Id, Graph::Id> Graph::split_cols(Id a, std::size_t at) {
  const Tensor& av = value(a);
  if (av.rank() != 2 || at == 0 || at >= av.cols()) {
    throw ShapeError("split_cols: bad split point");
  }
  const std::size_t n = av.rows(), d = av.cols(), da = at, db = d - at;
  Tensor left({n, da}), right({n, db});
  for (std::size_t i = 0; i < n; ++i) {
    std::memcpy(left.data() + i * da, av.data() + i * d, da * sizeof(double));
    std::memcpy(right.data() + i * db, av.data() + i * d + da,
                db * sizeof(double));
  }
  Id l = emplace(std::move(left), "split_cols_l", {a},
                 [a, n, d, da](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < n; ++i) {
      kern::axpy(ga.data() + i * d, 1.0, gout.data() + i * da, da);
    }
  });
  Id r = emplace(std::move(right), "split_cols_r", {a},
                 [a, n, d, da, db](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < n; ++i) {
      kern::axpy(ga.data() + i * d + da, 1.0, gout.data() + i * db, db);
    }
  });
  return {l, r};
}

Graph::Id Graph::reverse_cols(Id a) {
  const Tensor& av = value(a);
  if (av.rank() != 2) throw ShapeError("reverse_cols: rank-2 input required");
  const std::size_t n = av.rows(), d = av.cols();
  Tensor out({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out.at(i, j) = av.at(i, d - 1 - j);
    }
  }
  return emplace(std::move(out), "reverse_cols", {a},
                 [a, n, d](Graph& g, Id self) {
    const Tensor& gout = g.grad(self);
    Tensor& ga = g.grad_ref(a);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        ga[i * d + (d - 1 - j)] += gout[i * d + j];
      }
    }
  });
}

void Graph::backward(Id root) {
  if (value(root).size() != 1) {
    throw ShapeError("backward: root must be scalar");
  }
  nodes_[root].grad[0] = 1.0;
  for (Id id = root; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.requires_grad && n.back) n.back(*this, id);
  }
}

Tensor& ParamSet::add(const std::string& name, Tensor value, bool trainable) {
  if (contains(name)) {
    throw ShapeError("ParamSet: duplicate parameter '" + name + "'");
  }
  entries_.push_back({name, std::move(value), trainable});
  return entries_.back().value;
}

Tensor& ParamSet::operator[](const std::string& name) {
  for (auto& e : entries_) {
    if (e.name == name) return e.value;
  }
  throw ShapeError("ParamSet: no parameter '" + name + "'");
}

const Tensor& ParamSet::operator[](const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.value;
  }
  throw ShapeError("ParamSet: no parameter '" + name + "'");
}

std::size_t ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  throw ShapeError("ParamSet: no parameter '" + name + "'");
}

bool ParamSet::contains(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

std::size_t ParamSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.trainable) n += e.value.size();
  }
  return n;
}

BoundParams bind_params(Graph& g, const ParamSet& params) {
  BoundParams bound;
  const auto& entries = params.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].trainable) continue;
    bound.ids.push_back(g.param(entries[i].value));
    bound.entry_idx.push_back(i);
  }
  return bound;
}

std::vector<Tensor> collect_grads(const Graph& g, const BoundParams& bound) {
  std::vector<Tensor> grads;
  grads.reserve(bound.ids.size());
  for (Graph::Id id : bound.ids) grads.push_back(g.grad(id));
  return grads;
}

double gradient_check(const ParamSet& params, const LossBuilder& f, double h) {
  if (h <= 0.0) throw ShapeError("gradient_check: h must be positive");
  // Analytic pass.
  std::vector<Tensor> analytic;
  {
    Graph g;
    BoundParams bound = bind_params(g, params);
    Graph::Id loss = f(g, bound.ids);
    g.backward(loss);
    analytic = collect_grads(g, bound);
  }
  // Central differences, one scalar at a time.
  ParamSet work = params;
  auto eval = [&]() {
    Graph g;
    BoundParams bound = bind_params(g, work);
    return g.value(f(g, bound.ids)).item();
  };
  double max_rel = 0.0;
  std::size_t t = 0;
  for (auto& e : work.entries()) {
    if (!e.trainable) continue;
    const Tensor& ga = analytic[t++];
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      const double orig = e.value[i];
      e.value[i] = orig + h;
      const double fp = eval();
      e.value[i] = orig - h;
      const double fm = eval();
      e.value[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double denom =
          std::max({std::fabs(ga[i]), std::fabs(numeric), 1e-12});
      max_rel = std::max(max_rel, std::fabs(ga[i] - numeric) / denom);
    }
  }
  return max_rel;
}

void Adam::step(ParamSet& params, const std::vector<Tensor>& grads) {
  std::vector<ParamSet::Entry*> trainable;
  for (auto& e : params.entries()) {
    if (e.trainable) trainable.push_back(&e);
  }
  if (trainable.size() != grads.size()) {
    throw ShapeError("Adam::step: gradient count mismatch");
  }
  if (m_.empty()) {
    for (auto* e : trainable) {
      m_.push_back(Tensor::zeros(e->value.shape()));
      v_.push_back(Tensor::zeros(e->value.shape()));
    }
  }
  for (std::size_t p = 0; p < trainable.size(); ++p) {
    if (!trainable[p]->value.same_shape(grads[p])) {
      throw ShapeError("Adam::step: gradient shape mismatch for '" +
                       trainable[p]->name + "'");
    }
    if (!grads[p].all_finite()) {
      throw NumericFailure("Adam::step: non-finite gradient for '" +
                           trainable[p]->name + "'");
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t p = 0; p < trainable.size(); ++p) {
    Tensor& theta = trainable[p]->value;
    Tensor& m = m_[p];
    Tensor& v = v_[p];
    const Tensor& gr = grads[p];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gr[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gr[i] * gr[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

}  // namespace pscp
