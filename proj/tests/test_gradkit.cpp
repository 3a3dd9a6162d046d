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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pscp/graph.hpp"
#include "pscp/rng.hpp"
#include "test_util.hpp"

using namespace pscp;
using testutil::random_tensor;

TEST_CASE("matmul by identity is identity") {
  Graph g;
  auto i2 = g.input(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  auto m = g.input(Tensor::matrix(2, 2, {1.5, -2.0, 3.0, 4.5}));
  auto out = g.matmul(i2, m);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(g.value(out)[i] == doctest::Approx(g.value(m)[i]));
  }
}

TEST_CASE("exp(ln(x)) recovers x") {
  Graph g;
  auto x = g.input(Tensor::vector({0.5, 2.0}));
  auto y = g.exp(g.log(x));
  CHECK(g.value(y)[0] == doctest::Approx(0.5));
  CHECK(g.value(y)[1] == doctest::Approx(2.0));
}

TEST_CASE("reduce_sum over columns of ones(3,4)") {
  Graph g;
  auto x = g.input(Tensor::full({3, 4}, 1.0));
  auto s = g.reduce_sum(x, 1);
  REQUIRE(g.value(s).shape() == std::vector<std::size_t>{3});
  for (std::size_t i = 0; i < 3; ++i) CHECK(g.value(s)[i] == 4.0);
}

TEST_CASE("backward of sum(w*w) is 2w") {
  Graph g;
  auto w = g.param(Tensor::vector({1.0, -2.0, 3.0}));
  auto loss = g.reduce_sum_all(g.mul(w, w));
  g.backward(loss);
  CHECK(g.grad(w)[0] == doctest::Approx(2.0));
  CHECK(g.grad(w)[1] == doctest::Approx(-4.0));
  CHECK(g.grad(w)[2] == doctest::Approx(6.0));
}

TEST_CASE("params off the path to the loss get zero grad") {
  Graph g;
  auto w = g.param(Tensor::vector({1.0, 2.0}));
  auto u = g.input(Tensor::vector({3.0, 4.0}));
  auto loss = g.reduce_sum_all(g.mul(u, u));
  g.backward(loss);
  CHECK(g.grad(w)[0] == 0.0);
  CHECK(g.grad(w)[1] == 0.0);
}

TEST_CASE("shared subexpressions accumulate gradients") {
  Graph g;
  auto x = g.param(Tensor::vector({1.0, 2.0}));
  auto loss = g.reduce_sum_all(g.add(x, x));
  g.backward(loss);
  CHECK(g.grad(x)[0] == doctest::Approx(2.0));
  CHECK(g.grad(x)[1] == doctest::Approx(2.0));
}

TEST_CASE("backward rejects non-scalar roots") {
  Graph g;
  auto x = g.param(Tensor::vector({1.0, 2.0}));
  CHECK_THROWS_AS(g.backward(x), ShapeError);
}

TEST_CASE("shape mismatch is rejected before compute") {
  Graph g;
  auto a = g.input(Tensor::matrix(2, 3, std::vector<double>(6, 1.0)));
  auto b = g.input(Tensor::matrix(2, 3, std::vector<double>(6, 1.0)));
  CHECK_THROWS_AS(g.matmul(a, b), ShapeError);
  auto c = g.input(Tensor::vector({1.0, 2.0}));
  CHECK_THROWS_AS(g.add(a, c), ShapeError);
}

TEST_CASE("non-finite result names the op") {
  Graph g;
  auto x = g.input(Tensor::vector({-1.0}));
  try {
    g.log(x);
    FAIL("expected NumericFailure");
  } catch (const NumericFailure& e) {
    CHECK(std::string(e.what()).find("log") != std::string::npos);
  }
}

TEST_CASE("two-layer tanh MLP gradient matches finite differences") {
  Rng rng(11);
  ParamSet params;
  params.add("W0", random_tensor({3, 8}, rng, -0.5, 0.5));
  params.add("b0", random_tensor({8}, rng, -0.5, 0.5));
  params.add("W1", random_tensor({8, 1}, rng, -0.5, 0.5));
  params.add("b1", random_tensor({1}, rng, -0.5, 0.5));
  const Tensor x = random_tensor({5, 3}, rng);
  auto f = [&x](Graph& g, const std::vector<Graph::Id>& p) {
    auto h = g.tanh(g.add(g.matmul(g.input(x), p[0]), p[1]));
    auto y = g.add(g.matmul(h, p[2]), p[3]);
    return g.mean_all(g.square(y));
  };
  CHECK(gradient_check(params, f, 1e-5) < 1e-5);
}

TEST_CASE("gradient_check on sum(w^2) is tight") {
  Rng rng(5);
  ParamSet params;
  params.add("w", random_tensor({6}, rng));
  auto f = [](Graph& g, const std::vector<Graph::Id>& p) {
    return g.reduce_sum_all(g.square(p[0]));
  };
  CHECK(gradient_check(params, f, 1e-5) < 1e-9);
}

// Every registered primitive, randomized inputs in [-2,2], 100 trials.
TEST_CASE("primitive gradients match central differences") {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const std::size_t d = 2 + (trial / 4) % 3;
    ParamSet params;
    params.add("A", random_tensor({n, d}, rng));
    params.add("B", random_tensor({d, n}, rng));
    params.add("v", random_tensor({d}, rng));
    const int variant = trial % 10;
    auto f = [variant](Graph& g, const std::vector<Graph::Id>& p) {
      Graph::Id a = p[0], b = p[1], v = p[2];
      switch (variant) {
        case 0:
          return g.mean_all(g.matmul(a, b));
        case 1:
          return g.mean_all(g.tanh(g.add(a, v)));
        case 2:
          return g.mean_all(g.exp(g.scale(a, 0.3)));
        case 3:
          // log over strictly positive values
          return g.mean_all(g.log(g.add_const(g.square(a), 0.5)));
        case 4:
          return g.mean_all(g.mul(g.sub(a, v), a));
        case 5:
          return g.mean_all(g.pow_const(g.add_const(g.square(a), 0.1), 1.7));
        case 6: {
          auto parts = g.split_cols(a, 1);
          return g.mean_all(g.concat_cols(g.neg(parts.second), parts.first));
        }
        case 7:
          return g.mean_all(g.reduce_sum(g.abs(g.add_const(a, 3.0)), 1));
        case 8:
          return g.mean_all(g.reduce_sum(g.square(a), 0));
        default:
          return g.mean_all(g.clamp(g.scale(a, 3.0), -4.0, 4.0));
      }
    };
    worst = std::max(worst, gradient_check(params, f, 1e-5));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("adam: zero grad leaves params unchanged, t increments") {
  ParamSet params;
  params.add("w", Tensor::vector({1.0, -2.0}));
  Adam opt;
  opt.step(params, {Tensor::zeros({2})});
  CHECK(opt.step_count() == 1);
  CHECK(params["w"][0] == 1.0);
  CHECK(params["w"][1] == -2.0);
}

TEST_CASE("adam: lr=0 is the identity") {
  ParamSet params;
  params.add("w", Tensor::vector({0.7}));
  AdamConfig cfg;
  cfg.lr = 0.0;
  Adam opt(cfg);
  opt.step(params, {Tensor::vector({123.0})});
  CHECK(params["w"][0] == 0.7);
}

TEST_CASE("adam: first step moves by about lr") {
  ParamSet params;
  params.add("w", Tensor::vector({5.0}));
  Adam opt;  // lr = 1e-3
  opt.step(params, {Tensor::vector({3.7})});
  // Bias-corrected first step: lr * g / (|g| + eps) ~ lr.
  CHECK(std::fabs((5.0 - params["w"][0]) - 1e-3) < 1e-8);
}

TEST_CASE("adam matches an independent recurrence oracle") {
  // Oracle: direct evaluation of the Adam recurrence, written separately
  // from the implementation.
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double g0 = 0.8;
  double m = 0.0, v = 0.0, w_oracle = 2.0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * g0;
    v = b2 * v + (1 - b2) * g0 * g0;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    w_oracle -= lr * mh / (std::sqrt(vh) + eps);
  }

  ParamSet params;
  params.add("w", Tensor::vector({2.0}));
  Adam opt;
  opt.step(params, {Tensor::vector({g0})});
  opt.step(params, {Tensor::vector({g0})});
  CHECK(testutil::rel_err(params["w"][0], w_oracle) < 1e-12);
}

TEST_CASE("adam rejects NaN gradients") {
  ParamSet params;
  params.add("w", Tensor::vector({1.0}));
  Adam opt;
  CHECK_THROWS_AS(opt.step(params, {Tensor::vector({std::nan("")})}),
                  NumericFailure);
}
