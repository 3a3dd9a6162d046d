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
#include <vector>

#include "pscp/analysis.hpp"
#include "test_util.hpp"

using namespace pscp;
using testutil::random_tensor;

namespace {

ComponentStats random_stats(std::size_t k, std::size_t d, Rng& rng) {
  ComponentStats st;
  st.mean_image.assign(k, std::vector<double>(d, 0.0));
  st.sigma2.assign(k, std::vector<double>(d, 0.0));
  st.n.assign(k, 0);
  st.w.assign(k, 0.0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    st.n[i] = 1 + static_cast<std::size_t>(rng.below(50));
    total += st.n[i];
    for (std::size_t j = 0; j < d; ++j) {
      st.mean_image[i][j] = rng.uniform(-2.0, 2.0);
      st.sigma2[i][j] = rng.uniform(0.0, 4.0);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    st.w[i] = static_cast<double>(st.n[i]) / static_cast<double>(total);
  }
  return st;
}

// Literal transcription of the formula with explicit channel grouping,
// written without reference to the library implementation.
double delta_oracle(const ComponentStats& in_st, const ComponentStats& out_st,
                    const ChannelFactors& f, double s2psi) {
  double acc = 0.0;
  for (std::size_t c = 0; c < f.g.size(); ++c) {
    double ch = 0.0;
    for (std::size_t j = 0; j < f.channel_of.size(); ++j) {
      if (f.channel_of[j] != c) continue;
      for (std::size_t i = 0; i < out_st.k(); ++i) {
        if (out_st.n[i] > 0) ch += out_st.w[i] * out_st.sigma2[i][j];
        if (in_st.n[i] > 0) ch -= in_st.w[i] * in_st.sigma2[i][j];
      }
    }
    acc += f.g[c] * ch;
  }
  return -acc / (2.0 * s2psi);
}

}  // namespace

TEST_CASE("identical statistics give delta zero") {
  Rng rng(1);
  ComponentStats st = random_stats(3, 4, rng);
  ChannelFactors f = ChannelFactors::unit(4);
  CHECK(second_order_delta(st, st, f, 1.0) == 0.0);
}

TEST_CASE("tight adversarial data gains half a nat per unit deviation") {
  // One component, one dim: reference deviation 1, compared set 0.
  ComponentStats in_st, out_st;
  in_st.mean_image = {{0.0}};
  in_st.sigma2 = {{1.0}};
  in_st.w = {1.0};
  in_st.n = {10};
  out_st = in_st;
  out_st.sigma2 = {{0.0}};
  ChannelFactors f = ChannelFactors::unit(1);
  CHECK(second_order_delta(in_st, out_st, f, 1.0) == doctest::Approx(0.5));
  auto [bound, arg] = second_order_bound(in_st, out_st, f, 1.0);
  CHECK(bound == doctest::Approx(0.5));
  CHECK(arg.first == 0);
  CHECK(arg.second == 0);
}

TEST_CASE("delta matches the brute-force oracle") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(4);
    const std::size_t d = 1 + rng.below(6);
    ComponentStats a = random_stats(k, d, rng);
    ComponentStats b = random_stats(k, d, rng);
    // Random channel grouping.
    ChannelFactors f;
    const std::size_t nc = 1 + rng.below(d);
    f.g.resize(nc);
    for (double& g : f.g) g = rng.uniform(0.0, 3.0);
    f.channel_of.resize(d);
    for (std::size_t j = 0; j < d; ++j) f.channel_of[j] = rng.below(nc);
    const double s2psi = rng.uniform(0.25, 4.0);
    const double got = second_order_delta(a, b, f, s2psi);
    const double want = delta_oracle(a, b, f, s2psi);
    CHECK(std::fabs(got - want) < 1e-12);
  }
}

TEST_CASE("the pair bound dominates delta") {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.below(4);
    const std::size_t d = 1 + rng.below(5);
    ComponentStats a = random_stats(k, d, rng);
    ComponentStats b = random_stats(k, d, rng);
    ChannelFactors f = ChannelFactors::unit(d);
    const double delta = second_order_delta(a, b, f, 1.0);
    const auto [bound, arg] = second_order_bound(a, b, f, 1.0);
    CHECK(delta <= bound + 1e-12);
  }
}

TEST_CASE("zero channel factors zero everything") {
  Rng rng(4);
  ComponentStats a = random_stats(2, 3, rng);
  ComponentStats b = random_stats(2, 3, rng);
  ChannelFactors f = ChannelFactors::unit(3);
  for (double& g : f.g) g = 0.0;
  CHECK(second_order_delta(a, b, f, 1.0) == 0.0);
  CHECK(second_order_bound(a, b, f, 1.0).first == 0.0);
}

TEST_CASE("delta and bound scale linearly in g and inversely in sigma2_psi") {
  Rng rng(5);
  ComponentStats a = random_stats(3, 4, rng);
  ComponentStats b = random_stats(3, 4, rng);
  ChannelFactors f = ChannelFactors::unit(4);
  const double d1 = second_order_delta(a, b, f, 1.0);
  const double b1 = second_order_bound(a, b, f, 1.0).first;
  ChannelFactors f3 = f;
  for (double& g : f3.g) g *= 3.0;
  CHECK(second_order_delta(a, b, f3, 1.0) == doctest::Approx(3.0 * d1));
  CHECK(second_order_bound(a, b, f3, 1.0).first == doctest::Approx(3.0 * b1));
  CHECK(second_order_delta(a, b, f, 2.0) == doctest::Approx(0.5 * d1));
  CHECK(second_order_bound(a, b, f, 2.0).first == doctest::Approx(0.5 * b1));
}

TEST_CASE("single component: bound equals delta") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    ComponentStats a = random_stats(1, 3, rng);
    ComponentStats b = random_stats(1, 3, rng);
    a.w = {1.0};
    b.w = {1.0};
    ChannelFactors f = ChannelFactors::unit(3);
    CHECK(second_order_bound(a, b, f, 1.0).first ==
          doctest::Approx(second_order_delta(a, b, f, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("component_sigma hand example") {
  Dataset data;
  data.rows = Tensor::matrix(2, 2, {0.0, 0.0, 2.0, 0.0});
  ComponentAssignment assign{{0, 0}};
  ComponentStats st = component_sigma(data, assign, {{0.0, 0.0}});
  REQUIRE(st.occupied(0));
  CHECK(st.sigma2[0][0] == doctest::Approx(2.0));
  CHECK(st.sigma2[0][1] == 0.0);
  CHECK(st.w[0] == 1.0);
}

TEST_CASE("deviation from the data mean reduces to biased variance") {
  Rng rng(7);
  Dataset data;
  data.rows = random_tensor({100, 3}, rng);
  std::vector<double> mean(3, 0.0);
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t j = 0; j < 3; ++j) mean[j] += data.rows.at(i, j);
  }
  for (double& m : mean) m /= 100.0;
  ComponentAssignment assign;
  assign.index.assign(100, 0);
  ComponentStats st = component_sigma(data, assign, {mean});
  for (std::size_t j = 0; j < 3; ++j) {
    double var = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      const double diff = data.rows.at(i, j) - mean[j];
      var += diff * diff;
    }
    var /= 100.0;  // biased, matching the statistic's definition
    CHECK(st.sigma2[0][j] == doctest::Approx(var).epsilon(1e-12));
  }
}

TEST_CASE("weighted component deviations sum to the pooled deviation") {
  Rng rng(8);
  Dataset data;
  data.rows = random_tensor({200, 2}, rng, -3.0, 3.0);
  ComponentAssignment assign;
  assign.index.resize(200);
  for (auto& a : assign.index) a = static_cast<int>(rng.below(3));
  std::vector<std::vector<double>> mi = {
      {0.5, -0.5}, {-1.0, 1.0}, {0.0, 0.0}};
  ComponentStats st = component_sigma(data, assign, mi);
  for (std::size_t j = 0; j < 2; ++j) {
    double pooled = 0.0;
    for (std::size_t i = 0; i < 200; ++i) {
      const auto c = static_cast<std::size_t>(assign.index[i]);
      const double diff = data.rows.at(i, j) - mi[c][j];
      pooled += diff * diff;
    }
    pooled /= 200.0;
    double weighted = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      if (st.occupied(c)) weighted += st.w[c] * st.sigma2[c][j];
    }
    CHECK(std::fabs(weighted - pooled) < 1e-12);
  }
  double wsum = 0.0;
  std::size_t nsum = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    wsum += st.w[c];
    nsum += st.n[c];
  }
  CHECK(std::fabs(wsum - 1.0) < 1e-12);
  CHECK(nsum == 200);
}

TEST_CASE("nearest-mean allocation") {
  MixturePrior uni = MixturePrior::standard_gaussian(2);
  Rng rng(9);
  Tensor z = random_tensor({10, 2}, rng);
  ComponentAssignment a = allocate_nearest(z, uni);
  for (int v : a.index) CHECK(v == 0);

  MixturePrior bi = MixturePrior::gaussian({{-2.0, 0.0}, {2.0, 0.0}});
  Tensor pts = Tensor::matrix(3, 2, {-1.5, 0.3, 1.9, -0.2, 0.0, 5.0});
  ComponentAssignment b = allocate_nearest(pts, bi);
  CHECK(b.index[0] == 0);
  CHECK(b.index[1] == 1);
  CHECK(b.index[2] == 0);  // exactly equidistant: lowest index wins
}

TEST_CASE("report withholds the bound when a component is starved") {
  Rng rng(10);
  ComponentStats a = random_stats(2, 2, rng);
  ComponentStats b = random_stats(2, 2, rng);
  b.n[1] = 0;
  b.w = {1.0, 0.0};
  b.sigma2[1].clear();
  ChannelFactors f = ChannelFactors::unit(2);
  CHECK_THROWS_AS(second_order_bound(a, b, f, 1.0), ShapeError);
  SecondOrderReport rep = second_order_report(a, b, f, 1.0);
  CHECK(!rep.has_bound);
  SecondOrderReport full = second_order_report(a, a, f, 1.0);
  CHECK(full.has_bound);
  CHECK(full.delta <= full.bound + 1e-9);
}

TEST_CASE("prior samples sit inside the 3-sigma box at the expected rate") {
  for (std::size_t dim : {2u, 10u}) {
    std::vector<std::vector<double>> means = {
        std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    means[0][0] = -6.0;
    means[1][0] = 6.0;
    MixturePrior prior = MixturePrior::gaussian(means);
    Rng rng(11 + dim);
    PriorSample s = prior_sample(prior, 20000, rng);
    ForceOutResult r = latent_forceout(s.z, prior);
    const double p_dim = std::erf(3.0 / std::sqrt(2.0));
    const double expect = std::pow(p_dim, static_cast<double>(dim));
    CHECK(std::fabs(r.fraction - expect) < 0.01);
  }
}

TEST_CASE("flow mean images: sampled and deterministic estimates agree") {
  // Near-identity flow: both estimates must sit close to the component
  // mean itself.
  FlowModel m = FlowModel::init({}, 12);
  MixturePrior prior = MixturePrior::gaussian({{-3.0, 0.0}, {3.0, 0.0}});
  MeanImage a = component_mean_image(m, prior, 0, 20000, 13);
  MeanImage b = component_mean_image(m, prior, 0, 20000, 13);
  CHECK(a.sampled == b.sampled);  // seed-deterministic
  // se of the sampled mean is ~ sd/sqrt(n); allow 4 se.
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::fabs(a.sampled[j] - a.decoded[j]) < 4.0 / std::sqrt(20000.0));
  }
}
