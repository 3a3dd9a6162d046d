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

#include "pscp/priors.hpp"
#include "test_util.hpp"

using namespace pscp;
using testutil::adaptive_simpson;
using testutil::rel_err;

TEST_CASE("lanczos log_gamma accurate on [0.1, 10]") {
  // std::lgamma as the independent reference.
  for (double x = 0.1; x <= 10.0; x += 0.07) {
    CHECK(rel_err(log_gamma(x), std::lgamma(x), 1e-12) < 1e-10);
  }
}

TEST_CASE("1D standard gaussian log pdf at zero") {
  GaussianComponent c{{0.0}, {1.0}};
  CHECK(gaussian_log_pdf(c, std::vector<double>{0.0}) ==
        doctest::Approx(-0.9189385).epsilon(1e-6));
}

TEST_CASE("gaussian log pdf is shift invariant") {
  GaussianComponent centered{{0.0, 0.0}, {0.7, 1.3}};
  GaussianComponent shifted{{2.5, -1.0}, {0.7, 1.3}};
  const std::vector<double> u = {0.4, -0.9};
  const std::vector<double> zu = {2.9, -1.9};
  CHECK(gaussian_log_pdf(shifted, zu) ==
        doctest::Approx(gaussian_log_pdf(centered, u)).epsilon(1e-14));
}

TEST_CASE("2D gaussian log pdf matches high-precision closed form") {
  GaussianComponent c{{1.5, -0.5}, {0.5, 2.0}};
  const std::vector<double> z = {0.3, 0.8};
  // Independent long-double evaluation.
  long double lp = 0.0L;
  const long double log2pi = 1.83787706640934548356065947281L;
  const long double mu[2] = {1.5L, -0.5L}, var[2] = {0.5L, 2.0L};
  const long double zz[2] = {0.3L, 0.8L};
  for (int d = 0; d < 2; ++d) {
    lp += -0.5L * (log2pi + std::log(var[d])) -
          (zz[d] - mu[d]) * (zz[d] - mu[d]) / (2.0L * var[d]);
  }
  CHECK(rel_err(gaussian_log_pdf(c, z), static_cast<double>(lp)) < 1e-12);
}

TEST_CASE("generalized gaussian with beta=2, alpha=sqrt(2) is standard gaussian") {
  GenGaussianComponent gg{{0.0}, std::sqrt(2.0), 2.0};
  GaussianComponent gc{{0.0}, {1.0}};
  for (double z = -6.0; z <= 6.0; z += 0.37) {
    CHECK(std::fabs(gen_gaussian_log_pdf(gg, std::vector<double>{z}) -
                    gaussian_log_pdf(gc, std::vector<double>{z})) < 1e-9);
  }
}

TEST_CASE("generalized gaussian log pdf at the mean") {
  const double alpha = 0.8, beta = 4.0;
  GenGaussianComponent gg{{1.2}, alpha, beta};
  const double expected =
      std::log(beta / (2.0 * alpha)) - log_gamma(1.0 / beta);
  CHECK(gen_gaussian_log_pdf(gg, std::vector<double>{1.2}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("unit_variance_alpha closed-form values") {
  CHECK(rel_err(unit_variance_alpha(2.0), std::sqrt(2.0)) < 1e-12);
  CHECK(rel_err(unit_variance_alpha(1.0), std::sqrt(0.5)) < 1e-12);
}

TEST_CASE("unit_variance_alpha gives unit variance by quadrature") {
  for (double beta : {1.0, 2.0, 4.0, 8.0}) {
    GenGaussianComponent gg{{0.0}, unit_variance_alpha(beta), beta};
    const double var = adaptive_simpson(
        [&](double z) {
          return z * z *
                 std::exp(gen_gaussian_log_pdf(gg, std::vector<double>{z}));
        },
        -40.0, 40.0, 1e-12);  // wide: the beta=1 z^2 tail decays slowly
    CHECK(std::fabs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("1D densities normalize to 1 by quadrature") {
  GaussianComponent gc{{0.7}, {1.0}};
  const double zg = adaptive_simpson(
      [&](double z) {
        return std::exp(gaussian_log_pdf(gc, std::vector<double>{z}));
      },
      0.7 - 12.0, 0.7 + 12.0, 1e-12);
  CHECK(std::fabs(zg - 1.0) < 1e-6);
  for (double beta : {1.0, 2.0, 4.0, 8.0}) {
    GenGaussianComponent gg{{-0.3}, unit_variance_alpha(beta), beta};
    const double zn = adaptive_simpson(
        [&](double z) {
          return std::exp(gen_gaussian_log_pdf(gg, std::vector<double>{z}));
        },
        -0.3 - 12.0, -0.3 + 12.0, 1e-12);
    CHECK(std::fabs(zn - 1.0) < 1e-6);
  }
}

TEST_CASE("gen gaussian log pdf is exactly symmetric about the mean") {
  // Reflections constructed so |z - mu| is bitwise identical on both
  // sides (mean zero; +u and -u negate exactly in IEEE754).
  GenGaussianComponent gg{{0.0, 0.0}, unit_variance_alpha(4.0), 4.0};
  for (double u = 0.1; u < 4.0; u += 0.53) {
    const std::vector<double> plus = {u, 2 * u};
    const std::vector<double> minus = {-u, -2 * u};
    CHECK(gen_gaussian_log_pdf(gg, plus) == gen_gaussian_log_pdf(gg, minus));
  }
}

TEST_CASE("mixture with K=1 equals the component") {
  auto p = MixturePrior::standard_gaussian(3);
  const std::vector<double> z = {0.3, -0.4, 1.0};
  CHECK(mixture_log_pdf(p, z) ==
        doctest::Approx(component_log_pdf(p, z, 0)).epsilon(1e-15));
}

TEST_CASE("mixture of two identical components equals one component") {
  auto p = MixturePrior::gaussian({{1.0, 0.0}, {1.0, 0.0}});
  const std::vector<double> z = {0.2, 0.4};
  CHECK(mixture_log_pdf(p, z) ==
        doctest::Approx(component_log_pdf(p, z, 0)).epsilon(1e-14));
}

TEST_CASE("mixture log pdf matches extended-precision brute force") {
  Rng rng(99);
  auto p = MixturePrior::gaussian(
      {{0.5, -1.0, 2.0}, {-2.0, 0.3, 0.1}, {1.0, 1.0, -1.0}}, 1.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> z(3);
    for (double& v : z) v = rng.uniform(-4.0, 4.0);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < 3; ++i) {
      acc += std::exp(static_cast<long double>(component_log_pdf(p, z, i)));
    }
    const double naive = static_cast<double>(std::log(acc / 3.0L));
    CHECK(rel_err(mixture_log_pdf(p, z), naive) < 1e-12);
  }
}

TEST_CASE("log-sum-exp stays finite for extremely low component log pdfs") {
  // Two components very far away: component log pdfs ~ -1e8.
  auto p = MixturePrior::gaussian({{20000.0}, {-20000.0}});
  const std::vector<double> z = {0.0};
  CHECK(component_log_pdf(p, z, 0) < -1e7);
  CHECK(std::isfinite(mixture_log_pdf(p, z)));
}

TEST_CASE("mixture log pdf >= max component log pdf - ln K") {
  Rng rng(17);
  auto p = MixturePrior::gaussian({{3.0, 0.0}, {-3.0, 0.0}, {0.0, 3.0}});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> z = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    double best = -1e300;
    for (std::size_t i = 0; i < 3; ++i) {
      best = std::max(best, component_log_pdf(p, z, i));
    }
    CHECK(mixture_log_pdf(p, z) >= best - std::log(3.0) - 1e-12);
  }
}

TEST_CASE("component vs mixture in the far-separated limit") {
  auto p = MixturePrior::gaussian({{30.0, 0.0}, {-30.0, 0.0}});
  const std::vector<double> z = {29.7, 0.4};
  CHECK(std::fabs(mixture_log_pdf(p, z) + std::log(2.0) -
                  component_log_pdf(p, z, 0)) < 1e-12);
}

TEST_CASE("component_log_pdf rejects out-of-range index") {
  auto p = MixturePrior::standard_gaussian(2);
  CHECK_THROWS_AS(component_log_pdf(p, std::vector<double>{0.0, 0.0}, 1),
                  ShapeError);
}

TEST_CASE("graph-side assigned log pdf matches the numeric path and its gradient") {
  Rng rng(31);
  auto p = MixturePrior::gaussian({{2.0, 0.0}, {-2.0, 0.0}}, 1.0);
  const std::vector<int> assign = {0, 1, 0};
  ParamSet params;
  params.add("z", testutil::random_tensor({3, 2}, rng));
  // Values agree with the numeric component_log_pdf.
  {
    Graph g;
    auto bound = bind_params(g, params);
    auto lp = assigned_log_pdf_node(g, bound.ids[0], p, assign);
    for (std::size_t i = 0; i < 3; ++i) {
      const double* row = params["z"].data() + 2 * i;
      CHECK(rel_err(g.value(lp)[i],
                    component_log_pdf(p, std::span<const double>(row, 2),
                                      static_cast<std::size_t>(assign[i]))) <
            1e-12);
    }
  }
  // Gradient w.r.t. z matches finite differences.
  auto f = [&](Graph& g, const std::vector<Graph::Id>& ps) {
    return g.mean_all(assigned_log_pdf_node(g, ps[0], p, assign));
  };
  CHECK(gradient_check(params, f, 1e-5) < 1e-5);

  // Same check for a generalized-Gaussian prior, beta=4, z != mu.
  auto pg = MixturePrior::gen_gaussian_unit_var({{2.0, 0.0}, {-2.0, 0.0}}, 4.0);
  auto fg = [&](Graph& g, const std::vector<Graph::Id>& ps) {
    return g.mean_all(assigned_log_pdf_node(g, ps[0], pg, assign));
  };
  CHECK(gradient_check(params, fg, 1e-5) < 1e-5);
}

TEST_CASE("prior_sample: n=0 gives an empty batch") {
  Rng rng(1);
  auto p = MixturePrior::standard_gaussian(2);
  auto s = prior_sample(p, 0, rng);
  CHECK(s.z.rows() == 0);
  CHECK(s.labels.empty());
}

TEST_CASE("prior_sample: far components get ~50/50 labels") {
  Rng rng(123);
  auto p = MixturePrior::gaussian({{50.0}, {-50.0}});
  const std::size_t n = 20000;
  auto s = prior_sample(p, n, rng);
  std::size_t c0 = 0;
  for (int l : s.labels) c0 += (l == 0);
  // 3-sigma binomial band around n/2.
  const double sigma = std::sqrt(0.25 * n);
  CHECK(std::fabs(static_cast<double>(c0) - 0.5 * n) < 3.0 * sigma);
  // Labels match the side of the latent space the point landed on.
  for (std::size_t i = 0; i < n; ++i) {
    CHECK((s.labels[i] == 0) == (s.z[i] > 0.0));
  }
}

TEST_CASE("gen gaussian sampling matches the quadrature moment oracle") {
  const double beta = 4.0;
  const double alpha = unit_variance_alpha(beta);
  GenGaussianComponent gg{{0.0}, alpha, beta};
  // Oracle: E[z^2] and E[z^4] by quadrature.
  auto moment = [&](int k) {
    return adaptive_simpson(
        [&](double z) {
          return std::pow(z, k) *
                 std::exp(gen_gaussian_log_pdf(gg, std::vector<double>{z}));
        },
        -12.0, 12.0, 1e-12);
  };
  const double m2 = moment(2), m4 = moment(4);
  // Also matches the Gamma-function relation for the 4th/2nd moment ratio.
  const double ratio_gamma =
      std::exp(log_gamma(5.0 / beta) + log_gamma(1.0 / beta) -
               2.0 * log_gamma(3.0 / beta));
  CHECK(rel_err(m4 / (m2 * m2), ratio_gamma, 1e-9) < 1e-8);

  Rng rng(77);
  auto p = MixturePrior::gen_gaussian_unit_var({{0.0}}, beta);
  const std::size_t n = 200000;
  auto s = prior_sample(p, n, rng);
  std::vector<double> z2(n), z4(n);
  for (std::size_t i = 0; i < n; ++i) {
    z2[i] = s.z[i] * s.z[i];
    z4[i] = z2[i] * z2[i];
  }
  const auto s2 = testutil::mean_std(z2);
  const auto s4 = testutil::mean_std(z4);
  CHECK(std::fabs(s2.mean - m2) < 3.0 * s2.se);
  CHECK(std::fabs(s4.mean - m4) < 3.0 * s4.se);
}

TEST_CASE("component construction rejects bad parameters") {
  CHECK_THROWS_AS(MixturePrior::gaussian({{0.0}}, -1.0), ShapeError);
  CHECK_THROWS_AS(MixturePrior::gen_gaussian({{0.0}}, -2.0, 1.0), ShapeError);
  CHECK_THROWS_AS(MixturePrior::gen_gaussian({{0.0}}, 2.0, 0.0), ShapeError);
}
