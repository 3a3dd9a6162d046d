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

#include <cstdio>
#include <vector>

#include "pscp/kernels.hpp"
#include "pscp/rng.hpp"
#include "test_util.hpp"

using namespace pscp;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-3.0, 3.0);
  return v;
}

// Run f once under the scalar reference and once under the dispatched
// implementation, compare outputs elementwise.
void check_equivalent(const std::vector<double>& ref,
                      const std::vector<double>& simd, double tol = 1e-13) {
  REQUIRE(ref.size() == simd.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(testutil::rel_err(ref[i], simd[i]) < tol);
  }
}

}  // namespace

TEST_CASE("dispatched elementwise kernels match scalar reference") {
  Rng rng(42);
  std::printf("active ISA: %s\n", kern::active_isa());
  for (std::size_t n : {1u, 3u, 4u, 7u, 16u, 63u, 256u, 1001u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    std::vector<double> r1(n), r2(n);

    kern::force_scalar(true);
    kern::add(r1.data(), a.data(), b.data(), n);
    kern::force_scalar(false);
    kern::add(r2.data(), a.data(), b.data(), n);
    check_equivalent(r1, r2);

    kern::force_scalar(true);
    kern::sub(r1.data(), a.data(), b.data(), n);
    kern::force_scalar(false);
    kern::sub(r2.data(), a.data(), b.data(), n);
    check_equivalent(r1, r2);

    kern::force_scalar(true);
    kern::mul(r1.data(), a.data(), b.data(), n);
    kern::force_scalar(false);
    kern::mul(r2.data(), a.data(), b.data(), n);
    check_equivalent(r1, r2);

    r1 = a;
    r2 = a;
    kern::force_scalar(true);
    kern::axpy(r1.data(), 1.7, b.data(), n);
    kern::force_scalar(false);
    kern::axpy(r2.data(), 1.7, b.data(), n);
    check_equivalent(r1, r2);

    kern::force_scalar(true);
    kern::scale(r1.data(), -0.3, a.data(), n);
    kern::force_scalar(false);
    kern::scale(r2.data(), -0.3, a.data(), n);
    check_equivalent(r1, r2);

    kern::force_scalar(true);
    const double s1 = kern::sum(a.data(), n);
    const double d1 = kern::dot(a.data(), b.data(), n);
    kern::force_scalar(false);
    const double s2 = kern::sum(a.data(), n);
    const double d2 = kern::dot(a.data(), b.data(), n);
    CHECK(testutil::rel_err(s1, s2, 1e-9) < 1e-12);
    CHECK(testutil::rel_err(d1, d2, 1e-9) < 1e-12);
  }
}

TEST_CASE("dispatched matmul variants match scalar reference") {
  Rng rng(7);
  const std::size_t dims[][3] = {{1, 1, 1},  {2, 3, 4},   {5, 1, 9},
                                 {17, 8, 3}, {64, 64, 64}, {31, 7, 13}};
  for (const auto& d : dims) {
    const std::size_t m = d[0], k = d[1], n = d[2];
    const auto a = random_vec(m * k, rng);
    const auto b = random_vec(k * n, rng);
    const auto bt = random_vec(n * k, rng);
    const auto at = random_vec(k * m, rng);
    std::vector<double> c1(m * n, 0.0), c2(m * n, 0.0);

    kern::force_scalar(true);
    kern::matmul(c1.data(), a.data(), b.data(), m, k, n);
    kern::force_scalar(false);
    kern::matmul(c2.data(), a.data(), b.data(), m, k, n);
    check_equivalent(c1, c2, 1e-11);

    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    kern::force_scalar(true);
    kern::matmul_tn(c1.data(), at.data(), b.data(), m, k, n);
    kern::force_scalar(false);
    kern::matmul_tn(c2.data(), at.data(), b.data(), m, k, n);
    check_equivalent(c1, c2, 1e-11);

    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    kern::force_scalar(true);
    kern::matmul_nt(c1.data(), a.data(), bt.data(), m, k, n);
    kern::force_scalar(false);
    kern::matmul_nt(c2.data(), a.data(), bt.data(), m, k, n);
    check_equivalent(c1, c2, 1e-11);
  }
}

TEST_CASE("matmul agrees with naive triple loop") {
  Rng rng(3);
  const std::size_t m = 9, k = 11, n = 6;
  const auto a = random_vec(m * k, rng);
  const auto b = random_vec(k * n, rng);
  std::vector<double> naive(m * n, 0.0), c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += a[i * k + l] * b[l * n + j];
      naive[i * n + j] = s;
    }
  }
  kern::matmul(c.data(), a.data(), b.data(), m, k, n);
  check_equivalent(naive, c, 1e-12);

  // Transposed variants against the same oracle.
  std::vector<double> at(k * m), bt(n * k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t l = 0; l < k; ++l) at[l * m + i] = a[i * k + l];
  }
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t j = 0; j < n; ++j) bt[j * k + l] = b[l * n + j];
  }
  std::fill(c.begin(), c.end(), 0.0);
  kern::matmul_tn(c.data(), at.data(), b.data(), m, k, n);
  check_equivalent(naive, c, 1e-12);
  std::fill(c.begin(), c.end(), 0.0);
  kern::matmul_nt(c.data(), a.data(), bt.data(), m, k, n);
  check_equivalent(naive, c, 1e-12);
}

TEST_CASE("matmul accumulates into C") {
  std::vector<double> c(4, 1.0);
  const std::vector<double> a = {1, 0, 0, 1};  // I_2
  const std::vector<double> b = {2, 3, 4, 5};
  kern::matmul(c.data(), a.data(), b.data(), 2, 2, 2);
  CHECK(c[0] == doctest::Approx(3.0));
  CHECK(c[1] == doctest::Approx(4.0));
  CHECK(c[2] == doctest::Approx(5.0));
  CHECK(c[3] == doctest::Approx(6.0));
}
