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

#ifndef PSCP_TESTS_TEST_UTIL_HPP
#define PSCP_TESTS_TEST_UTIL_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "pscp/rng.hpp"
#include "pscp/tensor.hpp"

namespace pscp::testutil {

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng,
                            double lo = -2.0, double hi = 2.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Adaptive Simpson quadrature. Independent of any library code under
// test; used as the integration oracle.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-10,
                               int depth = 30) {
  struct Rec {
    static double simpson(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb) {
      return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }
    static double go(const std::function<double(double)>& f, double a,
                     double b, double fa, double fm, double fb, double whole,
                     double tol, int depth) {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = simpson(f, a, m, fa, flm, fm);
      const double right = simpson(f, m, b, fm, frm, fb);
      if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
      }
      return go(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
             go(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
    }
  };
  // Pre-split into panels so narrow peaks are not missed by the first
  // subdivision test.
  const int panels = 32;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double pa = a + (b - a) * p / panels;
    const double pb = a + (b - a) * (p + 1) / panels;
    const double m = 0.5 * (pa + pb);
    const double fa = f(pa), fm = f(m), fb = f(pb);
    total += Rec::go(f, pa, pb, fa, fm, fb, Rec::simpson(f, pa, pb, fa, fm, fb),
                     tol / panels, depth);
  }
  return total;
}

struct MeanStd {
  double mean;
  double std;     // population
  double se;      // standard error of the mean
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size());
  const double sd = std::sqrt(v);
  return {m, sd, sd / std::sqrt(static_cast<double>(xs.size()))};
}

// Spearman rank correlation (no tie handling; inputs are distinct in
// every use here).
inline double spearman(const std::vector<double>& x,
                       const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      double ri = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (v[j] < v[i]) ri += 1.0;
      }
      r[i] = ri;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double dn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (dn * (dn * dn - 1.0));
}

}  // namespace pscp::testutil

#endif  // PSCP_TESTS_TEST_UTIL_HPP
