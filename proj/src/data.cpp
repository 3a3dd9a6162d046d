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

#include "pscp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "pscp/errors.hpp"

namespace pscp {

Dataset gen_mixture(const SyntheticSpec& spec) {
  if (spec.means.empty() || spec.means.size() != spec.variances.size()) {
    throw ShapeError("gen_mixture: means/variances mismatch");
  }
  const std::size_t k = spec.means.size();
  const std::size_t d = spec.means[0].size();
  for (std::size_t i = 0; i < k; ++i) {
    if (spec.means[i].size() != d || spec.variances[i].size() != d) {
      throw ShapeError("gen_mixture: inconsistent dims");
    }
    for (double v : spec.variances[i]) {
      if (!(v > 0.0)) throw ShapeError("gen_mixture: variance must be > 0");
    }
  }
  Rng rng(spec.seed);
  const std::size_t n = k * spec.n_per_component;
  Dataset out;
  out.rows = Tensor({n, d});
  out.labels = std::vector<int>(n);
  out.source = "synthetic-mixture";
  std::size_t row = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < spec.n_per_component; ++j, ++row) {
      (*out.labels)[row] = static_cast<int>(c);
      for (std::size_t dd = 0; dd < d; ++dd) {
        out.rows.at(row, dd) =
            spec.means[c][dd] + std::sqrt(spec.variances[c][dd]) * rng.normal();
      }
    }
  }
  return out;
}

Dataset gen_ood(std::size_t dim, std::uint64_t seed, std::size_t n,
                double var) {
  if (dim < 1) throw ShapeError("gen_ood: dim must be >= 1");
  Rng rng(seed);
  Dataset out;
  out.rows = Tensor({n, dim});
  out.source = "synthetic-ood";
  const double sd = std::sqrt(var);
  for (std::size_t i = 0; i < n * dim; ++i) out.rows[i] = sd * rng.normal();
  return out;
}

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace

KMeansResult kmeans(const Dataset& data, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter) {
  const std::size_t n = data.size(), d = data.dim();
  if (k == 0 || k > n) throw ShapeError("kmeans: need 1 <= k <= n");
  if (max_iter < 1) throw ShapeError("kmeans: max_iter must be >= 1");
  Rng rng(seed);

  // k-means++ seeding: D^2 sampling.
  Tensor centroids({k, d});
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  {
    const std::size_t first = static_cast<std::size_t>(rng.below(n));
    std::copy_n(data.rows.data() + first * d, d, centroids.data());
  }
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], sq_dist(data.rows.data() + i * d,
                                              centroids.data() + (c - 1) * d, d));
      total += min_d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += min_d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    std::copy_n(data.rows.data() + pick * d, d, centroids.data() + c * d);
  }

  KMeansResult res;
  res.assignment.index.assign(n, 0);
  std::vector<int> prev(n, -1);
  std::vector<std::size_t> counts(k);
  for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
    // Assignment step.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int bc = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d2 =
            sq_dist(data.rows.data() + i * d, centroids.data() + c * d, d);
        if (d2 < best) {
          best = d2;
          bc = static_cast<int>(c);
        }
      }
      res.assignment.index[i] = bc;
      min_d2[i] = best;
      inertia += best;
    }
    res.inertia = inertia;
    if (res.assignment.index == prev) break;
    prev = res.assignment.index;

    // Update step.
    centroids.fill(0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(res.assignment.index[i]);
      ++counts[c];
      for (std::size_t dd = 0; dd < d; ++dd) {
        centroids.at(c, dd) += data.rows.at(i, dd);
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t dd = 0; dd < d; ++dd) {
          centroids.at(c, dd) /= static_cast<double>(counts[c]);
        }
      } else {
        // Empty cluster: re-seed at the point farthest from its centroid.
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (min_d2[i] > min_d2[far]) far = i;
        }
        std::copy_n(data.rows.data() + far * d, d, centroids.data() + c * d);
        min_d2[far] = 0.0;
      }
    }
  }
  res.iterations = std::min(res.iterations, max_iter);
  res.centroids = std::move(centroids);
  return res;
}

ComponentAssignment assign_components(const Dataset& data, AssignMode mode,
                                      std::size_t k, std::uint64_t seed) {
  if (mode == AssignMode::kLabels) {
    if (!data.labels) {
      throw ShapeError("assign_components: labels mode requires labels");
    }
    return ComponentAssignment{*data.labels};
  }
  KMeansResult km = kmeans(data, k, seed);
  // Canonicalize: cluster order by ascending centroid first coordinate.
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return km.centroids.at(a, 0) < km.centroids.at(b, 0);
  });
  std::vector<int> remap(k);
  for (std::size_t rank = 0; rank < k; ++rank) {
    remap[order[rank]] = static_cast<int>(rank);
  }
  ComponentAssignment out;
  out.index.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.index[i] = remap[static_cast<std::size_t>(km.assignment.index[i])];
  }
  return out;
}

void csv_write(const std::string& path, const Dataset& data) {
  std::ofstream f(path);
  if (!f) throw ConfigError("csv_write: cannot open '" + path + "'");
  const std::size_t n = data.size(), d = data.dim();
  for (std::size_t dd = 0; dd < d; ++dd) {
    f << (dd ? ",x" : "x") << dd;
  }
  if (data.labels) f << ",label";
  f << "\n";
  char buf[40];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t dd = 0; dd < d; ++dd) {
      std::snprintf(buf, sizeof buf, "%.17g", data.rows.at(i, dd));
      if (dd) f << ',';
      f << buf;
    }
    if (data.labels) f << ',' << (*data.labels)[i];
    f << "\n";
  }
  if (!f) throw ConfigError("csv_write: write failed for '" + path + "'");
}

Dataset csv_read(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("csv_read: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw ConfigError("csv_read: empty file");
  // Header: x0,...,x{d-1}[,label]
  bool has_label = false;
  std::size_t d = 0;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col == "label") {
        has_label = true;
      } else if (col == "x" + std::to_string(d)) {
        ++d;
      } else {
        throw ConfigError("csv_read: unexpected header column '" + col + "'");
      }
    }
  }
  if (d == 0) throw ConfigError("csv_read: no data columns in header");

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    for (std::size_t dd = 0; dd < d; ++dd) {
      double v;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw ConfigError("csv_read: malformed value at line " +
                          std::to_string(lineno));
      }
      values.push_back(v);
      p = next;
      if (dd + 1 < d || has_label) {
        if (p >= end || *p != ',') {
          throw ConfigError("csv_read: missing column at line " +
                            std::to_string(lineno));
        }
        ++p;
      }
    }
    if (has_label) {
      int lab;
      auto [next, ec] = std::from_chars(p, end, lab);
      if (ec != std::errc()) {
        throw ConfigError("csv_read: malformed label at line " +
                          std::to_string(lineno));
      }
      labels.push_back(lab);
      p = next;
    }
    if (p != end) {
      throw ConfigError("csv_read: trailing characters at line " +
                        std::to_string(lineno));
    }
  }
  Dataset out;
  const std::size_t n = values.size() / d;
  out.rows = Tensor({n, d}, std::move(values));
  if (has_label) out.labels = std::move(labels);
  out.source = path;
  return out;
}

}  // namespace pscp
