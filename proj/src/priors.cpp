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

#include "pscp/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pscp/errors.hpp"

namespace pscp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

void check_component(const PriorComponent& c, std::size_t dim) {
  if (const auto* gc = std::get_if<GaussianComponent>(&c)) {
    if (gc->mu.size() != dim || gc->var.size() != dim) {
      throw ShapeError("MixturePrior: component dim mismatch");
    }
    for (double v : gc->var) {
      if (!(v > 0.0)) throw ShapeError("MixturePrior: variance must be > 0");
    }
  } else {
    const auto& gg = std::get<GenGaussianComponent>(c);
    if (gg.mu.size() != dim) {
      throw ShapeError("MixturePrior: component dim mismatch");
    }
    if (!(gg.alpha > 0.0) || !(gg.beta > 0.0) || !std::isfinite(gg.alpha) ||
        !std::isfinite(gg.beta)) {
      throw ShapeError("MixturePrior: alpha and beta must be finite positive");
    }
  }
}

}  // namespace

double log_gamma(double x) {
  // Lanczos approximation, g=7, 9 coefficients.
  static const double kCoef[9] = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(M_PI / std::fabs(std::sin(M_PI * x))) - log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = kCoef[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += kCoef[i] / (x + i);
  return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t +
         std::log(a);
}

double unit_variance_alpha(double beta) {
  if (!(beta > 0.0)) throw ShapeError("unit_variance_alpha: beta must be > 0");
  return std::exp(0.5 * (log_gamma(1.0 / beta) - log_gamma(3.0 / beta)));
}

MixturePrior MixturePrior::standard_gaussian(std::size_t dim) {
  GaussianComponent c;
  c.mu.assign(dim, 0.0);
  c.var.assign(dim, 1.0);
  return MixturePrior({PriorComponent{std::move(c)}}, dim);
}

MixturePrior MixturePrior::gaussian(std::vector<std::vector<double>> means,
                                    double var) {
  if (means.empty()) throw ShapeError("MixturePrior: K must be >= 1");
  const std::size_t dim = means[0].size();
  std::vector<PriorComponent> comps;
  for (auto& m : means) {
    GaussianComponent c;
    c.mu = std::move(m);
    c.var.assign(dim, var);
    check_component(c, dim);
    comps.push_back(std::move(c));
  }
  return MixturePrior(std::move(comps), dim);
}

MixturePrior MixturePrior::gen_gaussian(std::vector<std::vector<double>> means,
                                        double beta, double alpha) {
  if (means.empty()) throw ShapeError("MixturePrior: K must be >= 1");
  const std::size_t dim = means[0].size();
  std::vector<PriorComponent> comps;
  for (auto& m : means) {
    GenGaussianComponent c{std::move(m), alpha, beta};
    check_component(c, dim);
    comps.push_back(std::move(c));
  }
  return MixturePrior(std::move(comps), dim);
}

MixturePrior MixturePrior::gen_gaussian_unit_var(
    std::vector<std::vector<double>> means, double beta) {
  return gen_gaussian(std::move(means), beta, unit_variance_alpha(beta));
}

const std::vector<double>& MixturePrior::component_mean(std::size_t i) const {
  return std::visit([](const auto& c) -> const std::vector<double>& {
    return c.mu;
  }, components_[i]);
}

double MixturePrior::component_variance() const {
  if (const auto* gc = std::get_if<GaussianComponent>(&components_[0])) {
    return gc->var[0];
  }
  const auto& gg = std::get<GenGaussianComponent>(components_[0]);
  return gg.alpha * gg.alpha *
         std::exp(log_gamma(3.0 / gg.beta) - log_gamma(1.0 / gg.beta));
}

bool MixturePrior::is_gaussian() const {
  return std::holds_alternative<GaussianComponent>(components_[0]);
}

void ComponentAssignment::validate(std::size_t n_rows, std::size_t k) const {
  if (index.size() != n_rows) {
    throw ShapeError("ComponentAssignment: size does not match dataset");
  }
  for (int i : index) {
    if (i < 0 || static_cast<std::size_t>(i) >= k) {
      throw ShapeError("ComponentAssignment: index out of range");
    }
  }
}

double gaussian_log_pdf(const GaussianComponent& c, std::span<const double> z) {
  if (z.size() != c.mu.size()) {
    throw ShapeError("gaussian_log_pdf: dim mismatch");
  }
  double lp = 0.0;
  for (std::size_t d = 0; d < z.size(); ++d) {
    const double diff = z[d] - c.mu[d];
    lp += -0.5 * (kLog2Pi + std::log(c.var[d])) -
          diff * diff / (2.0 * c.var[d]);
  }
  return lp;
}

double gen_gaussian_log_pdf(const GenGaussianComponent& c,
                            std::span<const double> z) {
  if (z.size() != c.mu.size()) {
    throw ShapeError("gen_gaussian_log_pdf: dim mismatch");
  }
  const double norm = std::log(c.beta) - std::log(2.0 * c.alpha) -
                      log_gamma(1.0 / c.beta);
  double lp = 0.0;
  for (std::size_t d = 0; d < z.size(); ++d) {
    lp += norm - std::pow(std::fabs(z[d] - c.mu[d]) / c.alpha, c.beta);
  }
  return lp;
}

double component_log_pdf(const MixturePrior& prior, std::span<const double> z,
                         std::size_t i) {
  if (i >= prior.num_components()) {
    throw ShapeError("component_log_pdf: component index out of range");
  }
  const PriorComponent& comp = prior.component(i);
  if (const auto* gc = std::get_if<GaussianComponent>(&comp)) {
    return gaussian_log_pdf(*gc, z);
  }
  return gen_gaussian_log_pdf(std::get<GenGaussianComponent>(comp), z);
}

double mixture_log_pdf(const MixturePrior& prior, std::span<const double> z) {
  const std::size_t k = prior.num_components();
  double maxlp = -std::numeric_limits<double>::infinity();
  std::vector<double> lps(k);
  for (std::size_t i = 0; i < k; ++i) {
    lps[i] = component_log_pdf(prior, z, i);
    maxlp = std::max(maxlp, lps[i]);
  }
  if (!std::isfinite(maxlp)) return maxlp;
  double acc = 0.0;
  for (double lp : lps) acc += std::exp(lp - maxlp);
  return maxlp + std::log(acc) - std::log(static_cast<double>(k));
}

namespace {

void sample_component_into(const PriorComponent& comp, double* row,
                           std::size_t dim, Rng& rng) {
  if (const auto* gc = std::get_if<GaussianComponent>(&comp)) {
    for (std::size_t d = 0; d < dim; ++d) {
      row[d] = gc->mu[d] + std::sqrt(gc->var[d]) * rng.normal();
    }
  } else {
    const auto& gg = std::get<GenGaussianComponent>(comp);
    for (std::size_t d = 0; d < dim; ++d) {
      const double w = rng.gamma(1.0 / gg.beta, 1.0);
      const double mag = gg.alpha * std::pow(w, 1.0 / gg.beta);
      row[d] = gg.mu[d] + (rng.uniform() < 0.5 ? -mag : mag);
    }
  }
}

}  // namespace

PriorSample prior_sample(const MixturePrior& prior, std::size_t n, Rng& rng) {
  const std::size_t dim = prior.dim();
  PriorSample out;
  out.z = Tensor({n, dim});
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c =
        static_cast<std::size_t>(rng.below(prior.num_components()));
    out.labels[i] = static_cast<int>(c);
    sample_component_into(prior.component(c), out.z.data() + i * dim, dim, rng);
  }
  return out;
}

Tensor component_sample(const MixturePrior& prior, std::size_t i,
                        std::size_t n, Rng& rng) {
  if (i >= prior.num_components()) {
    throw ShapeError("component_sample: component index out of range");
  }
  const std::size_t dim = prior.dim();
  Tensor z({n, dim});
  for (std::size_t r = 0; r < n; ++r) {
    sample_component_into(prior.component(i), z.data() + r * dim, dim, rng);
  }
  return z;
}

Graph::Id assigned_log_pdf_node(Graph& g, Graph::Id z,
                                const MixturePrior& prior,
                                std::span<const int> assign) {
  const Tensor& zv = g.value(z);
  if (zv.rank() != 2 || zv.cols() != prior.dim()) {
    throw ShapeError("assigned_log_pdf_node: z shape mismatch");
  }
  const std::size_t n = zv.rows(), dim = zv.cols();
  if (assign.size() != n) {
    throw ShapeError("assigned_log_pdf_node: assignment size mismatch");
  }
  for (int a : assign) {
    if (a < 0 || static_cast<std::size_t>(a) >= prior.num_components()) {
      throw ShapeError("assigned_log_pdf_node: assignment index out of range");
    }
  }

  // Gather per-row component parameters into constant tensors.
  Tensor mu({n, dim});
  Tensor row_const({n});  // per-row additive normalization constant
  if (prior.is_gaussian()) {
    Tensor weight({n, dim});  // -1/(2 var_d)
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = std::get<GaussianComponent>(
          prior.component(static_cast<std::size_t>(assign[i])));
      double cst = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        mu.at(i, d) = c.mu[d];
        weight.at(i, d) = -0.5 / c.var[d];
        cst += -0.5 * (kLog2Pi + std::log(c.var[d]));
      }
      row_const[i] = cst;
    }
    Graph::Id diff = g.sub(z, g.input(std::move(mu)));
    Graph::Id quad = g.mul(g.square(diff), g.input(std::move(weight)));
    return g.add(g.reduce_sum(quad, 1), g.input(std::move(row_const)));
  }

  Tensor inv_alpha({n, dim});
  double beta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = std::get<GenGaussianComponent>(
        prior.component(static_cast<std::size_t>(assign[i])));
    beta = c.beta;
    const double norm = std::log(c.beta) - std::log(2.0 * c.alpha) -
                        log_gamma(1.0 / c.beta);
    for (std::size_t d = 0; d < dim; ++d) {
      mu.at(i, d) = c.mu[d];
      inv_alpha.at(i, d) = 1.0 / c.alpha;
    }
    row_const[i] = static_cast<double>(dim) * norm;
  }
  Graph::Id scaled =
      g.mul(g.abs(g.sub(z, g.input(std::move(mu)))), g.input(std::move(inv_alpha)));
  Graph::Id pw = g.pow_const(scaled, beta);
  return g.add(g.neg(g.reduce_sum(pw, 1)), g.input(std::move(row_const)));
}

}  // namespace pscp
