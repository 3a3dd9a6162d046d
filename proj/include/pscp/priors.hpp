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

#ifndef PSCP_PRIORS_HPP
#define PSCP_PRIORS_HPP

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "pscp/graph.hpp"
#include "pscp/rng.hpp"

namespace pscp {

// Frozen latent-space distributions. A prior is a uniformly weighted
// mixture of K homogeneous components; K=1 with a zero-mean unit-variance
// Gaussian component is the standard (unimodal) prior. Component
// parameters are never trainable.

struct GaussianComponent {
  std::vector<double> mu;
  std::vector<double> var;  // diagonal, elementwise > 0
};

// Density per dim: beta/(2 alpha Gamma(1/beta)) exp(-(|z-mu|/alpha)^beta).
// alpha and beta are shared across dims; the joint density factorizes.
struct GenGaussianComponent {
  std::vector<double> mu;
  double alpha;
  double beta;
};

using PriorComponent = std::variant<GaussianComponent, GenGaussianComponent>;

class MixturePrior {
 public:
  static MixturePrior standard_gaussian(std::size_t dim);
  static MixturePrior gaussian(std::vector<std::vector<double>> means,
                               double var = 1.0);
  static MixturePrior gen_gaussian(std::vector<std::vector<double>> means,
                                   double beta, double alpha);
  // alpha chosen so each component has unit variance per dim.
  static MixturePrior gen_gaussian_unit_var(
      std::vector<std::vector<double>> means, double beta);

  std::size_t dim() const { return dim_; }
  std::size_t num_components() const { return components_.size(); }
  const PriorComponent& component(std::size_t i) const {
    return components_[i];
  }
  const std::vector<double>& component_mean(std::size_t i) const;

  // Shared per-dim variance of the components (sigma^2_psi in the
  // second-order report). For generalized Gaussians this is the
  // analytic variance alpha^2 Gamma(3/beta)/Gamma(1/beta).
  double component_variance() const;

  bool is_gaussian() const;

 private:
  MixturePrior(std::vector<PriorComponent> components, std::size_t dim)
      : components_(std::move(components)), dim_(dim) {}

  std::vector<PriorComponent> components_;
  std::size_t dim_;
};

// Per-row mixture component index, fixed before training.
struct ComponentAssignment {
  std::vector<int> index;

  void validate(std::size_t n_rows, std::size_t k) const;
};

// Lanczos log-Gamma (g=7, 9 coefficients), |rel err| < 1e-13 for the
// arguments used here.
double log_gamma(double x);

// sqrt(Gamma(1/beta)/Gamma(3/beta)): the alpha giving a unit-variance
// generalized Gaussian.
double unit_variance_alpha(double beta);

double gaussian_log_pdf(const GaussianComponent& c, std::span<const double> z);
double gen_gaussian_log_pdf(const GenGaussianComponent& c,
                            std::span<const double> z);

// log p_i(z). No -ln K term: the constant does not affect training
// gradients, and reported test likelihoods always go through
// mixture_log_pdf which includes it.
double component_log_pdf(const MixturePrior& prior, std::span<const double> z,
                         std::size_t i);

// log( (1/K) sum_i p_i(z) ), stable log-sum-exp.
double mixture_log_pdf(const MixturePrior& prior, std::span<const double> z);

// n draws; component chosen uniformly, labels reported per row.
// Gaussian dims via Box-Muller, generalized Gaussian dims via the gamma
// transform W^(1/beta) * sign with W ~ Gamma(1/beta, alpha^beta).
struct PriorSample {
  Tensor z;  // [n, dim]
  std::vector<int> labels;
};
PriorSample prior_sample(const MixturePrior& prior, std::size_t n, Rng& rng);

// Draw n points from one fixed component.
Tensor component_sample(const MixturePrior& prior, std::size_t i,
                        std::size_t n, Rng& rng);

// Graph-side training objective term: per-row log p_{a(row)}(z[row]) for
// a batch z [n,dim] with per-row component assignment. Returns a [n]
// node. Component parameters enter as constants.
Graph::Id assigned_log_pdf_node(Graph& g, Graph::Id z,
                                const MixturePrior& prior,
                                std::span<const int> assign);

}  // namespace pscp

#endif  // PSCP_PRIORS_HPP
