// Copyright 2026 The LPQC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpqc/rng.hpp"

namespace lpqc::priors {

enum class PriorFamily { Gaussian, Uniform };

std::string to_string(PriorFamily f);
PriorFamily prior_family_from_string(const std::string &s);

/**
 * Latent prior r(z) = sum_i c_i p_i(z).
 *
 * With a single mode the components are N(0, I_d) and U[-1/e, 1/e]^d. With
 * M > 1 modes, component i is N(mu_i, e^-2 I_d) or the hypercube
 * [mu_i - e^-2, mu_i + e^-2]. Priors are frozen after construction.
 */
struct LatentPriorSpec {
    PriorFamily family = PriorFamily::Gaussian;
    int dim = 1;
    std::vector<double> weights;          // length M, sums to one
    std::vector<Eigen::VectorXd> centers; // length M, each of length dim

    [[nodiscard]] int modes() const { return static_cast<int>(weights.size()); }
    /// Throws ConfigError on invalid weights or shapes.
    void validate() const;
};

/// Uniform weights; centers from init_mode_centers when modes > 1, zero
/// otherwise.
LatentPriorSpec make_prior(PriorFamily family, int dim, int modes,
                           std::uint64_t center_seed);

/// M i.i.d. N(0, I_d) vectors.
std::vector<Eigen::VectorXd> init_mode_centers(int dim, int modes,
                                               std::uint64_t seed);

/// Draw `count` samples as the columns of a dim x count matrix.
Eigen::MatrixXd sample_prior(const LatentPriorSpec &spec, Rng &rng, int count);
Eigen::MatrixXd sample_prior(const LatentPriorSpec &spec, std::uint64_t seed,
                             int count);

/// log r(z); -infinity outside the support of a uniform prior.
double log_density(const LatentPriorSpec &spec, const Eigen::VectorXd &z);

/// Component scale parameters.
double single_mode_uniform_half_width(); // 1/e
double mixture_half_width();             // e^-2 (uniform mixtures)
double mixture_stddev();                 // e^-1 (Gaussian mixtures)

} // namespace lpqc::priors
