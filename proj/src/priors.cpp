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

#include "lpqc/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "lpqc/error.hpp"

namespace lpqc::priors {

double single_mode_uniform_half_width() { return std::exp(-1.0); }
double mixture_half_width() { return std::exp(-2.0); }
double mixture_stddev() { return std::exp(-1.0); }

std::string to_string(PriorFamily f) {
    return f == PriorFamily::Gaussian ? "gaussian" : "uniform";
}

PriorFamily prior_family_from_string(const std::string &s) {
    if (s == "gaussian") {
        return PriorFamily::Gaussian;
    }
    if (s == "uniform") {
        return PriorFamily::Uniform;
    }
    throw ConfigError("unknown prior family '" + s + "'");
}

void LatentPriorSpec::validate() const {
    LPQC_REQUIRE(dim >= 1, ConfigError, "prior: latent dimension must be >= 1");
    LPQC_REQUIRE(!weights.empty(), ConfigError, "prior: at least one mode");
    LPQC_REQUIRE(centers.size() == weights.size(), ConfigError,
                 "prior: one center per mode");
    double total = 0.0;
    for (double w : weights) {
        LPQC_REQUIRE(w >= 0.0 && std::isfinite(w), ConfigError,
                     "prior: mixing weights must be nonnegative");
        total += w;
    }
    LPQC_REQUIRE(std::abs(total - 1.0) <= 1e-9, ConfigError,
                 "prior: mixing weights must sum to one");
    for (const auto &c : centers) {
        LPQC_REQUIRE(c.size() == dim, ConfigError,
                     "prior: center length must equal latent dimension");
    }
}

std::vector<Eigen::VectorXd> init_mode_centers(int dim, int modes,
                                               std::uint64_t seed) {
    Rng rng(seed, 0x4d4f444553ULL);
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(modes));
    for (int i = 0; i < modes; ++i) {
        Eigen::VectorXd c(dim);
        for (int k = 0; k < dim; ++k) {
            c(k) = rng.normal();
        }
        out.push_back(std::move(c));
    }
    return out;
}

LatentPriorSpec make_prior(PriorFamily family, int dim, int modes,
                           std::uint64_t center_seed) {
    LPQC_REQUIRE(modes >= 1, ConfigError, "prior: modes must be >= 1");
    LPQC_REQUIRE(dim >= 1, ConfigError, "prior: latent dimension must be >= 1");
    LatentPriorSpec spec;
    spec.family = family;
    spec.dim = dim;
    spec.weights.assign(static_cast<std::size_t>(modes), 1.0 / modes);
    if (modes == 1) {
        spec.centers.assign(1, Eigen::VectorXd::Zero(dim));
    } else {
        spec.centers = init_mode_centers(dim, modes, center_seed);
    }
    return spec;
}

namespace {

std::size_t draw_mode(const std::vector<double> &weights, Rng &rng) {
    if (weights.size() == 1) {
        return 0;
    }
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) {
            return i;
        }
    }
    return weights.size() - 1;
}

} // namespace

Eigen::MatrixXd sample_prior(const LatentPriorSpec &spec, Rng &rng, int count) {
    spec.validate();
    LPQC_REQUIRE(count >= 0, ConfigError, "prior: negative sample count");
    const bool single = spec.modes() == 1;
    Eigen::MatrixXd out(spec.dim, count);
    for (int s = 0; s < count; ++s) {
        const std::size_t mode = draw_mode(spec.weights, rng);
        const Eigen::VectorXd &mu = spec.centers[mode];
        for (int k = 0; k < spec.dim; ++k) {
            double v = 0.0;
            if (spec.family == PriorFamily::Gaussian) {
                v = single ? rng.normal() : mu(k) + mixture_stddev() * rng.normal();
            } else {
                const double h =
                    single ? single_mode_uniform_half_width() : mixture_half_width();
                v = mu(k) + rng.uniform(-h, h);
            }
            out(k, s) = v;
        }
    }
    return out;
}

Eigen::MatrixXd sample_prior(const LatentPriorSpec &spec, std::uint64_t seed,
                             int count) {
    Rng rng(seed);
    return sample_prior(spec, rng, count);
}

double log_density(const LatentPriorSpec &spec, const Eigen::VectorXd &z) {
    spec.validate();
    LPQC_REQUIRE(z.size() == spec.dim, ConfigError,
                 "log_density: latent has the wrong dimension");
    const bool single = spec.modes() == 1;
    const double d = spec.dim;
    double total = 0.0;
    for (std::size_t i = 0; i < spec.weights.size(); ++i) {
        const Eigen::VectorXd &mu = spec.centers[i];
        double p = 0.0;
        if (spec.family == PriorFamily::Gaussian) {
            const double s = single ? 1.0 : mixture_stddev();
            const double r2 = (z - mu).squaredNorm() / (s * s);
            p = std::exp(-0.5 * r2 - d * std::log(s) -
                         0.5 * d * std::log(2.0 * std::numbers::pi));
        } else {
            const double h =
                single ? single_mode_uniform_half_width() : mixture_half_width();
            if ((z - mu).cwiseAbs().maxCoeff() <= h) {
                p = std::pow(2.0 * h, -d);
            }
        }
        total += spec.weights[i] * p;
    }
    return total > 0.0 ? std::log(total)
                       : -std::numeric_limits<double>::infinity();
}

} // namespace lpqc::priors
