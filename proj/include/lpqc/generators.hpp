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
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "lpqc/netgen.hpp"
#include "lpqc/priors.hpp"
#include "lpqc/qcore.hpp"
#include "lpqc/rng.hpp"

namespace lpqc::generators {

using qcore::DensityMatrix;

enum class Family { Lpqc, NoLatent, Rd, Lmlp };

std::string to_string(Family f);
Family family_from_string(const std::string &s);

struct GeneratorConfig {
    Family family = Family::Lpqc;
    qcore::QubitLayout layout;
    /// Expert / LMLP network; d_out is derived from the layout.
    netgen::MlpSpec mlp{4, 32, 2, 1, netgen::Activation::Tanh};
    int experts = 1;
    priors::PriorFamily prior = priors::PriorFamily::Gaussian;
    int prior_modes = 1;
    int rd_modes = 4;

    void validate() const;
};

struct StepResult {
    double loss = 0.0;
    double wasserstein = 0.0;
    std::vector<double> gradient;
};

/// A trainable ensemble generator with flat weights.
class Generator {
  public:
    virtual ~Generator() = default;

    [[nodiscard]] virtual std::vector<double> weights() const = 0;
    virtual void set_weights(const std::vector<double> &w) = 0;

    /// Draws `batch` samples from `rng`, evaluates D_Wass against `targets`
    /// plus lambda times the gate entropy, and returns the weight gradient.
    virtual StepResult loss_and_grad(int batch, Rng &rng,
                                     const std::vector<DensityMatrix> &targets,
                                     double lambda) = 0;

    /// Generated density matrices on the data register.
    [[nodiscard]] virtual std::vector<DensityMatrix> generate(int count,
                                                              Rng &rng) const = 0;

    virtual void save(std::ostream &out) const = 0;
};

/// `init_seed` drives weight initialisation and prior mode centers.
std::unique_ptr<Generator> make_generator(const GeneratorConfig &cfg,
                                          std::uint64_t init_seed);

/// Access to the mixture-of-experts weights of an Lpqc generator.
const netgen::GeneratorWeights *lpqc_weights(const Generator &g);

} // namespace lpqc::generators
