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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpqc/netgen.hpp"
#include "lpqc/otloss.hpp"
#include "lpqc/qcore.hpp"

namespace lpqc::grad {

using qcore::Circuit;
using qcore::DensityMatrix;
using qcore::QubitLayout;
using qcore::StateVector;

/// d kappa(rho, sigma) / d rho = sigma - rho sqrt(b / a) with
/// a = max(1 - tr rho^2, 1e-12) and b = qcore::mixedness(tr sigma^2).
CMatrix kernel_gradient(const DensityMatrix &rho, const DensityMatrix &sigma,
                        double purity_rho, double purity_sigma);
CMatrix kernel_gradient(const DensityMatrix &rho, const DensityMatrix &sigma);

/// Loss value, plan and dD/d rho_i for every generated state, with the
/// optimal plan held fixed.
struct EnsembleCotangents {
    double loss = 0.0;
    ot::OtResult ot;
    std::vector<CMatrix> cotangents;
};

EnsembleCotangents wasserstein_cotangents(const std::vector<DensityMatrix> &X,
                                          const std::vector<DensityMatrix> &Y);

/**
 * Reverse sweep for a loss with dL = 2 Re <lambda | d psi_final>. Gates are
 * uncomputed with their inverses, so only the final state is needed.
 * Returns dL/dparams (length circuit.num_params).
 */
RVector adjoint_from_final(const Circuit &circuit, std::span<const double> params,
                           CVector psi_final, CVector lambda);

/// lambda = G Psi, with Psi the row-major (data x ancilla) reshape of psi.
CVector density_cotangent_to_state(const CVector &psi, int m_anc,
                                   const CMatrix &G);

/// dL/dangles for L(rho) with rho = Tr_A U(angles)|0><0|U^dagger and
/// Hermitian cotangent G = dL/drho.
RVector circuit_grad_adjoint(const QubitLayout &layout,
                             std::span<const double> angles, const CMatrix &G);

/// Parameter-shift oracle: (L(theta_k + pi/2) - L(theta_k - pi/2)) / 2.
RVector circuit_grad_paramshift(
    std::span<const double> angles,
    const std::function<double(std::span<const double>)> &loss);

/// Central finite differences of a scalar function of a flat vector.
std::vector<double>
finite_difference(const std::vector<double> &x,
                  const std::function<double(const std::vector<double> &)> &f,
                  double step);

/// Reduced data states for a batch of angle columns.
struct CircuitBatch {
    std::vector<StateVector> psi;
    std::vector<DensityMatrix> rho;
};

CircuitBatch circuit_batch(const QubitLayout &layout, const RMatrix &theta);

/// dL/dtheta (K x B) given per-sample density cotangents.
RMatrix circuit_batch_backward(const QubitLayout &layout, const RMatrix &theta,
                               const CircuitBatch &batch,
                               const std::vector<CMatrix> &cotangents);

/// Forward pass of the mixture-of-experts generator over latent columns Z.
struct LpqcForward {
    RMatrix Z;
    std::vector<RMatrix> expert_out; // each K x B
    std::vector<netgen::MlpTape> expert_tapes;
    netgen::MlpTape gate_tape;
    RMatrix pi;    // E x B
    RMatrix theta; // K x B
    CircuitBatch states;
};

LpqcForward lpqc_forward(const netgen::GeneratorWeights &gen, const RMatrix &Z);

/// Back-propagates dL/dtheta (K x B) through mixing, gate softmax, the
/// entropy term (weight lambda, batch mean) and all networks. The result
/// has the generator's shapes and holds gradients.
netgen::GeneratorWeights moe_backward(const netgen::GeneratorWeights &gen,
                                      const LpqcForward &fwd,
                                      const RMatrix &dtheta, double lambda);

struct FullResult {
    double loss = 0.0;
    double wasserstein = 0.0;
    double entropy = 0.0;
    std::vector<double> gradient; // GeneratorWeights::flatten order
};

/// Training objective D_Wass + lambda * entropy on one batch of latents.
double full_loss(const netgen::GeneratorWeights &gen, const RMatrix &Z,
                 const std::vector<DensityMatrix> &Y, double lambda);

FullResult backward_full(const netgen::GeneratorWeights &gen, const RMatrix &Z,
                         const std::vector<DensityMatrix> &Y, double lambda);

/// Bias-corrected Adam on a flat parameter vector.
class Adam {
  public:
    struct Options {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    Adam(std::size_t size, Options opts);

    void step(std::vector<double> &weights, const std::vector<double> &grads);

    [[nodiscard]] std::uint64_t steps() const { return t_; }
    [[nodiscard]] const Options &options() const { return opts_; }

  private:
    Options opts_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::uint64_t t_ = 0;
};

enum class BenchFamily { NoLatentUniform, Rd, LpqcGaussLinear, LpqcGaussTanh };

std::string to_string(BenchFamily f);
BenchFamily bench_family_from_string(const std::string &s);

struct GradNormConfig {
    BenchFamily family = BenchFamily::NoLatentUniform;
    QubitLayout layout;
    int trials = 128;
    int batch = 128;
    std::uint64_t seed = 0;
    int latent_dim = 4;
    int hidden_dim = 32;
    int hidden_layers = 2;
    int rd_modes = 4;
};

struct GradNormResult {
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> values;
};

/**
 * Per trial: draw a batch of angle vectors for the family, evaluate the
 * loss D_Wass(generated, reference) and record ||dL/dtheta||^2 / (K B),
 * the squared gradient norm over the whole batch normalised by the number
 * of angles.
 */
GradNormResult grad_norm_benchmark(const GradNormConfig &cfg,
                                   const std::vector<DensityMatrix> &reference);

} // namespace lpqc::grad
