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
#include <span>
#include <vector>

#include "lpqc/qcore.hpp"
#include "lpqc/rng.hpp"

namespace lpqc::impe {

struct ImpeConfig {
    int n_data = 7;
    int n_aux = 3;
    int layers = 1;
    int cycles = 1;
    int batch = 0; // 0: whole ensemble per step
    int epochs_per_cycle = 100;
    double lr = 0.01;

    [[nodiscard]] int num_qubits() const { return n_data + n_aux; }
    /// 2 (n_d + n_a) L angles per cycle.
    [[nodiscard]] std::size_t num_params() const {
        return 2 * static_cast<std::size_t>(num_qubits()) *
               static_cast<std::size_t>(layers);
    }
    void validate() const;
};

/**
 * L layers; each applies exp(-i zeta_x X/2) exp(-i zeta_y Y/2) to every qubit
 * (Y first) and then the CZ chain (0,1), (1,2), ... Within layer l, qubit j
 * uses angle 2(N l + j) for Y and that plus one for X.
 */
qcore::Circuit impe_circuit_def(int num_qubits, int layers);

qcore::StateVector impe_circuit(std::span<const double> zeta,
                                const qcore::StateVector &state, int layers);

struct MeasureResult {
    CVector data;           // renormalised data-register state
    std::uint64_t outcome;  // auxiliary bit string, qubit order as in the index
    double probability;
};

/// Born probabilities of every auxiliary outcome (trailing n_aux qubits).
RVector outcome_probabilities(const qcore::StateVector &state, int n_aux);

/// Unnormalised data branch (I x <z|)|psi>.
CVector outcome_branch(const qcore::StateVector &state, int n_aux,
                       std::uint64_t outcome);

/// Samples an outcome with Born probabilities and renormalises the branch.
MeasureResult impe_measure_update(const qcore::StateVector &state, int n_aux,
                                  Rng &rng);
MeasureResult impe_measure_update(const qcore::StateVector &state, int n_aux,
                                  std::uint64_t seed);

/// Haar-random single-qubit product states on n qubits.
std::vector<CVector> haar_product_states(int n, int count, Rng &rng);

/// One cycle: append |0..0> on the auxiliaries, run the circuit, measure.
std::vector<CVector> impe_step(const ImpeConfig &cfg,
                               std::span<const double> zeta,
                               const std::vector<CVector> &inputs, Rng &rng);

/// D_Wass between pure ensembles (cost 1 - |<a|b>|^2).
double pure_wasserstein(const std::vector<CVector> &X,
                        const std::vector<CVector> &Y);

/// Loss and d loss / d zeta for one cycle with the outcome of each input
/// drawn from `rng` and then held fixed.
struct CycleEval {
    double loss = 0.0;
    std::vector<double> gradient;
    std::vector<CVector> outputs;
};

CycleEval impe_cycle_loss(const ImpeConfig &cfg, std::span<const double> zeta,
                          const std::vector<CVector> &inputs,
                          const std::vector<CVector> &targets, Rng &rng,
                          bool with_gradient);

struct CycleLog {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> epoch_losses;
};

struct ImpeResult {
    std::vector<std::vector<double>> zetas;
    std::vector<CycleLog> history;
    std::vector<CVector> final_ensemble;
};

/**
 * Cycle-wise training. The initial ensemble holds Haar product states, one
 * per target. Cycle t starts from zeta = 0 and runs Adam for
 * epochs_per_cycle epochs with outcomes redrawn each epoch from a stream
 * keyed by (seed, cycle, epoch). After every epoch the loss is evaluated
 * on a per-cycle fixed outcome stream and the best parameters are kept, so
 * a cycle never ends above its starting loss.
 */
ImpeResult impe_train(const ImpeConfig &cfg, const std::vector<CVector> &targets,
                      std::uint64_t seed);

} // namespace lpqc::impe
