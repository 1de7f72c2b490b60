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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpqc/qcore.hpp"

namespace lpqc::data {

using qcore::DensityMatrix;
using qcore::StateVector;

/// |0..0>, |1..1>, GHZ+ and GHZ- on `num_qubits` qubits, in that order.
std::vector<StateVector> cluster_centers(int num_qubits);

/**
 * Four clusters of reduced states. State k belongs to center k % 4: the
 * center on n + m qubits is perturbed by one rotation layer with angles
 * ~ N(0, scale^2) and the m trailing qubits are traced out.
 * `count` must be divisible by 4.
 */
std::vector<DensityMatrix> gen_multicluster(int n_data, int m_anc, int count,
                                            std::uint64_t seed,
                                            double scale = 0.05);

/// Cluster index of the k-th state produced by gen_multicluster.
inline int multicluster_label(std::size_t k) { return static_cast<int>(k % 4); }

struct PcaResult {
    RMatrix points;      // N x k projections
    RMatrix components;  // dim x k principal axes
    RVector eigenvalues; // all covariance eigenvalues, descending
    bool rank_deficient = false;
};

/**
 * Projects mean-centred rows onto the top-k covariance eigenvectors. Each
 * axis is signed so that its first nonzero coordinate is positive. Axes
 * beyond the data rank project to zero and set `rank_deficient`.
 */
PcaResult pca_project(const std::vector<RVector> &vectors, int k);

/// In-memory ensemble file: pure amplitude vectors or density matrices.
struct Ensemble {
    int n_data = 1;
    bool mixed = false;
    std::vector<CVector> pure;
    std::vector<DensityMatrix> states_mixed;

    [[nodiscard]] std::size_t size() const {
        return mixed ? states_mixed.size() : pure.size();
    }
    /// Density matrices of all members (projectors for pure members).
    [[nodiscard]] std::vector<DensityMatrix> density_matrices() const;
};

Ensemble make_mixed_ensemble(std::vector<DensityMatrix> states);
Ensemble make_pure_ensemble(std::vector<CVector> states);

/**
 * Binary layout: "LPQE", u16 version (1), u16 flags (bit 0 = mixed),
 * u32 n_data, u64 count, then count records of little-endian f64 (re, im)
 * pairs: 2^n amplitudes per pure state, or 4^n row-major entries per
 * density matrix.
 */
void write_ensemble(std::ostream &out, const Ensemble &ens);
/// Validates every state; throws DataError naming the byte offset.
Ensemble read_ensemble(std::istream &in);

void save_ensemble(const std::string &path, const Ensemble &ens);
Ensemble load_ensemble(const std::string &path);

} // namespace lpqc::data
