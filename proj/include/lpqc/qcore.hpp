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

/**
 * @file
 * Dense statevector simulation of the hardware-efficient ansatz, partial
 * trace onto the data register, and state-space metrics.
 *
 * Qubit 0 is the most significant bit of an amplitude index. Ancillas occupy
 * the trailing (least significant) positions, so tracing them out is a sum
 * over contiguous blocks of 2^m amplitudes.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lpqc {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

namespace qcore {

/// Register sizes and depth of the hardware-efficient ansatz.
struct QubitLayout {
    int n_data = 1;
    int m_anc = 0;
    int layers = 0;

    [[nodiscard]] int num_qubits() const { return n_data + m_anc; }
    /// 2(n+m)(L+1): layer 0 plus L entangling layers, two angles per qubit.
    [[nodiscard]] std::size_t num_params() const {
        return 2 * static_cast<std::size_t>(num_qubits()) *
               static_cast<std::size_t>(layers + 1);
    }
    [[nodiscard]] std::size_t dim() const { return std::size_t{1} << num_qubits(); }
    [[nodiscard]] std::size_t data_dim() const { return std::size_t{1} << n_data; }
    /// Throws ConfigError if the invariants are violated.
    void validate() const;

    bool operator==(const QubitLayout &) const = default;
};

/// Unit-norm amplitude vector over `num_qubits` qubits.
class StateVector {
  public:
    StateVector() = default;
    /// Wraps amplitudes; throws ShapeError if the length is not 2^num_qubits.
    StateVector(CVector amplitudes, int num_qubits);

    /// |0...0>
    static StateVector zero(int num_qubits);
    /// Throws if the norm deviates from 1 by more than `tol`.
    static StateVector checked(CVector amplitudes, int num_qubits,
                               double tol = 1e-10);

    [[nodiscard]] const CVector &amplitudes() const { return amps_; }
    CVector &amplitudes() { return amps_; }
    [[nodiscard]] int num_qubits() const { return num_qubits_; }
    [[nodiscard]] std::size_t dim() const {
        return static_cast<std::size_t>(amps_.size());
    }
    [[nodiscard]] double norm() const { return amps_.norm(); }

  private:
    CVector amps_;
    int num_qubits_ = 0;
};

/// Hermitian, positive semidefinite, trace-one matrix on the data register.
class DensityMatrix {
  public:
    DensityMatrix() = default;
    /// Wraps `entries` without checking the physical invariants.
    explicit DensityMatrix(CMatrix entries);

    /// |psi><psi|
    static DensityMatrix projector(const CVector &psi);
    /// Wraps and validates; throws ShapeError / Error on violation.
    static DensityMatrix checked(CMatrix entries, double tol = 1e-10);

    [[nodiscard]] const CMatrix &entries() const { return rho_; }
    [[nodiscard]] std::size_t dim() const {
        return static_cast<std::size_t>(rho_.rows());
    }
    [[nodiscard]] int num_qubits() const { return num_qubits_; }

    /// Hermitian within `tol`, unit trace within `tol`, eigenvalues >= -1e-9.
    [[nodiscard]] bool satisfies_invariants(double tol = 1e-10) const;

  private:
    CMatrix rho_;
    int num_qubits_ = 0;
};

enum class GateKind { RX, RY, RZ, CNOT, CZ };

/// One gate of a circuit. Rotations are exp(-i theta P / 2) with P the Pauli
/// matching the kind and theta = params[param]; two-qubit gates have
/// param = -1.
struct Gate {
    GateKind kind;
    int q0;
    int q1 = -1;
    int param = -1;
};

[[nodiscard]] inline bool is_rotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

/// Ordered gate list; gates act in list order.
struct Circuit {
    int num_qubits = 0;
    std::size_t num_params = 0;
    std::vector<Gate> gates;
};

/**
 * Hardware-efficient ansatz U = U_L ... U_1 U_0.
 *
 * U_0 is a rotation layer; every later layer applies the CNOT chain
 * (0,1), (1,2), ..., (N-2,N-1) and then the rotation layer. Each qubit's
 * rotation is RY(a) RZ(b): RZ acts first. Parameter index of qubit p in
 * layer l is 2((N)l + p) for the Y angle and that plus one for the Z angle.
 */
Circuit hea_circuit(const QubitLayout &layout);

/// A single rotation-only layer (U_0) over `num_qubits` qubits.
Circuit rotation_layer(int num_qubits);

/// 2x2 matrix of a rotation gate.
Eigen::Matrix2cd rotation_matrix(GateKind kind, double angle);

/// Apply one gate in place. `inverse` applies the adjoint gate.
void apply_gate(CVector &state, int num_qubits, const Gate &gate,
                std::span<const double> params, bool inverse = false);

/// Multiply the Pauli generator of a rotation gate onto `state` in place.
void apply_generator(CVector &state, int num_qubits, const Gate &gate);

/// Apply all gates of `circuit`.
void apply_circuit(CVector &state, const Circuit &circuit,
                   std::span<const double> params);

/// U(angles)|input> for the hardware-efficient ansatz of `layout`.
StateVector hea_apply(const QubitLayout &layout, std::span<const double> angles,
                      const StateVector &input);

/// Tr_A |psi><psi| over the trailing `m_anc` qubits.
DensityMatrix partial_trace_ancilla(const StateVector &state, int m_anc);

/// tr(rho^2).
double purity(const DensityMatrix &rho);

/// 1 - purity, with anything below 1e-12 (roundoff on pure states) taken
/// as exactly 0.
double mixedness(double purity);

/// tr(rho sigma) + sqrt(max(0,1-tr rho^2) max(0,1-tr sigma^2)).
double super_fidelity(const DensityMatrix &rho, const DensityMatrix &sigma);
/// Same, with purities supplied by the caller (hot loop in cost matrices).
double super_fidelity(const DensityMatrix &rho, const DensityMatrix &sigma,
                      double purity_rho, double purity_sigma);

/// Half the sum of absolute eigenvalues of rho - sigma.
double trace_distance(const DensityMatrix &rho, const DensityMatrix &sigma);

/**
 * Real vectorisation of a Hermitian matrix: the N diagonal reals, then the
 * real parts of the strict upper triangle (row-major), then their imaginary
 * parts. Length N^2.
 */
RVector dm_to_real_vector(const DensityMatrix &rho);
/// Inverse of dm_to_real_vector (no invariant checks).
DensityMatrix real_vector_to_dm(const RVector &v);

} // namespace qcore
} // namespace lpqc
