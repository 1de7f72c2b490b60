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

#include "lpqc/qcore.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "lpqc/error.hpp"

namespace lpqc::qcore {

namespace {

int qubits_for_dim(std::size_t dim) {
    int n = 0;
    while ((std::size_t{1} << n) < dim) {
        ++n;
    }
    if ((std::size_t{1} << n) != dim) {
        throw ShapeError("dimension " + std::to_string(dim) +
                         " is not a power of two");
    }
    return n;
}

std::size_t bit_of(int num_qubits, int q) {
    return std::size_t{1} << (num_qubits - 1 - q);
}

} // namespace

void QubitLayout::validate() const {
    LPQC_REQUIRE(n_data >= 1, ConfigError, "layout: n_data must be >= 1");
    LPQC_REQUIRE(m_anc >= 0, ConfigError, "layout: m_anc must be >= 0");
    LPQC_REQUIRE(layers >= 0, ConfigError, "layout: L must be >= 0");
    LPQC_REQUIRE(num_qubits() <= 24, ConfigError,
                 "layout: more than 24 qubits is not supported");
}

StateVector::StateVector(CVector amplitudes, int num_qubits)
    : amps_(std::move(amplitudes)), num_qubits_(num_qubits) {
    LPQC_REQUIRE(num_qubits >= 0 && static_cast<std::size_t>(amps_.size()) ==
                                        (std::size_t{1} << num_qubits),
                 ShapeError, "state vector length must be 2^num_qubits");
}

StateVector StateVector::zero(int num_qubits) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << num_qubits));
    v(0) = 1.0;
    return {std::move(v), num_qubits};
}

StateVector StateVector::checked(CVector amplitudes, int num_qubits,
                                 double tol) {
    StateVector s(std::move(amplitudes), num_qubits);
    if (std::abs(s.norm() - 1.0) > tol) {
        throw Error("state vector is not unit norm (norm = " +
                    std::to_string(s.norm()) + ")");
    }
    return s;
}

DensityMatrix::DensityMatrix(CMatrix entries) : rho_(std::move(entries)) {
    LPQC_REQUIRE(rho_.rows() == rho_.cols(), ShapeError,
                 "density matrix must be square");
    num_qubits_ = qubits_for_dim(static_cast<std::size_t>(rho_.rows()));
}

DensityMatrix DensityMatrix::projector(const CVector &psi) {
    return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::checked(CMatrix entries, double tol) {
    DensityMatrix rho(std::move(entries));
    if (!rho.satisfies_invariants(tol)) {
        throw Error("matrix violates density-matrix invariants");
    }
    return rho;
}

bool DensityMatrix::satisfies_invariants(double tol) const {
    if (rho_.size() == 0) {
        return false;
    }
    const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol) {
        return false;
    }
    if (std::abs(rho_.trace() - cplx(1.0, 0.0)) > tol) {
        return false;
    }
    const CMatrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -1e-9;
}

Circuit rotation_layer(int num_qubits) {
    Circuit c;
    c.num_qubits = num_qubits;
    c.num_params = 2 * static_cast<std::size_t>(num_qubits);
    for (int p = 0; p < num_qubits; ++p) {
        c.gates.push_back({GateKind::RZ, p, -1, 2 * p + 1});
        c.gates.push_back({GateKind::RY, p, -1, 2 * p});
    }
    return c;
}

Circuit hea_circuit(const QubitLayout &layout) {
    layout.validate();
    const int nq = layout.num_qubits();
    Circuit c;
    c.num_qubits = nq;
    c.num_params = layout.num_params();
    for (int l = 0; l <= layout.layers; ++l) {
        if (l > 0) {
            for (int p = 0; p + 1 < nq; ++p) {
                c.gates.push_back({GateKind::CNOT, p, p + 1, -1});
            }
        }
        const int base = 2 * nq * l;
        for (int p = 0; p < nq; ++p) {
            c.gates.push_back({GateKind::RZ, p, -1, base + 2 * p + 1});
            c.gates.push_back({GateKind::RY, p, -1, base + 2 * p});
        }
    }
    return c;
}

Eigen::Matrix2cd rotation_matrix(GateKind kind, double angle) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    Eigen::Matrix2cd m;
    switch (kind) {
    case GateKind::RX:
        m << c, cplx(0, -s), cplx(0, -s), c;
        break;
    case GateKind::RY:
        m << c, -s, s, c;
        break;
    case GateKind::RZ:
        m << cplx(c, -s), 0, 0, cplx(c, s);
        break;
    default:
        throw Error("rotation_matrix: not a rotation gate");
    }
    return m;
}

namespace {

template <typename F>
void for_each_pair(std::size_t dim, std::size_t mask, F &&f) {
    for (std::size_t hi = 0; hi < dim; hi += 2 * mask) {
        for (std::size_t lo = 0; lo < mask; ++lo) {
            f(hi + lo, hi + lo + mask);
        }
    }
}

} // namespace

void apply_gate(CVector &state, int num_qubits, const Gate &gate,
                std::span<const double> params, bool inverse) {
    const auto dim = static_cast<std::size_t>(state.size());
    cplx *a = state.data();
    switch (gate.kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ: {
        const double theta = params[static_cast<std::size_t>(gate.param)];
        const double c = std::cos(0.5 * theta);
        const double s = inverse ? -std::sin(0.5 * theta) : std::sin(0.5 * theta);
        const std::size_t mask = bit_of(num_qubits, gate.q0);
        if (gate.kind == GateKind::RY) {
            for_each_pair(dim, mask, [&](std::size_t i, std::size_t j) {
                const cplx a0 = a[i];
                const cplx a1 = a[j];
                a[i] = c * a0 - s * a1;
                a[j] = s * a0 + c * a1;
            });
        } else if (gate.kind == GateKind::RZ) {
            const cplx p0(c, -s);
            const cplx p1(c, s);
            for_each_pair(dim, mask, [&](std::size_t i, std::size_t j) {
                a[i] *= p0;
                a[j] *= p1;
            });
        } else {
            const cplx ms(0, -s);
            for_each_pair(dim, mask, [&](std::size_t i, std::size_t j) {
                const cplx a0 = a[i];
                const cplx a1 = a[j];
                a[i] = c * a0 + ms * a1;
                a[j] = ms * a0 + c * a1;
            });
        }
        break;
    }
    case GateKind::CNOT: {
        const std::size_t cmask = bit_of(num_qubits, gate.q0);
        const std::size_t tmask = bit_of(num_qubits, gate.q1);
        for_each_pair(dim, tmask, [&](std::size_t i, std::size_t j) {
            if ((i & cmask) != 0) {
                std::swap(a[i], a[j]);
            }
        });
        break;
    }
    case GateKind::CZ: {
        const std::size_t both =
            bit_of(num_qubits, gate.q0) | bit_of(num_qubits, gate.q1);
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & both) == both) {
                a[i] = -a[i];
            }
        }
        break;
    }
    }
}

void apply_generator(CVector &state, int num_qubits, const Gate &gate) {
    const auto dim = static_cast<std::size_t>(state.size());
    const std::size_t mask = bit_of(num_qubits, gate.q0);
    cplx *a = state.data();
    const cplx I(0, 1);
    switch (gate.kind) {
    case GateKind::RX:
        for_each_pair(dim, mask,
                      [&](std::size_t i, std::size_t j) { std::swap(a[i], a[j]); });
        break;
    case GateKind::RY:
        for_each_pair(dim, mask, [&](std::size_t i, std::size_t j) {
            const cplx a0 = a[i];
            a[i] = -I * a[j];
            a[j] = I * a0;
        });
        break;
    case GateKind::RZ:
        for_each_pair(dim, mask, [&](std::size_t, std::size_t j) { a[j] = -a[j]; });
        break;
    default:
        throw Error("apply_generator: gate has no generator");
    }
}

void apply_circuit(CVector &state, const Circuit &circuit,
                   std::span<const double> params) {
    LPQC_REQUIRE(static_cast<std::size_t>(state.size()) ==
                     (std::size_t{1} << circuit.num_qubits),
                 ShapeError, "state dimension does not match circuit");
    LPQC_REQUIRE(params.size() == circuit.num_params, ShapeError,
                 "parameter count does not match circuit");
    for (const Gate &g : circuit.gates) {
        apply_gate(state, circuit.num_qubits, g, params);
    }
}

StateVector hea_apply(const QubitLayout &layout, std::span<const double> angles,
                      const StateVector &input) {
    LPQC_REQUIRE(angles.size() == layout.num_params(), ShapeError,
                 "hea_apply: expected " + std::to_string(layout.num_params()) +
                     " angles, got " + std::to_string(angles.size()));
    LPQC_REQUIRE(input.num_qubits() == layout.num_qubits(), ShapeError,
                 "hea_apply: input state has the wrong number of qubits");
    CVector psi = input.amplitudes();
    apply_circuit(psi, hea_circuit(layout), angles);
    return {std::move(psi), layout.num_qubits()};
}

DensityMatrix partial_trace_ancilla(const StateVector &state, int m_anc) {
    LPQC_REQUIRE(m_anc >= 0 && m_anc < state.num_qubits(), ShapeError,
                 "partial_trace_ancilla: invalid ancilla count");
    const Eigen::Index rows = Eigen::Index{1} << (state.num_qubits() - m_anc);
    const Eigen::Index cols = Eigen::Index{1} << m_anc;
    using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> psi(state.amplitudes().data(), rows, cols);
    return DensityMatrix(psi * psi.adjoint());
}

double purity(const DensityMatrix &rho) {
    return rho.entries().squaredNorm();
}

double mixedness(double purity) {
    const double a = 1.0 - purity;
    return a < 1e-12 ? 0.0 : a;
}

double super_fidelity(const DensityMatrix &rho, const DensityMatrix &sigma,
                      double purity_rho, double purity_sigma) {
    LPQC_REQUIRE(rho.dim() == sigma.dim(), ShapeError,
                 "super_fidelity: dimension mismatch");
    // tr(rho sigma) = sum_ij rho_ij conj(sigma_ij) for Hermitian sigma.
    const double overlap =
        (rho.entries().array() * sigma.entries().array().conjugate()).sum().real();
    const double a = mixedness(purity_rho);
    const double b = mixedness(purity_sigma);
    return overlap + std::sqrt(a * b);
}

double super_fidelity(const DensityMatrix &rho, const DensityMatrix &sigma) {
    return super_fidelity(rho, sigma, purity(rho), purity(sigma));
}

double trace_distance(const DensityMatrix &rho, const DensityMatrix &sigma) {
    LPQC_REQUIRE(rho.dim() == sigma.dim(), ShapeError,
                 "trace_distance: dimension mismatch");
    const CMatrix diff = rho.entries() - sigma.entries();
    const CMatrix h = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

RVector dm_to_real_vector(const DensityMatrix &rho) {
    const auto n = static_cast<Eigen::Index>(rho.dim());
    const Eigen::Index off = n * (n - 1) / 2;
    RVector v(n * n);
    const CMatrix &m = rho.entries();
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = m(i, i).real();
    }
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
            v(n + k) = m(i, j).real();
            v(n + off + k) = m(i, j).imag();
        }
    }
    return v;
}

DensityMatrix real_vector_to_dm(const RVector &v) {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    LPQC_REQUIRE(n * n == v.size(), ShapeError,
                 "real_vector_to_dm: length is not a perfect square");
    const Eigen::Index off = n * (n - 1) / 2;
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = v(i);
    }
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
            m(i, j) = cplx(v(n + k), v(n + off + k));
            m(j, i) = std::conj(m(i, j));
        }
    }
    return DensityMatrix(std::move(m));
}

} // namespace lpqc::qcore
