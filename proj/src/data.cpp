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

#include "lpqc/data.hpp"

#include <cmath>
#include <fstream>

#include "lpqc/binio.hpp"
#include "lpqc/error.hpp"
#include "lpqc/rng.hpp"

namespace lpqc::data {

std::vector<StateVector> cluster_centers(int num_qubits) {
    LPQC_REQUIRE(num_qubits >= 1, ConfigError, "cluster_centers: need a qubit");
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    const double h = 1.0 / std::sqrt(2.0);
    CVector zeros = CVector::Zero(dim);
    zeros(0) = 1.0;
    CVector ones = CVector::Zero(dim);
    ones(dim - 1) = 1.0;
    CVector ghz_p = CVector::Zero(dim);
    ghz_p(0) = h;
    ghz_p(dim - 1) = h;
    CVector ghz_m = CVector::Zero(dim);
    ghz_m(0) = h;
    ghz_m(dim - 1) = -h;
    std::vector<StateVector> out;
    for (auto *v : {&zeros, &ones, &ghz_p, &ghz_m}) {
        out.emplace_back(std::move(*v), num_qubits);
    }
    return out;
}

std::vector<DensityMatrix> gen_multicluster(int n_data, int m_anc, int count,
                                            std::uint64_t seed, double scale) {
    qcore::QubitLayout{n_data, m_anc, 0}.validate();
    LPQC_REQUIRE(count >= 0 && count % 4 == 0, ConfigError,
                 "gen_multicluster: count must be a nonnegative multiple of 4");
    LPQC_REQUIRE(scale >= 0.0, ConfigError,
                 "gen_multicluster: scale must be nonnegative");
    const int nq = n_data + m_anc;
    const auto centers = cluster_centers(nq);
    const qcore::Circuit layer = qcore::rotation_layer(nq);
    Rng rng(seed, 0x4d43ULL);
    std::vector<double> angles(layer.num_params);
    std::vector<DensityMatrix> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        for (double &a : angles) {
            a = scale * rng.normal();
        }
        CVector psi = centers[static_cast<std::size_t>(multicluster_label(
                                  static_cast<std::size_t>(k)))]
                          .amplitudes();
        qcore::apply_circuit(psi, layer, angles);
        out.push_back(qcore::partial_trace_ancilla(StateVector(std::move(psi), nq),
                                                   m_anc));
    }
    return out;
}

PcaResult pca_project(const std::vector<RVector> &vectors, int k) {
    LPQC_REQUIRE(k >= 1, ConfigError, "pca: k must be positive");
    LPQC_REQUIRE(vectors.size() >= static_cast<std::size_t>(k) + 1, ShapeError,
                 "pca: need at least k + 1 vectors");
    const auto N = static_cast<Eigen::Index>(vectors.size());
    const Eigen::Index dim = vectors.front().size();
    LPQC_REQUIRE(k <= dim, ShapeError, "pca: k exceeds the input dimension");
    RMatrix X(N, dim);
    for (Eigen::Index i = 0; i < N; ++i) {
        LPQC_REQUIRE(vectors[static_cast<std::size_t>(i)].size() == dim,
                     ShapeError, "pca: vectors differ in length");
        X.row(i) = vectors[static_cast<std::size_t>(i)].transpose();
    }
    X.rowwise() -= X.colwise().mean();
    const RMatrix cov = (X.transpose() * X) / static_cast<double>(N - 1);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(cov);
    PcaResult r;
    r.eigenvalues = es.eigenvalues().reverse();
    r.components = RMatrix::Zero(dim, k);
    const double floor = 1e-12 * std::max(1.0, r.eigenvalues(0));
    for (int c = 0; c < k; ++c) {
        if (r.eigenvalues(c) <= floor) {
            r.rank_deficient = true;
            continue;
        }
        RVector v = es.eigenvectors().col(dim - 1 - c);
        for (Eigen::Index t = 0; t < dim; ++t) {
            if (std::abs(v(t)) > 1e-12) {
                if (v(t) < 0) {
                    v = -v;
                }
                break;
            }
        }
        r.components.col(c) = v;
    }
    r.points = X * r.components;
    return r;
}

std::vector<DensityMatrix> Ensemble::density_matrices() const {
    if (mixed) {
        return states_mixed;
    }
    std::vector<DensityMatrix> out;
    out.reserve(pure.size());
    for (const auto &p : pure) {
        out.push_back(DensityMatrix::projector(p));
    }
    return out;
}

Ensemble make_mixed_ensemble(std::vector<DensityMatrix> states) {
    LPQC_REQUIRE(!states.empty(), ShapeError, "ensemble: no states");
    Ensemble e;
    e.mixed = true;
    e.n_data = states.front().num_qubits();
    for (const auto &s : states) {
        LPQC_REQUIRE(s.num_qubits() == e.n_data, ShapeError,
                     "ensemble: states differ in size");
    }
    e.states_mixed = std::move(states);
    return e;
}

Ensemble make_pure_ensemble(std::vector<CVector> states) {
    LPQC_REQUIRE(!states.empty(), ShapeError, "ensemble: no states");
    Ensemble e;
    e.mixed = false;
    const auto dim = states.front().size();
    LPQC_REQUIRE(dim >= 2 && (dim & (dim - 1)) == 0, ShapeError,
                 "ensemble: state length must be a power of two");
    e.n_data = 0;
    while ((Eigen::Index{1} << e.n_data) < dim) {
        ++e.n_data;
    }
    for (const auto &s : states) {
        LPQC_REQUIRE(s.size() == dim, ShapeError,
                     "ensemble: states differ in size");
    }
    e.pure = std::move(states);
    return e;
}

namespace {

constexpr std::uint16_t kEnsembleVersion = 1;

void put_complex(std::ostream &out, cplx z) {
    binio::put<double>(out, z.real());
    binio::put<double>(out, z.imag());
}

cplx get_complex(std::istream &in) {
    const double re = binio::get<double>(in);
    const double im = binio::get<double>(in);
    return {re, im};
}

} // namespace

void write_ensemble(std::ostream &out, const Ensemble &ens) {
    binio::put_magic(out, "LPQE");
    binio::put<std::uint16_t>(out, kEnsembleVersion);
    binio::put<std::uint16_t>(out, ens.mixed ? 1 : 0);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(ens.n_data));
    binio::put<std::uint64_t>(out, ens.size());
    const Eigen::Index dim = Eigen::Index{1} << ens.n_data;
    if (ens.mixed) {
        for (const auto &rho : ens.states_mixed) {
            LPQC_REQUIRE(rho.entries().rows() == dim, ShapeError,
                         "ensemble: state size does not match header");
            for (Eigen::Index r = 0; r < dim; ++r) {
                for (Eigen::Index c = 0; c < dim; ++c) {
                    put_complex(out, rho.entries()(r, c));
                }
            }
        }
    } else {
        for (const auto &psi : ens.pure) {
            LPQC_REQUIRE(psi.size() == dim, ShapeError,
                         "ensemble: state size does not match header");
            for (Eigen::Index r = 0; r < dim; ++r) {
                put_complex(out, psi(r));
            }
        }
    }
    if (!out) {
        throw Error("ensemble: write failed");
    }
}

Ensemble read_ensemble(std::istream &in) {
    binio::expect_magic(in, "LPQE");
    const auto version = binio::get<std::uint16_t>(in);
    if (version != kEnsembleVersion) {
        throw DataError("ensemble: unsupported version " + std::to_string(version),
                        4);
    }
    const auto flags = binio::get<std::uint16_t>(in);
    if ((flags & ~std::uint16_t{1}) != 0) {
        throw DataError("ensemble: unknown flag bits", 6);
    }
    const auto n = binio::get<std::uint32_t>(in);
    if (n < 1 || n > 14) {
        throw DataError("ensemble: implausible qubit count " + std::to_string(n), 8);
    }
    const auto count = binio::get<std::uint64_t>(in);
    Ensemble e;
    e.n_data = static_cast<int>(n);
    e.mixed = (flags & 1U) != 0;
    const Eigen::Index dim = Eigen::Index{1} << n;
    for (std::uint64_t k = 0; k < count; ++k) {
        const auto pos = static_cast<std::uint64_t>(in.tellg());
        if (e.mixed) {
            CMatrix rho(dim, dim);
            for (Eigen::Index r = 0; r < dim; ++r) {
                for (Eigen::Index c = 0; c < dim; ++c) {
                    rho(r, c) = get_complex(in);
                }
            }
            DensityMatrix dm(std::move(rho));
            if (!dm.satisfies_invariants(1e-8)) {
                throw DataError("ensemble: record " + std::to_string(k) +
                                    " is not a density matrix",
                                pos);
            }
            e.states_mixed.push_back(std::move(dm));
        } else {
            CVector psi(dim);
            for (Eigen::Index r = 0; r < dim; ++r) {
                psi(r) = get_complex(in);
            }
            if (!(std::abs(psi.norm() - 1.0) <= 1e-9)) {
                throw DataError("ensemble: record " + std::to_string(k) +
                                    " is not a unit vector",
                                pos);
            }
            e.pure.push_back(std::move(psi));
        }
    }
    return e;
}

void save_ensemble(const std::string &path, const Ensemble &ens) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    write_ensemble(out, ens);
}

Ensemble load_ensemble(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return read_ensemble(in);
}

} // namespace lpqc::data
