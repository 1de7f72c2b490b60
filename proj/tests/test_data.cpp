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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include "lpqc/data.hpp"
#include "lpqc/error.hpp"
#include "oracles.hpp"

using namespace lpqc;
using namespace lpqc::data;

namespace {

RVector randvec(Rng &rng, Eigen::Index n) {
    RVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = rng.normal();
    }
    return v;
}

double pair_dist(const RMatrix &P, Eigen::Index i, Eigen::Index j) {
    return (P.row(i) - P.row(j)).norm();
}

} // namespace

TEST_CASE("cluster centers", "[data]") {
    const auto c = cluster_centers(3);
    REQUIRE(c.size() == 4);
    CHECK(c[0].amplitudes()(0) == cplx(1.0));
    CHECK(c[1].amplitudes()(7) == cplx(1.0));
    CHECK(std::abs(c[2].amplitudes()(7) - cplx(1.0 / std::sqrt(2.0))) < 1e-16);
    CHECK(std::abs(c[3].amplitudes()(7) + cplx(1.0 / std::sqrt(2.0))) < 1e-16);
}

TEST_CASE("zero perturbation reproduces the centers", "[data]") {
    const auto pure = gen_multicluster(3, 0, 8, 1, 0.0);
    const auto c = cluster_centers(3);
    for (std::size_t k = 0; k < pure.size(); ++k) {
        const CVector &v = c[static_cast<std::size_t>(multicluster_label(k))].amplitudes();
        CHECK((pure[k].entries() - v * v.adjoint()).norm() < 1e-15);
    }
    const auto mixed = gen_multicluster(2, 1, 4, 1, 0.0);
    const auto c3 = cluster_centers(3);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK((mixed[k].entries() - oracle::partial_trace(c3[k].amplitudes(), 2, 1)).norm() < 1e-15);
    }
}

TEST_CASE("multi-cluster states are valid and separated", "[data]") {
    const int n = 2;
    const int m = 1;
    const auto states = gen_multicluster(n, m, 1000, 7);
    std::vector<DensityMatrix> centers;
    for (const auto &c : cluster_centers(n + m)) {
        centers.push_back(qcore::partial_trace_ancilla(c, m));
    }
    int good = 0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        REQUIRE(states[k].satisfies_invariants());
        const auto own = static_cast<std::size_t>(multicluster_label(k));
        const double k_own = qcore::super_fidelity(states[k], centers[own]);
        bool closer = true;
        for (std::size_t c = 0; c < 4; ++c) {
            // GHZ+ and GHZ- have the same reduced state once an ancilla is
            // traced out; such pairs cannot be told apart.
            if (c == own || (centers[c].entries() - centers[own].entries()).norm() < 1e-12) {
                continue;
            }
            closer = closer && k_own > qcore::super_fidelity(states[k], centers[c]);
        }
        good += closer ? 1 : 0;
    }
    CHECK(good >= 990);
    CHECK_THROWS_AS(gen_multicluster(2, 0, 6, 1), ConfigError);
}

TEST_CASE("multi-cluster generation is deterministic", "[data]") {
    const auto a = gen_multicluster(2, 2, 16, 3);
    const auto b = gen_multicluster(2, 2, 16, 3);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].entries() == b[k].entries());
    }
}

TEST_CASE("PCA of collinear points", "[data]") {
    Rng rng(1);
    const RVector dir = randvec(rng, 3).normalized();
    std::vector<RVector> pts;
    for (int i = 0; i < 10; ++i) {
        pts.push_back(RVector::Constant(3, 0.5) + rng.normal() * dir);
    }
    const PcaResult r = pca_project(pts, 1);
    for (Eigen::Index i = 0; i < 10; ++i) {
        for (Eigen::Index j = 0; j < 10; ++j) {
            CHECK(std::abs(pair_dist(r.points, i, j) - (pts[static_cast<std::size_t>(i)] -
                                                        pts[static_cast<std::size_t>(j)]).norm()) < 1e-8);
        }
    }
    CHECK_FALSE(r.rank_deficient);
    const PcaResult r2 = pca_project(pts, 2);
    CHECK(r2.rank_deficient);
    CHECK(r2.points.col(1).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("full-rank PCA preserves distances", "[data]") {
    Rng rng(2);
    std::vector<RVector> pts;
    for (int i = 0; i < 12; ++i) {
        pts.push_back(randvec(rng, 4));
    }
    const PcaResult r = pca_project(pts, 4);
    for (Eigen::Index i = 0; i < 12; ++i) {
        for (Eigen::Index j = i + 1; j < 12; ++j) {
            CHECK(std::abs(pair_dist(r.points, i, j) - (pts[static_cast<std::size_t>(i)] -
                                                        pts[static_cast<std::size_t>(j)]).norm()) < 1e-10);
        }
    }
    // Each axis has a positive first nonzero coordinate.
    for (Eigen::Index c = 0; c < 4; ++c) {
        Eigen::Index i = 0;
        while (std::abs(r.components(i, c)) < 1e-12) {
            ++i;
        }
        CHECK(r.components(i, c) > 0.0);
    }
}

TEST_CASE("PCA reconstruction error equals the discarded variance", "[data]") {
    Rng rng(3);
    std::vector<RVector> pts;
    RVector mean = RVector::Zero(5);
    for (int i = 0; i < 40; ++i) {
        RVector v = randvec(rng, 5);
        v(0) *= 3.0;
        v(2) *= 0.3;
        pts.push_back(v);
        mean += v / 40.0;
    }
    const PcaResult r = pca_project(pts, 2);
    double err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const RVector c = pts[i] - mean;
        const RVector back = r.components * r.points.row(static_cast<Eigen::Index>(i)).transpose();
        err += (c - back).squaredNorm();
    }
    err /= 39.0;
    CHECK(std::abs(err - r.eigenvalues.tail(3).sum()) < 1e-8);
}

TEST_CASE("ensemble file round trip", "[data]") {
    Rng rng(4);
    std::vector<DensityMatrix> states;
    for (int k = 0; k < 5; ++k) {
        states.emplace_back(oracle::random_density(rng, 4, 2));
    }
    const Ensemble e = make_mixed_ensemble(states);
    std::stringstream ss;
    write_ensemble(ss, e);
    const std::string bytes = ss.str();
    CHECK(bytes.substr(0, 4) == "LPQE");
    CHECK(bytes.size() == 4 + 2 + 2 + 4 + 8 + 5 * 16 * 16);
    std::istringstream in(bytes);
    const Ensemble back = read_ensemble(in);
    REQUIRE(back.mixed);
    REQUIRE(back.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(back.states_mixed[k].entries() == states[k].entries());
    }
    std::stringstream again;
    write_ensemble(again, back);
    CHECK(again.str() == bytes);

    std::vector<CVector> pure{oracle::random_state(rng, 8), oracle::random_state(rng, 8)};
    std::stringstream ps;
    write_ensemble(ps, make_pure_ensemble(pure));
    std::istringstream pin(ps.str());
    const Ensemble pb = read_ensemble(pin);
    CHECK_FALSE(pb.mixed);
    CHECK(pb.n_data == 3);
    CHECK(pb.pure[1] == pure[1]);
}

TEST_CASE("ensemble file errors", "[data]") {
    Rng rng(5);
    std::stringstream ss;
    write_ensemble(ss, make_pure_ensemble({oracle::random_state(rng, 4), oracle::random_state(rng, 4)}));
    const std::string bytes = ss.str();
    std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
    try {
        read_ensemble(truncated);
        FAIL("expected a DataError");
    } catch (const DataError &e) {
        CHECK(e.offset() > 20);
        CHECK(e.offset() <= bytes.size());
    }
    // Scale the first amplitude of the second record: no longer unit norm.
    std::string bad = bytes;
    const std::size_t pos = 20 + 4 * 16;
    double re = 0.0;
    std::memcpy(&re, bad.data() + pos, sizeof re);
    re = re * 3.0 + 1.0;
    std::memcpy(bad.data() + pos, &re, sizeof re);
    std::istringstream nonunit(bad);
    try {
        read_ensemble(nonunit);
        FAIL("expected a DataError");
    } catch (const DataError &e) {
        CHECK(e.offset() == pos);
    }
    std::istringstream magic("LPQX" + bytes.substr(4));
    CHECK_THROWS_AS(read_ensemble(magic), DataError);
}
