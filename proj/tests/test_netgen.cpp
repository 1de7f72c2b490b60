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
#include <sstream>
#include <vector>

#include "lpqc/error.hpp"
#include "lpqc/netgen.hpp"

using namespace lpqc;
using namespace lpqc::netgen;

namespace {

Eigen::VectorXd randvec(Rng &rng, Eigen::Index n, double s = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = s * rng.normal();
    }
    return v;
}

Eigen::MatrixXd randmat(Rng &rng, Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = rng.normal();
        }
    }
    return m;
}

void randomize(Mlp &mlp, Rng &rng) {
    for (std::size_t k = 0; k < mlp.params.W.size(); ++k) {
        mlp.params.W[k] = randmat(rng, mlp.params.W[k].rows(), mlp.params.W[k].cols());
        mlp.params.b[k] = randvec(rng, mlp.params.b[k].size());
    }
}

} // namespace

TEST_CASE("layer dimensions", "[netgen]") {
    MlpSpec s{4, 32, 2, 88, Activation::Tanh};
    CHECK(s.layer_dims() == std::vector<int>{4, 32, 32, 88});
    MlpSpec direct{3, 32, 0, 5, Activation::Tanh};
    CHECK(direct.layer_dims() == std::vector<int>{3, 5});
    CHECK_THROWS_AS(activation_from_string("swish"), ConfigError);
    for (Activation a : {Activation::Tanh, Activation::Relu, Activation::Gelu, Activation::Linear}) {
        CHECK(activation_from_string(to_string(a)) == a);
    }
}

TEST_CASE("zero weights give zero output", "[netgen]") {
    const Mlp mlp = zero_mlp({3, 8, 2, 6, Activation::Tanh});
    CHECK(mlp_forward(mlp, Eigen::Vector3d(0.3, -1.0, 2.0)).isZero(0.0));
}

TEST_CASE("no hidden layer is a plain affine map", "[netgen]") {
    Rng rng(1);
    Mlp mlp = zero_mlp({3, 1, 0, 4, Activation::Tanh});
    randomize(mlp, rng);
    const Eigen::VectorXd z = randvec(rng, 3);
    const Eigen::VectorXd want = mlp.params.W[0] * z + mlp.params.b[0];
    CHECK((mlp_forward(mlp, z) - want).norm() == 0.0);
}

TEST_CASE("forward pass matches a hand-unrolled network", "[netgen]") {
    Rng rng(2);
    Mlp mlp = zero_mlp({2, 3, 1, 2, Activation::Tanh});
    randomize(mlp, rng);
    const double z0 = 0.4;
    const double z1 = -0.9;
    const auto &W0 = mlp.params.W[0];
    const auto &b0 = mlp.params.b[0];
    const auto &W1 = mlp.params.W[1];
    const auto &b1 = mlp.params.b[1];
    double h[3];
    for (int i = 0; i < 3; ++i) {
        h[i] = std::tanh(W0(i, 0) * z0 + W0(i, 1) * z1 + b0(i));
    }
    const Eigen::VectorXd out = mlp_forward(mlp, Eigen::Vector2d(z0, z1));
    for (int o = 0; o < 2; ++o) {
        const double want = W1(o, 0) * h[0] + W1(o, 1) * h[1] + W1(o, 2) * h[2] + b1(o);
        CHECK(std::abs(out(o) - want) < 1e-14);
    }
}

TEST_CASE("batch forward agrees with per-sample forward", "[netgen]") {
    Rng rng(3);
    for (Activation a : {Activation::Tanh, Activation::Relu, Activation::Gelu, Activation::Linear}) {
        const Mlp mlp = make_mlp({3, 7, 2, 5, a}, rng);
        const Eigen::MatrixXd Z = randmat(rng, 3, 6);
        const Eigen::MatrixXd out = mlp_forward_batch(mlp, Z);
        for (Eigen::Index c = 0; c < Z.cols(); ++c) {
            CHECK((out.col(c) - mlp_forward(mlp, Z.col(c))).norm() < 1e-14);
        }
    }
}

TEST_CASE("activations", "[netgen]") {
    CHECK(activate(Activation::Relu, -2.0) == 0.0);
    CHECK(activate(Activation::Relu, 1.5) == 1.5);
    CHECK(activate(Activation::Linear, -3.0) == -3.0);
    // Exact GELU: x * Phi(x).
    CHECK(activate(Activation::Gelu, 1.0) == Catch::Approx(0.8413447460685429).epsilon(1e-14));
    CHECK(activate(Activation::Gelu, -1.0) == Catch::Approx(-0.15865525393145707).epsilon(1e-13));
    for (Activation a : {Activation::Tanh, Activation::Gelu, Activation::Linear}) {
        for (double x : {-1.7, -0.2, 0.3, 2.1}) {
            const double h = 1e-6;
            const double fd = (activate(a, x + h) - activate(a, x - h)) / (2 * h);
            CHECK(std::abs(activate_derivative(a, x) - fd) < 1e-8);
        }
    }
}

TEST_CASE("backpropagation matches finite differences", "[netgen]") {
    Rng rng(4);
    for (Activation a : {Activation::Tanh, Activation::Gelu, Activation::Linear}) {
        Mlp mlp = make_mlp({3, 5, 2, 4, a}, rng);
        randomize(mlp, rng);
        const Eigen::MatrixXd Z = randmat(rng, 3, 3);
        const Eigen::MatrixXd R = randmat(rng, 4, 3);
        auto loss = [&](const Mlp &m, const Eigen::MatrixXd &z) {
            return (mlp_forward_batch(m, z).array() * R.array()).sum();
        };
        MlpTape tape;
        mlp_forward_batch(mlp, Z, &tape);
        MlpParams g = mlp.params.zeros_like();
        const Eigen::MatrixXd dZ = mlp_backward(mlp, tape, R, g);
        std::vector<double> flat;
        g.append_to(flat);
        std::vector<double> w;
        mlp.params.append_to(w);
        for (std::size_t k = 0; k < w.size(); ++k) {
            auto wp = w;
            auto wm = w;
            wp[k] += 1e-6;
            wm[k] -= 1e-6;
            Mlp mp = mlp;
            Mlp mm = mlp;
            std::size_t pos = 0;
            mp.params.read_from(wp, pos);
            pos = 0;
            mm.params.read_from(wm, pos);
            const double fd = (loss(mp, Z) - loss(mm, Z)) / 2e-6;
            CHECK(std::abs(flat[k] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
        }
        for (Eigen::Index i = 0; i < Z.size(); ++i) {
            Eigen::MatrixXd zp = Z;
            Eigen::MatrixXd zm = Z;
            zp(i) += 1e-6;
            zm(i) -= 1e-6;
            const double fd = (loss(mlp, zp) - loss(mlp, zm)) / 2e-6;
            CHECK(std::abs(dZ(i) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("Glorot initialisation bounds", "[netgen]") {
    Rng rng(5);
    const Mlp mlp = make_mlp({4, 32, 2, 88, Activation::Tanh}, rng);
    const std::vector<int> dims{4, 32, 32, 88};
    for (std::size_t k = 0; k < mlp.params.W.size(); ++k) {
        const double bound = std::sqrt(6.0 / (dims[k] + dims[k + 1]));
        CHECK(mlp.params.W[k].cwiseAbs().maxCoeff() <= bound);
        CHECK(mlp.params.W[k].cwiseAbs().maxCoeff() > 0.8 * bound);
        CHECK(mlp.params.b[k].isZero(0.0));
    }
}

TEST_CASE("gating softmax", "[netgen]") {
    Mlp gate = zero_mlp(gating_spec(2, 3));
    CHECK(gate.spec.hidden_dim == 32);
    CHECK(gate.spec.hidden_layers == 1);
    CHECK(gate.spec.activation == Activation::Tanh);
    const Eigen::VectorXd pi = gate_weights(gate, Eigen::Vector2d(0.5, -0.5));
    CHECK((pi - Eigen::Vector3d::Constant(1.0 / 3.0)).norm() < 1e-15);
    gate.params.b.back() << 10.0, 0.0, 0.0;
    CHECK(gate_weights(gate, Eigen::Vector2d(0.1, 0.2))(0) > 0.9999);
    const Eigen::MatrixXd s = softmax_columns((Eigen::MatrixXd(3, 1) << 10.0, 0.0, 0.0).finished());
    const double want = 1.0 / (1.0 + 2.0 * std::exp(-10.0));
    CHECK(std::abs(s(0, 0) - want) < 1e-15);
    CHECK(softmax_columns(Eigen::MatrixXd::Constant(1, 4, 3.0)).isOnes(0.0));
}

TEST_CASE("gating L1 identity against a one-hot indicator", "[netgen][property]") {
    Rng rng(6);
    for (int rep = 0; rep < 200; ++rep) {
        const int E = 2 + static_cast<int>(rng.index(5));
        const Eigen::MatrixXd pi = softmax_columns(randmat(rng, E, 1) * 3.0);
        const auto j = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(E)));
        Eigen::VectorXd chi = Eigen::VectorXd::Zero(E);
        chi(j) = 1.0;
        const double l1 = (pi.col(0) - chi).cwiseAbs().sum();
        CHECK(std::abs(l1 - 2.0 * (1.0 - pi(j, 0))) < 1e-14);
    }
}

TEST_CASE("mixture of experts", "[netgen]") {
    Rng rng(7);
    qcore::QubitLayout lay{2, 1, 1};
    const MlpSpec es{2, 6, 1, 0, Activation::Tanh};
    SECTION("single expert is the lone network") {
        const GeneratorWeights g = make_generator(lay, es, 1, rng);
        const Eigen::Vector2d z(0.3, -0.7);
        CHECK(moe_parameters(g, z) == mlp_forward(g.experts[0], z));
    }
    SECTION("saturated gate selects expert one") {
        GeneratorWeights g = make_generator(lay, es, 2, rng);
        g.gating.params.W.back().setZero();
        g.gating.params.b.back() << 30.0, 0.0;
        const Eigen::Vector2d z(0.3, -0.7);
        CHECK((moe_parameters(g, z) - mlp_forward(g.experts[0], z)).norm() < 1e-6);
    }
    SECTION("equal logits average the experts") {
        GeneratorWeights g = make_generator(lay, es, 3, rng);
        g.gating.params.W.back().setZero();
        g.gating.params.b.back().setZero();
        const Eigen::Vector2d z(0.3, -0.7);
        const Eigen::VectorXd mean = (mlp_forward(g.experts[0], z) + mlp_forward(g.experts[1], z) +
                                      mlp_forward(g.experts[2], z)) / 3.0;
        CHECK((moe_parameters(g, z) - mean).norm() < 1e-14);
    }
    SECTION("continuity in z") {
        GeneratorWeights g = make_generator(lay, es, 3, rng);
        const Eigen::Vector2d z(0.3, -0.7);
        double prev = 1e300;
        for (double h : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
            const double d = (moe_parameters(g, z + Eigen::Vector2d(h, -h)) - moe_parameters(g, z)).norm();
            CHECK(d < prev);
            CHECK(d / h < 100.0);
            prev = d;
        }
        CHECK(prev < 1e-3);
    }
}

TEST_CASE("generator weights flatten round trip", "[netgen]") {
    Rng rng(8);
    const GeneratorWeights g = make_generator({2, 1, 2}, {3, 5, 2, 0, Activation::Gelu}, 2, rng);
    const auto flat = g.flatten();
    CHECK(flat.size() == g.num_weights());
    GeneratorWeights h = g;
    std::vector<double> zeros(flat.size(), 0.0);
    h.unflatten(zeros);
    h.unflatten(flat);
    CHECK(h.flatten() == flat);
    CHECK_THROWS_AS(h.unflatten(std::vector<double>(3, 0.0)), ShapeError);
}

TEST_CASE("checkpoint round trip", "[netgen]") {
    Rng rng(9);
    const GeneratorWeights g = make_generator({2, 1, 2}, {3, 5, 2, 0, Activation::Relu}, 2, rng);
    std::stringstream ss;
    write_checkpoint(ss, g);
    const std::string bytes = ss.str();
    CHECK(bytes.substr(0, 4) == "LPQW");
    std::istringstream in(bytes);
    const GeneratorWeights back = read_checkpoint(in);
    CHECK(back.flatten() == g.flatten());
    CHECK(back.layout == g.layout);
    CHECK(back.experts[0].spec == g.experts[0].spec);
    std::istringstream truncated(bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(read_checkpoint(truncated), DataError);
    std::istringstream bad_magic("XXXX" + bytes.substr(4));
    CHECK_THROWS_AS(read_checkpoint(bad_magic), DataError);
}

TEST_CASE("no-latent sampling", "[netgen]") {
    NoLatentSpec s{Eigen::VectorXd::LinSpaced(5, -1.0, 1.0), Eigen::VectorXd::Constant(5, -20.0)};
    const NoLatentDraw d = sample_no_latent(s, 1, 50);
    for (Eigen::Index c = 0; c < 50; ++c) {
        CHECK((d.theta.col(c) - s.mean).cwiseAbs().maxCoeff() < 1e-8);
    }
    NoLatentSpec unit{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
    const NoLatentDraw big = sample_no_latent(unit, 2, 100000);
    for (Eigen::Index k = 0; k < 3; ++k) {
        const double m = big.theta.row(k).mean();
        const double var = (big.theta.row(k).array() - m).square().mean();
        CHECK(std::abs(var - 1.0) < 0.05);
    }
    CHECK(big.theta == big.eps);
    CHECK(sample_no_latent(unit, 3, 10).theta == sample_no_latent(unit, 3, 10).theta);
}

TEST_CASE("random-deterministic baseline", "[netgen]") {
    CHECK_THROWS_AS(make_rd({2, 0, 3}, 4, 1), ConfigError);
    const RdSpec rd = make_rd({2, 1, 4}, 1, 2);
    // Layers 0..2 random (3 layers), layers 3..4 trainable.
    CHECK(rd.random_size() == 2 * 3 * 3);
    CHECK(rd.trainable_size() == 2 * 3 * 2);
    Rng rng(3);
    const Eigen::VectorXd a = rd_parameters(rd, rng);
    const Eigen::VectorXd b = rd_parameters(rd, rng);
    const auto nt = static_cast<Eigen::Index>(rd.trainable_size());
    CHECK(a.tail(nt).isZero(0.0));
    CHECK(a.tail(nt) == b.tail(nt));
    CHECK(a.head(a.size() - nt) != b.head(b.size() - nt));
    const Eigen::MatrixXd many = rd_parameters_batch(rd, rng, 100000);
    for (Eigen::Index k = 0; k < 4; ++k) {
        const double m = many.row(k).mean();
        const double var = (many.row(k).array() - m).square().mean();
        CHECK(std::abs(var - std::exp(-2.0)) < 0.01);
    }
}

TEST_CASE("latent MLP baseline", "[netgen]") {
    CHECK(LmlpSpec::output_dim(3, true) == 2 * 64);
    CHECK(LmlpSpec::output_dim(3, false) == 2 * 8);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(8);
    e1(0) = 1.0;
    const auto pure = normalize_gram(lmlp_output_matrix(e1, 2, false));
    CMatrix p0 = CMatrix::Zero(4, 4);
    p0(0, 0) = 1.0;
    CHECK((pure.entries() - p0).norm() < 1e-15);
    Eigen::VectorXd ident = Eigen::VectorXd::Zero(32);
    for (int i = 0; i < 4; ++i) {
        ident(5 * i) = 1.0;
    }
    const auto mixed = normalize_gram(lmlp_output_matrix(ident, 2, true));
    CHECK((mixed.entries() - CMatrix::Identity(4, 4) / 4.0).norm() < 1e-15);
    Rng rng(10);
    for (int rep = 0; rep < 20; ++rep) {
        const auto r = normalize_gram(lmlp_output_matrix(randvec(rng, 32), 2, true));
        CHECK(r.satisfies_invariants(1e-10));
    }
    CHECK_THROWS_AS(normalize_gram(lmlp_output_matrix(Eigen::VectorXd::Zero(32), 2, true)),
                    DegenerateOutputError);
    const LmlpSpec spec = make_lmlp(2, 1, {4, 32, 2, 0, Activation::Tanh}, rng);
    CHECK(spec.mixed);
    CHECK(lmlp_state(spec, randvec(rng, 4)).satisfies_invariants(1e-10));
    CHECK_FALSE(make_lmlp(2, 0, {4, 32, 2, 0, Activation::Tanh}, rng).mixed);
}

TEST_CASE("output-dimension accounting", "[netgen]") {
    const double O = LmlpSpec::output_dim(8, true);
    CHECK(O == 131072.0);
    // 2L(n+m) convention (no U_0 layer) and the full count K = 2(n+m)(L+1).
    CHECK(O / (2.0 * 10 * (8 + 2)) == 655.36);
    const double K = static_cast<double>(qcore::QubitLayout{8, 2, 10}.num_params());
    CHECK(K == 220.0);
    CHECK(O / K == Catch::Approx(595.8).margin(0.05));
}
