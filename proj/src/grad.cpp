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

#include "lpqc/grad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lpqc/error.hpp"

namespace lpqc::grad {

CMatrix kernel_gradient(const DensityMatrix &rho, const DensityMatrix &sigma,
                        double purity_rho, double purity_sigma) {
    LPQC_REQUIRE(rho.dim() == sigma.dim(), ShapeError,
                 "kernel_gradient: dimension mismatch");
    const double a = std::max(1.0 - purity_rho, 1e-12);
    const double b = qcore::mixedness(purity_sigma);
    return sigma.entries() - std::sqrt(b / a) * rho.entries();
}

CMatrix kernel_gradient(const DensityMatrix &rho, const DensityMatrix &sigma) {
    return kernel_gradient(rho, sigma, qcore::purity(rho), qcore::purity(sigma));
}

EnsembleCotangents wasserstein_cotangents(const std::vector<DensityMatrix> &X,
                                          const std::vector<DensityMatrix> &Y) {
    EnsembleCotangents out;
    const Eigen::MatrixXd C = ot::cost_matrix(X, Y);
    out.ot = ot::wasserstein_plan(C);
    out.loss = out.ot.cost;
    std::vector<double> sy(Y.size());
    for (std::size_t j = 0; j < Y.size(); ++j) {
        sy[j] = std::sqrt(qcore::mixedness(qcore::purity(Y[j])));
    }
    out.cotangents.reserve(X.size());
    // dC_ij/drho_i = -(sigma_j - rho_i sqrt(b_j / a_i)).
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double a = std::max(1.0 - qcore::purity(X[i]), 1e-12);
        CMatrix G = CMatrix::Zero(static_cast<Eigen::Index>(X[i].dim()),
                                  static_cast<Eigen::Index>(X[i].dim()));
        double scale = 0.0;
        for (std::size_t j = 0; j < Y.size(); ++j) {
            const double p = out.ot.plan(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j));
            if (p == 0.0) {
                continue;
            }
            G -= p * Y[j].entries();
            scale += p * sy[j];
        }
        if (scale != 0.0) {
            G += (scale / std::sqrt(a)) * X[i].entries();
        }
        out.cotangents.push_back(std::move(G));
    }
    return out;
}

RVector adjoint_from_final(const Circuit &circuit, std::span<const double> params,
                           CVector psi_final, CVector lambda) {
    LPQC_REQUIRE(params.size() == circuit.num_params, ShapeError,
                 "adjoint: parameter count mismatch");
    RVector grad = RVector::Zero(static_cast<Eigen::Index>(circuit.num_params));
    CVector tmp(psi_final.size());
    const int nq = circuit.num_qubits;
    for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) {
        const qcore::Gate &g = *it;
        if (qcore::is_rotation(g.kind)) {
            tmp = psi_final;
            qcore::apply_generator(tmp, nq, g);
            grad(g.param) += lambda.dot(tmp).imag();
        }
        qcore::apply_gate(psi_final, nq, g, params, true);
        qcore::apply_gate(lambda, nq, g, params, true);
    }
    return grad;
}

CVector density_cotangent_to_state(const CVector &psi, int m_anc,
                                   const CMatrix &G) {
    const Eigen::Index cols = Eigen::Index{1} << m_anc;
    const Eigen::Index rows = psi.size() / cols;
    LPQC_REQUIRE(G.rows() == rows && G.cols() == rows, ShapeError,
                 "adjoint: cotangent shape does not match the data register");
    using RowMajor =
        Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> Psi(psi.data(), rows, cols);
    CVector lambda(psi.size());
    Eigen::Map<RowMajor> L(lambda.data(), rows, cols);
    L.noalias() = G * Psi;
    return lambda;
}

RVector circuit_grad_adjoint(const QubitLayout &layout,
                             std::span<const double> angles, const CMatrix &G) {
    const Circuit circuit = qcore::hea_circuit(layout);
    const StateVector psi = qcore::hea_apply(
        layout, angles, StateVector::zero(layout.num_qubits()));
    CVector lambda =
        density_cotangent_to_state(psi.amplitudes(), layout.m_anc, G);
    return adjoint_from_final(circuit, angles, psi.amplitudes(), std::move(lambda));
}

RVector circuit_grad_paramshift(
    std::span<const double> angles,
    const std::function<double(std::span<const double>)> &loss) {
    std::vector<double> x(angles.begin(), angles.end());
    RVector grad(static_cast<Eigen::Index>(x.size()));
    const double shift = std::numbers::pi / 2.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double keep = x[k];
        x[k] = keep + shift;
        const double up = loss(x);
        x[k] = keep - shift;
        const double down = loss(x);
        x[k] = keep;
        grad(static_cast<Eigen::Index>(k)) = 0.5 * (up - down);
    }
    return grad;
}

std::vector<double>
finite_difference(const std::vector<double> &x,
                  const std::function<double(const std::vector<double> &)> &f,
                  double step) {
    std::vector<double> probe = x;
    std::vector<double> grad(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        probe[k] = x[k] + step;
        const double up = f(probe);
        probe[k] = x[k] - step;
        const double down = f(probe);
        probe[k] = x[k];
        grad[k] = (up - down) / (2.0 * step);
    }
    return grad;
}

CircuitBatch circuit_batch(const QubitLayout &layout, const RMatrix &theta) {
    LPQC_REQUIRE(theta.rows() == static_cast<Eigen::Index>(layout.num_params()),
                 ShapeError, "circuit_batch: angle rows must equal K");
    const Circuit circuit = qcore::hea_circuit(layout);
    CircuitBatch out;
    out.psi.reserve(static_cast<std::size_t>(theta.cols()));
    out.rho.reserve(static_cast<std::size_t>(theta.cols()));
    const CVector zero = StateVector::zero(layout.num_qubits()).amplitudes();
    for (Eigen::Index c = 0; c < theta.cols(); ++c) {
        CVector psi = zero;
        qcore::apply_circuit(
            psi, circuit,
            std::span<const double>(theta.col(c).data(),
                                    static_cast<std::size_t>(theta.rows())));
        out.psi.emplace_back(std::move(psi), layout.num_qubits());
        out.rho.push_back(
            qcore::partial_trace_ancilla(out.psi.back(), layout.m_anc));
    }
    return out;
}

RMatrix circuit_batch_backward(const QubitLayout &layout, const RMatrix &theta,
                               const CircuitBatch &batch,
                               const std::vector<CMatrix> &cotangents) {
    LPQC_REQUIRE(cotangents.size() == static_cast<std::size_t>(theta.cols()) &&
                     batch.psi.size() == cotangents.size(),
                 ShapeError, "circuit_batch_backward: batch size mismatch");
    const Circuit circuit = qcore::hea_circuit(layout);
    RMatrix dtheta(theta.rows(), theta.cols());
    for (Eigen::Index c = 0; c < theta.cols(); ++c) {
        const auto &psi = batch.psi[static_cast<std::size_t>(c)].amplitudes();
        CVector lambda = density_cotangent_to_state(
            psi, layout.m_anc, cotangents[static_cast<std::size_t>(c)]);
        dtheta.col(c) = adjoint_from_final(
            circuit,
            std::span<const double>(theta.col(c).data(),
                                    static_cast<std::size_t>(theta.rows())),
            psi, std::move(lambda));
    }
    return dtheta;
}

LpqcForward lpqc_forward(const netgen::GeneratorWeights &gen, const RMatrix &Z) {
    gen.validate();
    LpqcForward f;
    f.Z = Z;
    const int E = gen.num_experts();
    f.expert_out.resize(static_cast<std::size_t>(E));
    f.expert_tapes.resize(static_cast<std::size_t>(E));
    for (int e = 0; e < E; ++e) {
        const auto k = static_cast<std::size_t>(e);
        f.expert_out[k] =
            netgen::mlp_forward_batch(gen.experts[k], Z, &f.expert_tapes[k]);
    }
    if (E == 1) {
        f.pi = RMatrix::Ones(1, Z.cols());
        f.theta = f.expert_out.front();
    } else {
        f.pi = netgen::softmax_columns(
            netgen::mlp_forward_batch(gen.gating, Z, &f.gate_tape));
        f.theta = RMatrix::Zero(f.expert_out.front().rows(), Z.cols());
        for (int e = 0; e < E; ++e) {
            f.theta += f.expert_out[static_cast<std::size_t>(e)] *
                       f.pi.row(e).asDiagonal();
        }
    }
    f.states = circuit_batch(gen.layout, f.theta);
    return f;
}

netgen::GeneratorWeights moe_backward(const netgen::GeneratorWeights &gen,
                                      const LpqcForward &fwd,
                                      const RMatrix &dtheta, double lambda) {
    netgen::GeneratorWeights g = gen;
    for (auto &e : g.experts) {
        e.params = e.params.zeros_like();
    }
    g.gating.params = g.gating.params.zeros_like();
    const int E = gen.num_experts();
    if (E == 1) {
        netgen::mlp_backward(gen.experts.front(), fwd.expert_tapes.front(),
                             dtheta, g.experts.front().params);
        return g;
    }
    const auto B = static_cast<double>(fwd.Z.cols());
    RMatrix dpi(E, fwd.Z.cols());
    for (int e = 0; e < E; ++e) {
        const auto k = static_cast<std::size_t>(e);
        const RMatrix dout = dtheta * fwd.pi.row(e).asDiagonal();
        netgen::mlp_backward(gen.experts[k], fwd.expert_tapes[k], dout,
                             g.experts[k].params);
        dpi.row(e) =
            (dtheta.array() * fwd.expert_out[k].array()).colwise().sum();
    }
    if (lambda != 0.0) {
        dpi.array() += (lambda / B) * (fwd.pi.array().log() + 1.0);
    }
    RMatrix deta(E, fwd.Z.cols());
    for (Eigen::Index c = 0; c < fwd.Z.cols(); ++c) {
        const double inner = fwd.pi.col(c).dot(dpi.col(c));
        deta.col(c) = fwd.pi.col(c).array() * (dpi.col(c).array() - inner);
    }
    netgen::mlp_backward(gen.gating, fwd.gate_tape, deta, g.gating.params);
    return g;
}

double full_loss(const netgen::GeneratorWeights &gen, const RMatrix &Z,
                 const std::vector<DensityMatrix> &Y, double lambda) {
    const LpqcForward f = lpqc_forward(gen, Z);
    const double d = ot::wasserstein_loss(f.states.rho, Y);
    return d + lambda * ot::entropy_regularizer(f.pi);
}

FullResult backward_full(const netgen::GeneratorWeights &gen, const RMatrix &Z,
                         const std::vector<DensityMatrix> &Y, double lambda) {
    LPQC_REQUIRE(Z.cols() > 0, ShapeError, "backward_full: empty batch");
    const LpqcForward f = lpqc_forward(gen, Z);
    const EnsembleCotangents ct = wasserstein_cotangents(f.states.rho, Y);
    const RMatrix dtheta =
        circuit_batch_backward(gen.layout, f.theta, f.states, ct.cotangents);
    FullResult r;
    r.wasserstein = ct.loss;
    r.entropy = ot::entropy_regularizer(f.pi);
    r.loss = r.wasserstein + lambda * r.entropy;
    r.gradient = moe_backward(gen, f, dtheta, lambda).flatten();
    return r;
}

Adam::Adam(std::size_t size, Options opts)
    : opts_(opts), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::vector<double> &weights, const std::vector<double> &grads) {
    LPQC_REQUIRE(weights.size() == m_.size() && grads.size() == m_.size(),
                 ShapeError, "adam: size mismatch");
    ++t_;
    const double b1 = opts_.beta1;
    const double b2 = opts_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < weights.size(); ++k) {
        m_[k] = b1 * m_[k] + (1.0 - b1) * grads[k];
        v_[k] = b2 * v_[k] + (1.0 - b2) * grads[k] * grads[k];
        const double mhat = m_[k] / c1;
        const double vhat = v_[k] / c2;
        weights[k] -= opts_.lr * mhat / (std::sqrt(vhat) + opts_.eps);
    }
}

std::string to_string(BenchFamily f) {
    switch (f) {
    case BenchFamily::NoLatentUniform:
        return "no-latent-uniform";
    case BenchFamily::Rd:
        return "rd";
    case BenchFamily::LpqcGaussLinear:
        return "lpqc-gauss-linear";
    case BenchFamily::LpqcGaussTanh:
        return "lpqc-gauss-tanh";
    }
    return "?";
}

BenchFamily bench_family_from_string(const std::string &s) {
    for (auto f : {BenchFamily::NoLatentUniform, BenchFamily::Rd,
                   BenchFamily::LpqcGaussLinear, BenchFamily::LpqcGaussTanh}) {
        if (to_string(f) == s) {
            return f;
        }
    }
    throw ConfigError("unknown benchmark family '" + s + "'");
}

namespace {

RMatrix uniform_angles(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
    RMatrix t(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            t(r, c) = rng.uniform(-std::numbers::pi, std::numbers::pi);
        }
    }
    return t;
}

RMatrix bench_angles(const GradNormConfig &cfg, Rng &rng) {
    const auto K = static_cast<Eigen::Index>(cfg.layout.num_params());
    switch (cfg.family) {
    case BenchFamily::NoLatentUniform:
        return uniform_angles(K, cfg.batch, rng);
    case BenchFamily::Rd: {
        netgen::RdSpec spec = netgen::make_rd(cfg.layout, cfg.rd_modes,
                                              rng.next_u64());
        spec.trainable = uniform_angles(spec.trainable.size(), 1, rng).col(0);
        return netgen::rd_parameters_batch(spec, rng, cfg.batch);
    }
    case BenchFamily::LpqcGaussLinear:
    case BenchFamily::LpqcGaussTanh: {
        const netgen::MlpSpec spec{
            cfg.latent_dim, cfg.hidden_dim, cfg.hidden_layers,
            static_cast<int>(K),
            cfg.family == BenchFamily::LpqcGaussTanh ? netgen::Activation::Tanh
                                                     : netgen::Activation::Linear};
        const netgen::Mlp mlp = netgen::make_mlp(spec, rng);
        RMatrix Z(cfg.latent_dim, cfg.batch);
        for (Eigen::Index c = 0; c < Z.cols(); ++c) {
            for (Eigen::Index r = 0; r < Z.rows(); ++r) {
                Z(r, c) = rng.normal();
            }
        }
        return netgen::mlp_forward_batch(mlp, Z);
    }
    }
    throw ConfigError("unknown benchmark family");
}

} // namespace

GradNormResult grad_norm_benchmark(const GradNormConfig &cfg,
                                   const std::vector<DensityMatrix> &reference) {
    cfg.layout.validate();
    LPQC_REQUIRE(cfg.trials >= 1 && cfg.batch >= 1, ConfigError,
                 "gradnorm: trials and batch must be positive");
    LPQC_REQUIRE(!reference.empty(), ConfigError,
                 "gradnorm: reference batch is empty");
    const Rng root(cfg.seed, 0x474e4f524dULL);
    GradNormResult res;
    res.values.reserve(static_cast<std::size_t>(cfg.trials));
    for (int t = 0; t < cfg.trials; ++t) {
        Rng rng = root.split(static_cast<std::uint64_t>(t));
        const RMatrix theta = bench_angles(cfg, rng);
        const CircuitBatch batch = circuit_batch(cfg.layout, theta);
        const EnsembleCotangents ct = wasserstein_cotangents(batch.rho, reference);
        const RMatrix g =
            circuit_batch_backward(cfg.layout, theta, batch, ct.cotangents);
        res.values.push_back(g.squaredNorm() / static_cast<double>(g.size()));
    }
    double sum = 0.0;
    for (double v : res.values) {
        sum += v;
    }
    res.mean = sum / static_cast<double>(res.values.size());
    double var = 0.0;
    for (double v : res.values) {
        var += (v - res.mean) * (v - res.mean);
    }
    res.stddev = res.values.size() > 1
                     ? std::sqrt(var / static_cast<double>(res.values.size() - 1))
                     : 0.0;
    return res;
}

} // namespace lpqc::grad
