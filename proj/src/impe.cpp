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

#include "lpqc/impe.hpp"

#include <cmath>
#include <numeric>

#include "lpqc/error.hpp"
#include "lpqc/grad.hpp"
#include "lpqc/otloss.hpp"

namespace lpqc::impe {

void ImpeConfig::validate() const {
    LPQC_REQUIRE(n_data >= 1 && n_aux >= 1 && layers >= 1 && cycles >= 1 &&
                     epochs_per_cycle >= 1 && batch >= 0,
                 ConfigError, "impe: sizes must be positive");
    LPQC_REQUIRE(num_qubits() <= 16, ConfigError, "impe: too many qubits");
    LPQC_REQUIRE(lr > 0.0, ConfigError, "impe: learning rate must be positive");
}

qcore::Circuit impe_circuit_def(int num_qubits, int layers) {
    qcore::Circuit c;
    c.num_qubits = num_qubits;
    c.num_params = 2 * static_cast<std::size_t>(num_qubits) *
                   static_cast<std::size_t>(layers);
    for (int l = 0; l < layers; ++l) {
        for (int q = 0; q < num_qubits; ++q) {
            const int base = 2 * (num_qubits * l + q);
            c.gates.push_back({qcore::GateKind::RY, q, -1, base});
            c.gates.push_back({qcore::GateKind::RX, q, -1, base + 1});
        }
        for (int q = 0; q + 1 < num_qubits; ++q) {
            c.gates.push_back({qcore::GateKind::CZ, q, q + 1, -1});
        }
    }
    return c;
}

qcore::StateVector impe_circuit(std::span<const double> zeta,
                                const qcore::StateVector &state, int layers) {
    const auto c = impe_circuit_def(state.num_qubits(), layers);
    LPQC_REQUIRE(zeta.size() == c.num_params, ShapeError,
                 "impe_circuit: angle count must be 2 N L");
    CVector psi = state.amplitudes();
    qcore::apply_circuit(psi, c, zeta);
    return {std::move(psi), state.num_qubits()};
}

RVector outcome_probabilities(const qcore::StateVector &state, int n_aux) {
    LPQC_REQUIRE(n_aux >= 1 && n_aux < state.num_qubits(), ShapeError,
                 "impe: invalid auxiliary count");
    const Eigen::Index cols = Eigen::Index{1} << n_aux;
    const Eigen::Index rows = static_cast<Eigen::Index>(state.dim()) / cols;
    RVector p = RVector::Zero(cols);
    const CVector &a = state.amplitudes();
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index z = 0; z < cols; ++z) {
            p(z) += std::norm(a(r * cols + z));
        }
    }
    return p;
}

CVector outcome_branch(const qcore::StateVector &state, int n_aux,
                       std::uint64_t outcome) {
    const Eigen::Index cols = Eigen::Index{1} << n_aux;
    const Eigen::Index rows = static_cast<Eigen::Index>(state.dim()) / cols;
    LPQC_REQUIRE(static_cast<Eigen::Index>(outcome) < cols, ShapeError,
                 "impe: outcome out of range");
    CVector u(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        u(r) = state.amplitudes()(r * cols + static_cast<Eigen::Index>(outcome));
    }
    return u;
}

MeasureResult impe_measure_update(const qcore::StateVector &state, int n_aux,
                                  Rng &rng) {
    const RVector p = outcome_probabilities(state, n_aux);
    const double total = p.sum();
    for (int attempt = 0; attempt < 64; ++attempt) {
        const double r = rng.uniform() * total;
        double acc = 0.0;
        Eigen::Index z = p.size() - 1;
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            acc += p(k);
            if (r < acc) {
                z = k;
                break;
            }
        }
        if (p(z) < 1e-14) {
            continue;
        }
        CVector u = outcome_branch(state, n_aux, static_cast<std::uint64_t>(z));
        u /= std::sqrt(p(z));
        return {std::move(u), static_cast<std::uint64_t>(z), p(z) / total};
    }
    throw Error("impe: could not draw an outcome with nonzero probability");
}

MeasureResult impe_measure_update(const qcore::StateVector &state, int n_aux,
                                  std::uint64_t seed) {
    Rng rng(seed);
    return impe_measure_update(state, n_aux, rng);
}

std::vector<CVector> haar_product_states(int n, int count, Rng &rng) {
    std::vector<CVector> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        CVector psi = CVector::Ones(1);
        for (int q = 0; q < n; ++q) {
            Eigen::Vector2cd s;
            for (int t = 0; t < 2; ++t) {
                const double re = rng.normal();
                const double im = rng.normal();
                s(t) = cplx(re, im);
            }
            s.normalize();
            CVector next(psi.size() * 2);
            for (Eigen::Index i = 0; i < psi.size(); ++i) {
                next(2 * i) = psi(i) * s(0);
                next(2 * i + 1) = psi(i) * s(1);
            }
            psi = std::move(next);
        }
        out.push_back(std::move(psi));
    }
    return out;
}

namespace {

CVector with_aux(const CVector &data, int n_aux) {
    const Eigen::Index cols = Eigen::Index{1} << n_aux;
    CVector psi = CVector::Zero(data.size() * cols);
    for (Eigen::Index r = 0; r < data.size(); ++r) {
        psi(r * cols) = data(r);
    }
    return psi;
}

Eigen::MatrixXd pure_costs(const std::vector<CVector> &X,
                           const std::vector<CVector> &Y) {
    LPQC_REQUIRE(!X.empty() && !Y.empty(), ShapeError, "impe: empty ensemble");
    Eigen::MatrixXd C(static_cast<Eigen::Index>(X.size()),
                      static_cast<Eigen::Index>(Y.size()));
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (std::size_t j = 0; j < Y.size(); ++j) {
            LPQC_REQUIRE(X[i].size() == Y[j].size(), ShapeError,
                         "impe: state sizes differ");
            C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::max(0.0, 1.0 - std::norm(X[i].dot(Y[j])));
        }
    }
    return C;
}

} // namespace

std::vector<CVector> impe_step(const ImpeConfig &cfg,
                               std::span<const double> zeta,
                               const std::vector<CVector> &inputs, Rng &rng) {
    const auto circuit = impe_circuit_def(cfg.num_qubits(), cfg.layers);
    std::vector<CVector> out;
    out.reserve(inputs.size());
    for (const auto &in : inputs) {
        CVector psi = with_aux(in, cfg.n_aux);
        qcore::apply_circuit(psi, circuit, zeta);
        out.push_back(
            impe_measure_update(qcore::StateVector(std::move(psi), cfg.num_qubits()),
                                cfg.n_aux, rng)
                .data);
    }
    return out;
}

double pure_wasserstein(const std::vector<CVector> &X,
                        const std::vector<CVector> &Y) {
    return ot::wasserstein_plan(pure_costs(X, Y)).cost;
}

CycleEval impe_cycle_loss(const ImpeConfig &cfg, std::span<const double> zeta,
                          const std::vector<CVector> &inputs,
                          const std::vector<CVector> &targets, Rng &rng,
                          bool with_gradient) {
    const auto circuit = impe_circuit_def(cfg.num_qubits(), cfg.layers);
    LPQC_REQUIRE(zeta.size() == circuit.num_params, ShapeError,
                 "impe: angle count must be 2 N L");
    const int nq = cfg.num_qubits();
    const Eigen::Index cols = Eigen::Index{1} << cfg.n_aux;
    std::vector<CVector> finals;
    std::vector<MeasureResult> meas;
    CycleEval ev;
    for (const auto &in : inputs) {
        CVector psi = with_aux(in, cfg.n_aux);
        qcore::apply_circuit(psi, circuit, zeta);
        qcore::StateVector sv(std::move(psi), nq);
        meas.push_back(impe_measure_update(sv, cfg.n_aux, rng));
        ev.outputs.push_back(meas.back().data);
        finals.push_back(sv.amplitudes());
    }
    const ot::OtResult plan = ot::wasserstein_plan(pure_costs(ev.outputs, targets));
    ev.loss = plan.cost;
    if (!with_gradient) {
        return ev;
    }
    ev.gradient.assign(circuit.num_params, 0.0);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const CVector &phi = ev.outputs[i];
        // G phi with G = dL/drho = -sum_j P_ij |t_j><t_j|.
        CVector Gphi = CVector::Zero(phi.size());
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const double p = plan.plan(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(j));
            if (p != 0.0) {
                Gphi -= p * targets[j] * targets[j].dot(phi);
            }
        }
        const double expect = phi.dot(Gphi).real();
        // Gradient of the renormalised branch: w = (G u - <phi|G|phi> u)/|u|^2
        // with u = sqrt(p) phi.
        const double norm_u = std::sqrt(meas[i].probability);
        const CVector w = (Gphi - expect * phi) / norm_u;
        CVector lambda = CVector::Zero(finals[i].size());
        const auto z = static_cast<Eigen::Index>(meas[i].outcome);
        for (Eigen::Index r = 0; r < w.size(); ++r) {
            lambda(r * cols + z) = w(r);
        }
        const RVector g = grad::adjoint_from_final(circuit, zeta, finals[i],
                                                   std::move(lambda));
        for (Eigen::Index k = 0; k < g.size(); ++k) {
            ev.gradient[static_cast<std::size_t>(k)] += g(k);
        }
    }
    return ev;
}

ImpeResult impe_train(const ImpeConfig &cfg, const std::vector<CVector> &targets,
                      std::uint64_t seed) {
    cfg.validate();
    LPQC_REQUIRE(!targets.empty(), ConfigError, "impe: no target states");
    const Eigen::Index dim = Eigen::Index{1} << cfg.n_data;
    for (const auto &t : targets) {
        LPQC_REQUIRE(t.size() == dim, ShapeError,
                     "impe: target states must live on the data register");
    }
    Rng init(seed, 0x494e4954ULL);
    std::vector<CVector> current =
        haar_product_states(cfg.n_data, static_cast<int>(targets.size()), init);
    const Rng root(seed, 0x494d5045ULL);
    ImpeResult res;
    const std::size_t N = current.size();
    const std::size_t batch =
        cfg.batch == 0 ? N : std::min<std::size_t>(N, static_cast<std::size_t>(cfg.batch));
    for (int t = 0; t < cfg.cycles; ++t) {
        const Rng cycle_rng = root.split(static_cast<std::uint64_t>(t));
        auto evaluate = [&](const std::vector<double> &z) {
            Rng eval = cycle_rng.split(0);
            return impe_cycle_loss(cfg, z, current, targets, eval, false);
        };
        std::vector<double> zeta(cfg.num_params(), 0.0);
        CycleEval best_eval = evaluate(zeta);
        std::vector<double> best = zeta;
        CycleLog log;
        log.initial_loss = best_eval.loss;
        grad::Adam adam(zeta.size(), {cfg.lr, 0.9, 0.999, 1e-8});
        std::vector<std::size_t> order(N);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (int e = 0; e < cfg.epochs_per_cycle; ++e) {
            Rng epoch_rng = cycle_rng.split(static_cast<std::uint64_t>(e) + 1);
            if (batch < N) {
                epoch_rng.shuffle(std::span<std::size_t>(order));
            }
            for (std::size_t start = 0; start < N; start += batch) {
                std::vector<CVector> inputs;
                for (std::size_t k = start; k < std::min(N, start + batch); ++k) {
                    inputs.push_back(current[order[k]]);
                }
                const CycleEval ev =
                    impe_cycle_loss(cfg, zeta, inputs, targets, epoch_rng, true);
                adam.step(zeta, ev.gradient);
            }
            CycleEval ev = evaluate(zeta);
            log.epoch_losses.push_back(ev.loss);
            if (ev.loss < best_eval.loss) {
                best_eval = std::move(ev);
                best = zeta;
            }
        }
        log.final_loss = best_eval.loss;
        res.history.push_back(std::move(log));
        res.zetas.push_back(best);
        current = std::move(best_eval.outputs);
    }
    res.final_ensemble = current;
    return res;
}

} // namespace lpqc::impe
