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

// Desk-scale acceptance run. Prints one PASS/FAIL line per criterion;
// pass criterion numbers as arguments to run a subset and
// --report PATH to also write the lines to a file.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lpqc/commands.hpp"
#include "lpqc/data.hpp"
#include "lpqc/grad.hpp"
#include "lpqc/impe.hpp"
#include "lpqc/molecule.hpp"
#include "lpqc/otloss.hpp"
#include "lpqc/priors.hpp"
#include "oracles.hpp"

using namespace lpqc;
using qcore::DensityMatrix;
using qcore::QubitLayout;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(4);
    s << x;
    return s.str();
}

std::vector<double> random_angles(Rng &rng, std::size_t k) {
    std::vector<double> th(k);
    for (auto &t : th) {
        t = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    return th;
}

Eigen::VectorXd as_vec(const std::vector<double> &v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double median3(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

Outcome gradient_correctness() {
    Rng rng(101);
    double worst_ps = 0.0;
    double worst_fd = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int N = 2 + static_cast<int>(rng.index(3));
        const int m = static_cast<int>(rng.index(static_cast<std::size_t>(N)));
        const QubitLayout lay{N - m, m, 1 + static_cast<int>(rng.index(3))};
        const int d = 1 + static_cast<int>(rng.index(3));
        const int E = 1 + static_cast<int>(rng.index(2));
        const int B = 2 + static_cast<int>(rng.index(3));
        const auto gen = netgen::make_generator(
            lay, {d, 6, 1, 0, netgen::Activation::Tanh}, E, rng);
        const auto prior = priors::make_prior(priors::PriorFamily::Gaussian, d, 1, 0);
        const RMatrix Z = priors::sample_prior(prior, rng, B);
        const auto dim = static_cast<Eigen::Index>(lay.data_dim());
        std::vector<DensityMatrix> Y;
        for (int k = 0; k < B; ++k) {
            Y.emplace_back(oracle::random_density(rng, dim, 1 + static_cast<Eigen::Index>(rng.index(2))));
        }

        // Circuit level: cotangent of the real loss at the first sample.
        const auto fwd = grad::lpqc_forward(gen, Z);
        CMatrix G = CMatrix::Zero(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                G(i, j) = cplx(rng.normal(), rng.normal());
            }
        }
        G = 0.5 * (G + G.adjoint()).eval();
        const std::vector<double> th(fwd.theta.col(0).data(),
                                     fwd.theta.col(0).data() + fwd.theta.rows());
        auto f = [&](std::span<const double> t) {
            const auto psi = qcore::hea_apply(lay, t, qcore::StateVector::zero(lay.num_qubits()));
            const auto rho = qcore::partial_trace_ancilla(psi, lay.m_anc);
            return (G.array() * rho.entries().array().conjugate()).sum().real();
        };
        worst_ps = std::max(worst_ps, oracle::rel_err(grad::circuit_grad_adjoint(lay, th, G),
                                                      grad::circuit_grad_paramshift(th, f)));

        const double lambda = 0.05;
        const auto fr = grad::backward_full(gen, Z, Y, lambda);
        const auto fd = grad::finite_difference(
            gen.flatten(),
            [&](const std::vector<double> &w) {
                netgen::GeneratorWeights g = gen;
                g.unflatten(w);
                return grad::full_loss(g, Z, Y, lambda);
            },
            1e-4);
        worst_fd = std::max(worst_fd, oracle::rel_err(as_vec(fr.gradient), as_vec(fd)));
    }
    return {worst_ps < 1e-8 && worst_fd < 1e-3,
            "adjoint/paramshift max rel " + fmt(worst_ps) + " (< 1e-8), pipeline/FD max rel " +
                fmt(worst_fd) + " (< 1e-3)"};
}

Outcome ot_oracle() {
    Rng rng(102);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rep % 6);
        Eigen::MatrixXd C(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                C(i, j) = rng.uniform();
            }
        }
        const auto a = ot::uniform_histogram(n);
        worst = std::max(worst, std::abs(ot::ot_exact(C, a, a).cost -
                                         oracle::brute_force_assignment(C)));
    }
    return {worst < 1e-10, "max |exact - brute force| " + fmt(worst) + " (< 1e-10)"};
}

std::vector<cli::GradnormRow> gradnorm(std::vector<std::string> fam, int n, int m,
                                       std::vector<int> Ls, int trials, std::uint64_t seed) {
    cli::GradnormRequest req;
    req.families = std::move(fam);
    req.n_list = {n};
    req.L_list = std::move(Ls);
    req.m = m;
    req.trials = trials;
    req.seed = seed;
    return cli::cmd_gradnorm(req);
}

Outcome plateau_separation() {
    const auto rows = gradnorm({"no-latent-uniform", "lpqc-gauss-tanh"}, 6, 0, {10}, 128, 0);
    const double ratio = rows[1].mean / rows[0].mean;
    std::vector<std::vector<double>> by_L(3);
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto sweep = gradnorm({"no-latent-uniform"}, 4, 2, {2, 4, 8}, 128, s);
        for (std::size_t k = 0; k < 3; ++k) {
            by_L[k].push_back(sweep[k].mean);
        }
    }
    const double g2 = median3(by_L[0]);
    const double g4 = median3(by_L[1]);
    const double g8 = median3(by_L[2]);
    std::ostringstream info;
    const auto flat = gradnorm({"no-latent-uniform"}, 4, 0, {2, 4, 8}, 128, 0);
    info << " [m=0 sweep: " << fmt(flat[0].mean) << ", " << fmt(flat[1].mean) << ", "
         << fmt(flat[2].mean) << "]";
    return {ratio >= 10.0 && g2 > g4 && g4 > g8,
            "n=6 L=10 tanh " + fmt(rows[1].mean) + " / no-latent " + fmt(rows[0].mean) +
                " = " + fmt(ratio) + " (>= 10); n=4 m=2 L=2,4,8 medians " + fmt(g2) + ", " +
                fmt(g4) + ", " + fmt(g8) + info.str()};
}

Outcome saturation() {
    const auto rows = gradnorm({"no-latent-uniform"}, 8, 0, {10}, 64, 0);
    const double v = rows[0].mean;
    return {v >= 1e-12 && v <= 1e-8, "n=8 L=10 no-latent " + fmt(v) + " (in [1e-12, 1e-8])"};
}

Outcome prior_advantage() {
    auto final_losses = [](const std::string &name) {
        std::vector<double> out;
        for (std::uint64_t s = 1; s <= 3; ++s) {
            auto cfg = config::load_config(std::string(LPQC_CONFIG_DIR) + "/multicluster_" +
                                           name + ".json");
            cfg.seed = s;
            out.push_back(cli::run_training(cfg).final_test_loss);
        }
        return median3(out);
    };
    const double m4 = final_losses("m4_uniform");
    const double m1 = final_losses("m1_uniform");
    const double nl = final_losses("nolatent");
    return {m4 < m1 && std::max(m4, m1) * 10.0 <= nl,
            "median final D_Wass M4 " + fmt(m4) + ", M1 " + fmt(m1) + ", no-latent " + fmt(nl)};
}

Outcome qcore_bounds() {
    Rng rng(106);
    int tele = 0;
    int lip = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int N = 1 + static_cast<int>(rng.index(3));
        const int m = static_cast<int>(rng.index(static_cast<std::size_t>(N)));
        const QubitLayout lay{N - m, m, static_cast<int>(rng.index(4))};
        const auto a = random_angles(rng, lay.num_params());
        auto b = a;
        const double eps = std::pow(10.0, rng.uniform(-3.0, 0.5));
        double l1 = 0.0;
        for (auto &t : b) {
            const double d = rng.uniform(-eps, eps);
            t += d;
            l1 += std::abs(d);
        }
        // Dense U built column by column from the simulator.
        const Eigen::Index dim = Eigen::Index{1} << N;
        CMatrix Ua(dim, dim);
        CMatrix Ub(dim, dim);
        for (Eigen::Index c = 0; c < dim; ++c) {
            const qcore::StateVector e(CVector::Unit(dim, c), N);
            Ua.col(c) = qcore::hea_apply(lay, a, e).amplitudes();
            Ub.col(c) = qcore::hea_apply(lay, b, e).amplitudes();
        }
        if (oracle::operator_norm(Ua - Ub) > 0.5 * l1 + 1e-12) {
            ++tele;
        }

        const auto k = rep % 2 == 0 ? qcore::GateKind::RY : qcore::GateKind::RZ;
        const double x = rng.uniform(-10.0, 10.0);
        const double y = rng.uniform(-10.0, 10.0);
        const CMatrix diff = qcore::rotation_matrix(k, x) - qcore::rotation_matrix(k, y);
        if (oracle::operator_norm(diff) > 0.5 * std::abs(x - y) + 1e-12) {
            ++lip;
        }
    }
    return {tele == 0 && lip == 0, "telescoping violations " + std::to_string(tele) +
                                       "/1000, Lipschitz violations " + std::to_string(lip) +
                                       "/1000"};
}

data::MoleculeRecord random_molecule(Rng &rng, int atoms) {
    data::MoleculeRecord mol;
    for (int i = 0; i < atoms; ++i) {
        Eigen::Vector3d p;
        for (int k = 0; k < 3; ++k) {
            p(k) = rng.uniform(-1.8, 1.8);
        }
        mol.atoms.push_back({static_cast<data::Element>(rng.index(4)), p});
    }
    return mol;
}

Outcome codec_round_trip() {
    Rng rng(107);
    const auto ctx = data::qm9_context();
    int bad_elements = 0;
    double worst_pos = 0.0;
    double worst_norm = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int m = 1 + static_cast<int>(rng.index(9));
        const auto mol = random_molecule(rng, m);
        const auto canon = data::canonicalize_pose(mol);
        data::DecodeOptions opt;
        opt.scale = data::ScaleMode::Strict1x;
        const auto back = data::decode_state(data::encode_molecule(mol, ctx), ctx, opt);
        if (back.atoms.size() != canon.atoms.size()) {
            ++bad_elements;
            continue;
        }
        for (std::size_t i = 0; i < back.atoms.size(); ++i) {
            bad_elements += back.atoms[i].element != canon.atoms[i].element ? 1 : 0;
            worst_pos = std::max(worst_pos, (back.atoms[i].position - canon.atoms[i].position)
                                                .cwiseAbs()
                                                .maxCoeff());
        }
        const RVector f = data::molecule_features(mol, ctx);
        for (int i = 0; i < m; ++i) {
            const double block = f.segment<7>(7 * i).squaredNorm() + f(7 * m + i) * f(7 * m + i);
            worst_norm = std::max(worst_norm, std::abs(block - 4.0));
        }
    }
    return {bad_elements == 0 && worst_pos <= 1e-6 && worst_norm < 1e-12,
            "element mismatches " + std::to_string(bad_elements) + ", max position error " +
                fmt(worst_pos) + " A, max |block norm - 4| " + fmt(worst_norm)};
}

data::MolecularGraph complete(std::initializer_list<std::pair<data::Element, double>> chain) {
    data::MoleculeRecord mol;
    for (const auto &[e, x] : chain) {
        mol.atoms.push_back({e, Eigen::Vector3d(x, 0.0, 0.0)});
    }
    return data::complete_valences(data::infer_bonds(mol));
}

Outcome valence_completion() {
    using data::Element;
    const auto cc = complete({{Element::C, 0.0}, {Element::C, 1.2}});
    const auto cf = complete({{Element::C, 0.0}, {Element::F, 1.35}});
    const auto cco = complete({{Element::C, 0.0}, {Element::C, 2.5}, {Element::O, 5.0}});
    const bool hand = cc.bond_order(0, 1) == 3 && cf.bond_order(0, 1) == 1 &&
                      cco.bond_order(0, 1) == 3 && cco.bond_order(1, 2) == 1 &&
                      cco.bond_order(0, 2) == 0;

    Rng rng(108);
    const auto ctx = data::qm9_context();
    int violations = 0;
    for (int rep = 0; rep < 200; ++rep) {
        CVector v(data::kCodecDim);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v(i) = cplx(rng.normal(), rng.normal());
        }
        v.normalize();
        data::DecodeOptions opt;
        opt.m_override = 1 + static_cast<int>(rng.index(9));
        const auto g = data::complete_valences(
            data::infer_bonds(data::decode_state(qcore::StateVector(v, 7), ctx, opt)));
        for (Eigen::Index i = 0; i < g.bond_order.rows(); ++i) {
            if (g.bond_order.row(i).sum() > data::max_valence(g.elements[static_cast<std::size_t>(i)])) {
                ++violations;
            }
        }
    }
    return {hand && violations == 0, std::string("hand cases ") + (hand ? "exact" : "WRONG") +
                                         ", valence violations " + std::to_string(violations) +
                                         " over 200 geometries"};
}

Outcome impe_sanity() {
    Rng rng(109);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int L = 1 + static_cast<int>(rng.index(2));
        const auto z = random_angles(rng, static_cast<std::size_t>(2 * 3 * L));
        const CVector phi = oracle::random_state(rng, 4);
        CVector joint = CVector::Zero(8);
        for (Eigen::Index r = 0; r < 4; ++r) {
            joint(2 * r) = phi(r);
        }
        const auto s = impe::impe_circuit(z, qcore::StateVector(joint, 3), L);
        const RVector p = impe::outcome_probabilities(s, 1);
        CMatrix avg = CMatrix::Zero(4, 4);
        for (std::uint64_t o = 0; o < 2; ++o) {
            const CVector u = impe::outcome_branch(s, 1, o);
            if (p(static_cast<Eigen::Index>(o)) > 0.0) {
                const CVector d = u / u.norm();
                avg += p(static_cast<Eigen::Index>(o)) * d * d.adjoint();
            }
        }
        worst = std::max(worst, (avg - oracle::partial_trace(s.amplitudes(), 2, 1))
                                    .cwiseAbs()
                                    .maxCoeff());
    }

    impe::ImpeConfig cfg;
    cfg.n_data = 2;
    cfg.n_aux = 1;
    cfg.layers = 2;
    cfg.cycles = 2;
    int descended = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::vector<CVector> targets;
        for (const auto &rho : data::gen_multicluster(2, 0, 16, seed)) {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.entries());
            targets.push_back(es.eigenvectors().col(es.eigenvectors().cols() - 1));
        }
        const auto res = impe::impe_train(cfg, targets, seed);
        descended += res.history.back().final_loss < res.history.front().initial_loss ? 1 : 0;
    }
    return {worst < 1e-10 && descended >= 8, "channel identity max error " + fmt(worst) +
                                                 " (< 1e-10), descending seeds " +
                                                 std::to_string(descended) + "/10 (>= 8)"};
}

std::string file_bytes(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    std::vector<std::string> diffs;
    const auto base = std::filesystem::temp_directory_path() / "lpqc_acceptance";

    auto cfg = config::load_config(std::string(LPQC_CONFIG_DIR) + "/multicluster_m4_uniform.json");
    cfg.optimizer.epochs = 5;
    cfg.dataset.count = 256;
    cfg.output_dir = (base / "train").string();
    std::ostringstream log;
    std::vector<std::string> train_files;
    std::vector<nlohmann::json> manifests;
    for (int run = 0; run < 2; ++run) {
        manifests.push_back(cli::deterministic_part(cli::cmd_train(cfg, log).manifest));
        std::string all;
        for (const char *f : {"losses.csv", "checkpoint.bin", "generated.lpqe", "test.lpqe"}) {
            all += file_bytes(std::filesystem::path(cfg.output_dir) / f);
        }
        train_files.push_back(all);
    }
    if (manifests[0] != manifests[1] || train_files[0] != train_files[1]) {
        diffs.emplace_back("train");
    }

    std::vector<std::string> csv;
    for (int run = 0; run < 2; ++run) {
        std::ostringstream out;
        cli::write_gradnorm_csv(out, gradnorm({"no-latent-uniform", "rd", "lpqc-gauss-linear",
                                               "lpqc-gauss-tanh"},
                                              3, 1, {2}, 8, 4));
        csv.push_back(out.str());
    }
    if (csv[0] != csv[1]) {
        diffs.emplace_back("gradnorm");
    }

    cli::ImpeRequest ireq;
    ireq.config.n_data = 2;
    ireq.config.n_aux = 1;
    ireq.config.layers = 2;
    ireq.config.cycles = 2;
    ireq.config.epochs_per_cycle = 20;
    ireq.seed = 5;
    if (cli::cmd_impe(ireq).dump() != cli::cmd_impe(ireq).dump()) {
        diffs.emplace_back("impe");
    }

    const auto ds0 = (base / "ds0.lpqe").string();
    const auto ds1 = (base / "ds1.lpqe").string();
    cli::cmd_gen_dataset(3, 1, 64, 9, 0.05, ds0);
    cli::cmd_gen_dataset(3, 1, 64, 9, 0.05, ds1);
    if (file_bytes(ds0) != file_bytes(ds1)) {
        diffs.emplace_back("gen-dataset");
    }
    if (cli::cmd_eval(ds0, ds1, "").dump() != cli::cmd_eval(ds0, ds1, "").dump()) {
        diffs.emplace_back("eval");
    }
    std::filesystem::remove_all(base);

    std::string detail = "reruns of train, gradnorm, impe, gen-dataset, eval ";
    if (diffs.empty()) {
        detail += "bit-identical";
    } else {
        detail += "differ in:";
        for (const auto &d : diffs) {
            detail += " " + d;
        }
    }
    return {diffs.empty(), detail};
}

} // namespace

int main(int argc, char **argv) {
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
        {"gradient correctness", gradient_correctness},
        {"OT oracle equivalence", ot_oracle},
        {"barren-plateau separation", plateau_separation},
        {"no-latent saturation magnitude", saturation},
        {"multimodal-prior advantage", prior_advantage},
        {"telescoping/Lipschitz bounds", qcore_bounds},
        {"codec round trip", codec_round_trip},
        {"valence completion", valence_completion},
        {"IMPE sanity", impe_sanity},
        {"determinism", determinism},
    };
    std::set<int> selected;
    std::ofstream report;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--report" && i + 1 < argc) {
            report.open(argv[++i]);
        } else {
            selected.insert(std::atoi(argv[i]));
        }
    }
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!selected.empty() && selected.count(id) == 0) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += o.pass ? 0 : 1;
        char head[96];
        std::snprintf(head, sizeof head, "criterion %2d %s: ", id, o.pass ? "PASS" : "FAIL");
        std::ostringstream line;
        line << head << criteria[k].first << "  " << o.detail << "  [" << std::fixed
             << std::setprecision(1) << secs << " s]";
        std::cout << line.str() << std::endl;
        if (report.is_open()) {
            report << line.str() << std::endl;
        }
    }
    return failures == 0 ? 0 : 1;
}
