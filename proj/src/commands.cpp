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

#include "lpqc/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

#include "lpqc/data.hpp"
#include "lpqc/error.hpp"
#include "lpqc/otloss.hpp"
#include "lpqc/rng.hpp"

namespace lpqc::cli {

using nlohmann::json;
using qcore::DensityMatrix;

namespace {

constexpr std::uint64_t kSplitStream = 0x53504c4954ULL;
constexpr std::uint64_t kTrainStream = 0x545241494eULL;
constexpr std::uint64_t kEvalStream = 0x4556414cULL;
constexpr std::uint64_t kInitSalt = 0x494e4954ULL;

std::vector<DensityMatrix> load_dataset(const config::ExperimentConfig &cfg) {
    const auto &layout = cfg.generator.layout;
    if (cfg.dataset.task == "multicluster") {
        return data::gen_multicluster(layout.n_data, layout.m_anc, cfg.dataset.count,
                                      cfg.dataset.seed, cfg.dataset.scale);
    }
    const data::Ensemble e = data::load_ensemble(cfg.dataset.path);
    if (e.n_data != layout.n_data) {
        throw ConfigError("config: field 'layout.n' does not match the ensemble file");
    }
    return e.density_matrices();
}

std::ofstream open_out(const std::string &path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    return out;
}

} // namespace

TrainResult run_training(const config::ExperimentConfig &cfg, std::ostream *progress) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<DensityMatrix> all = load_dataset(cfg);
    LPQC_REQUIRE(all.size() >= 2, DataError, "dataset needs at least two states");

    std::vector<std::size_t> perm(all.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng split_rng(cfg.seed, kSplitStream);
    split_rng.shuffle(std::span<std::size_t>(perm));
    const std::size_t n_train = all.size() / 2;
    std::vector<DensityMatrix> train;
    TrainResult res;
    for (std::size_t k = 0; k < perm.size(); ++k) {
        (k < n_train ? train : res.test).push_back(all[perm[k]]);
    }
    const std::size_t n_eval =
        std::min(res.test.size(), static_cast<std::size_t>(cfg.eval.samples));
    const std::vector<DensityMatrix> test_subset(res.test.begin(),
                                                 res.test.begin() +
                                                     static_cast<std::ptrdiff_t>(n_eval));

    const std::uint64_t init_seed = splitmix64(cfg.seed + kInitSalt);
    res.generator = generators::make_generator(cfg.generator, init_seed);
    std::vector<double> w = res.generator->weights();
    grad::Adam adam(w.size(), {cfg.optimizer.lr, cfg.optimizer.beta1,
                               cfg.optimizer.beta2, cfg.optimizer.eps});
    Rng train_rng(cfg.seed, kTrainStream);

    auto evaluate = [&] {
        Rng eval_rng(cfg.seed, kEvalStream);
        res.generated = res.generator->generate(static_cast<int>(n_eval), eval_rng);
        return ot::wasserstein_loss(res.generated, test_subset);
    };

    json epochs = json::array();
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto B = static_cast<std::size_t>(cfg.optimizer.batch);
    for (int epoch = 1; epoch <= cfg.optimizer.epochs; ++epoch) {
        train_rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        int steps = 0;
        for (std::size_t start = 0; start < train.size(); start += B) {
            std::vector<DensityMatrix> targets;
            for (std::size_t k = start; k < std::min(train.size(), start + B); ++k) {
                targets.push_back(train[order[k]]);
            }
            const generators::StepResult step = res.generator->loss_and_grad(
                static_cast<int>(targets.size()), train_rng, targets,
                cfg.optimizer.lambda);
            adam.step(w, step.gradient);
            res.generator->set_weights(w);
            loss_sum += step.loss;
            ++steps;
        }
        const double train_loss = loss_sum / steps;
        res.train_losses.push_back(train_loss);
        json row{{"epoch", epoch}, {"train_loss", train_loss}};
        if (epoch % cfg.eval.stride == 0 || epoch == cfg.optimizer.epochs) {
            const double test_loss = evaluate();
            res.test_losses.emplace_back(epoch, test_loss);
            row["test_loss"] = test_loss;
            if (progress != nullptr) {
                *progress << "epoch " << epoch << " train " << train_loss << " test "
                          << test_loss << '\n';
            }
        }
        epochs.push_back(std::move(row));
    }
    res.final_test_loss = res.test_losses.back().second;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.manifest = json{
        {"software", {{"name", "lpqc"}, {"version", kVersion}}},
        {"config", config::to_json(cfg)},
        {"seeds",
         {{"experiment", cfg.seed},
          {"dataset", cfg.dataset.seed},
          {"generator_init", init_seed},
          {"streams",
           {{"split", kSplitStream}, {"train", kTrainStream}, {"eval", kEvalStream}}},
          {"rng", "mt19937_64 seeded by splitmix64(seed, stream)"}}},
        {"split", {{"train", train.size()}, {"test", res.test.size()}, {"eval", n_eval}}},
        {"epochs", std::move(epochs)},
        {"final",
         {{"train_loss", res.train_losses.back()},
          {"test_loss", res.final_test_loss},
          {"num_weights", w.size()}}},
        {"wall_clock_seconds", secs}};
    return res;
}

TrainResult cmd_train(const config::ExperimentConfig &cfg, std::ostream &log) {
    TrainResult res = run_training(cfg, &log);
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    open_out((dir / "manifest.json").string()) << res.manifest.dump(2) << '\n';
    {
        auto out = open_out((dir / "losses.csv").string());
        out.precision(17);
        out << "epoch,train_loss,test_loss\n";
        std::size_t t = 0;
        for (std::size_t e = 0; e < res.train_losses.size(); ++e) {
            out << e + 1 << ',' << res.train_losses[e] << ',';
            if (t < res.test_losses.size() &&
                res.test_losses[t].first == static_cast<int>(e + 1)) {
                out << res.test_losses[t++].second;
            }
            out << '\n';
        }
    }
    {
        auto out = open_out((dir / "checkpoint.bin").string(), true);
        res.generator->save(out);
    }
    data::save_ensemble((dir / "generated.lpqe").string(),
                        data::make_mixed_ensemble(res.generated));
    data::save_ensemble((dir / "test.lpqe").string(),
                        data::make_mixed_ensemble(res.test));
    log << "final test D_Wass " << res.final_test_loss << '\n';
    return res;
}

std::vector<GradnormRow> cmd_gradnorm(const GradnormRequest &req,
                                      std::ostream *progress) {
    LPQC_REQUIRE(!req.families.empty() && !req.n_list.empty() && !req.L_list.empty(),
                 ConfigError, "gradnorm: families, n and L lists must be nonempty");
    LPQC_REQUIRE(req.reference >= 4 && req.reference % 4 == 0, ConfigError,
                 "gradnorm: reference size must be a positive multiple of 4");
    std::vector<GradnormRow> rows;
    for (const auto &fam : req.families) {
        const grad::BenchFamily family = grad::bench_family_from_string(fam);
        for (int n : req.n_list) {
            const auto reference =
                data::gen_multicluster(n, req.m, req.reference, req.seed);
            for (int L : req.L_list) {
                grad::GradNormConfig cfg;
                cfg.family = family;
                cfg.layout = {n, req.m, L};
                cfg.trials = req.trials;
                cfg.batch = req.batch;
                cfg.seed = req.seed;
                const auto r = grad::grad_norm_benchmark(cfg, reference);
                rows.push_back({fam, n, req.m, L, req.trials, r.mean, r.stddev, req.seed});
                if (progress != nullptr) {
                    *progress << fam << " n=" << n << " L=" << L << " mean " << r.mean
                              << '\n';
                }
            }
        }
    }
    return rows;
}

void write_gradnorm_csv(std::ostream &out, const std::vector<GradnormRow> &rows) {
    out.precision(17);
    out << "family,n,m,L,trials,mean_sq_grad_norm,std,seed\n";
    for (const auto &r : rows) {
        out << r.family << ',' << r.n << ',' << r.m << ',' << r.L << ',' << r.trials
            << ',' << r.mean << ',' << r.stddev << ',' << r.seed << '\n';
    }
}

CodecReport cmd_encode(const std::string &molecules_path,
                       const std::string &context_path,
                       const std::string &out_path, bool store_count,
                       std::ostream &log) {
    std::ifstream ctx_in(context_path);
    if (!ctx_in) {
        throw ConfigError("cannot open context file '" + context_path + "'");
    }
    const data::NormalizationContext ctx = data::read_context(ctx_in);
    std::ifstream in(molecules_path);
    if (!in) {
        throw DataError("cannot open '" + molecules_path + "'");
    }
    const auto mols = data::read_molecules(in);
    CodecReport rep;
    std::vector<CVector> states;
    for (std::size_t k = 0; k < mols.size(); ++k) {
        try {
            states.push_back(data::encode_molecule(mols[k], ctx, store_count).amplitudes());
            ++rep.ok;
        } catch (const Error &e) {
            log << "record " << k << ": " << e.what() << '\n';
            ++rep.failed;
        }
    }
    if (states.empty()) {
        throw DataError("encode: no molecule could be encoded");
    }
    data::save_ensemble(out_path, data::make_pure_ensemble(std::move(states)));
    return rep;
}

CodecReport cmd_decode(const DecodeRequest &req, std::ostream &log) {
    std::ifstream ctx_in(req.context_path);
    if (!ctx_in) {
        throw ConfigError("cannot open context file '" + req.context_path + "'");
    }
    const data::NormalizationContext ctx = data::read_context(ctx_in);
    const data::Ensemble ens = data::load_ensemble(req.ensemble_path);
    if (ens.mixed || ens.n_data != 7) {
        throw DataError("decode: expected a pure 7-qubit ensemble");
    }
    std::vector<data::MoleculeRecord> mols;
    std::vector<data::MolecularGraph> graphs;
    CodecReport rep;
    for (std::size_t k = 0; k < ens.pure.size(); ++k) {
        try {
            const auto mol =
                data::decode_state(qcore::StateVector(ens.pure[k], 7), ctx, req.options);
            if (!req.graphs_path.empty()) {
                graphs.push_back(data::complete_valences(data::infer_bonds(mol)));
            }
            mols.push_back(mol);
            ++rep.ok;
        } catch (const Error &e) {
            log << "record " << k << ": " << e.what() << '\n';
            ++rep.failed;
        }
    }
    {
        auto out = open_out(req.out_path);
        data::write_molecules(out, mols);
    }
    if (!req.graphs_path.empty()) {
        auto out = open_out(req.graphs_path);
        for (std::size_t k = 0; k < graphs.size(); ++k) {
            data::write_graph(out, graphs[k], k);
        }
    }
    return rep;
}

json cmd_eval(const std::string &generated_path, const std::string &target_path,
              const std::string &points_path) {
    const auto gen = data::load_ensemble(generated_path).density_matrices();
    const auto tgt = data::load_ensemble(target_path).density_matrices();
    if (gen.front().dim() != tgt.front().dim()) {
        throw ShapeError("eval: ensembles live on different register sizes");
    }
    auto mean_purity = [](const std::vector<DensityMatrix> &xs) {
        double s = 0.0;
        for (const auto &x : xs) {
            s += qcore::purity(x);
        }
        return s / static_cast<double>(xs.size());
    };
    json out{{"wasserstein", ot::wasserstein_loss(gen, tgt)},
             {"mean_purity_generated", mean_purity(gen)},
             {"mean_purity_target", mean_purity(tgt)},
             {"count_generated", gen.size()},
             {"count_target", tgt.size()}};
    if (!points_path.empty()) {
        std::vector<RVector> vecs;
        for (const auto &x : gen) {
            vecs.push_back(qcore::dm_to_real_vector(x));
        }
        for (const auto &x : tgt) {
            vecs.push_back(qcore::dm_to_real_vector(x));
        }
        if (vecs.size() >= 3) {
            const auto pca = data::pca_project(vecs, 2);
            auto f = open_out(points_path);
            f.precision(17);
            f << "set,index,pc1,pc2\n";
            for (std::size_t k = 0; k < vecs.size(); ++k) {
                const bool is_gen = k < gen.size();
                f << (is_gen ? "generated" : "target") << ','
                  << (is_gen ? k : k - gen.size()) << ','
                  << pca.points(static_cast<Eigen::Index>(k), 0) << ','
                  << pca.points(static_cast<Eigen::Index>(k), 1) << '\n';
            }
            out["pca_rank_deficient"] = pca.rank_deficient;
        }
    }
    return out;
}

void cmd_gen_dataset(int n, int m, int count, std::uint64_t seed, double scale,
                     const std::string &out_path) {
    data::save_ensemble(out_path, data::make_mixed_ensemble(
                                      data::gen_multicluster(n, m, count, seed, scale)));
}

json cmd_impe(const ImpeRequest &req, std::ostream *progress) {
    req.config.validate();
    std::vector<CVector> targets;
    if (req.targets_path.empty()) {
        for (const auto &rho : data::gen_multicluster(req.config.n_data, 0,
                                                      req.target_count, req.seed)) {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.entries());
            targets.push_back(es.eigenvectors().col(es.eigenvectors().cols() - 1));
        }
    } else {
        const data::Ensemble e = data::load_ensemble(req.targets_path);
        if (e.mixed || e.n_data != req.config.n_data) {
            throw DataError("impe: targets must be pure states on the data register");
        }
        targets = e.pure;
    }
    const auto res = impe::impe_train(req.config, targets, req.seed);
    json cycles = json::array();
    for (std::size_t t = 0; t < res.history.size(); ++t) {
        const auto &h = res.history[t];
        cycles.push_back({{"cycle", t},
                          {"initial_loss", h.initial_loss},
                          {"final_loss", h.final_loss},
                          {"epoch_losses", h.epoch_losses}});
        if (progress != nullptr) {
            *progress << "cycle " << t << " " << h.initial_loss << " -> " << h.final_loss
                      << '\n';
        }
    }
    const auto &c = req.config;
    return json{{"config",
                 {{"n_data", c.n_data},
                  {"n_aux", c.n_aux},
                  {"layers", c.layers},
                  {"cycles", c.cycles},
                  {"batch", c.batch},
                  {"epochs_per_cycle", c.epochs_per_cycle},
                  {"lr", c.lr}}},
                {"seed", req.seed},
                {"targets", targets.size()},
                {"cycles", std::move(cycles)}};
}

json deterministic_part(const json &manifest) {
    json j = manifest;
    j.erase("wall_clock_seconds");
    return j;
}

} // namespace lpqc::cli
