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

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lpqc/commands.hpp"
#include "lpqc/error.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void write_json(const std::string &path, const nlohmann::json &j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw lpqc::Error("cannot open '" + path + "' for writing");
    }
    out << j.dump(2) << '\n';
}

} // namespace

int main(int argc, char **argv) {
    using namespace lpqc;
    CLI::App app{"Latent-conditioned quantum circuit ensembles"};
    app.set_version_flag("--version", std::string(cli::kVersion));
    app.require_subcommand(1);

    // train
    auto *train = app.add_subcommand("train", "train a generator on a dataset");
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> epochs_override;
    std::string outdir_override;
    train->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    train->add_option("--seed", seed_override, "override the experiment seed");
    train->add_option("--epochs", epochs_override, "override optimizer.epochs");
    train->add_option("-o,--output", outdir_override, "override output_dir");

    // config
    auto *show = app.add_subcommand("config", "print the default resolved config");

    // gradnorm
    auto *gn = app.add_subcommand("gradnorm", "gradient-norm benchmark (CSV)");
    cli::GradnormRequest greq;
    greq.families = {"no-latent-uniform", "rd", "lpqc-gauss-linear", "lpqc-gauss-tanh"};
    greq.n_list = {4};
    greq.L_list = {10};
    std::string gn_out;
    gn->add_option("--families", greq.families, "benchmark families")->delimiter(',');
    gn->add_option("--n", greq.n_list, "data qubit counts")->delimiter(',');
    gn->add_option("--L", greq.L_list, "layer counts")->delimiter(',');
    gn->add_option("--m", greq.m, "ancilla qubits");
    gn->add_option("--trials", greq.trials, "trials per point");
    gn->add_option("--batch", greq.batch, "generated samples per trial");
    gn->add_option("--reference", greq.reference, "reference batch size");
    gn->add_option("--seed", greq.seed, "seed");
    gn->add_option("-o,--out", gn_out, "CSV path (default stdout)");

    // encode
    auto *enc = app.add_subcommand("encode", "molecule file -> pure ensemble");
    std::string mol_path;
    std::string ctx_path;
    std::string enc_out;
    bool store_count = false;
    enc->add_option("--molecules", mol_path, "molecule text file")->required();
    enc->add_option("--context", ctx_path, "normalisation context (JSON)")->required();
    enc->add_option("-o,--out", enc_out, "output ensemble")->required();
    enc->add_flag("--store-count", store_count, "store m in the last amplitude");

    // decode
    auto *dec = app.add_subcommand("decode", "pure ensemble -> molecules");
    cli::DecodeRequest dreq;
    std::string scale = "strict1x";
    std::optional<int> m_override;
    dec->add_option("--ensemble", dreq.ensemble_path, "7-qubit pure ensemble")->required();
    dec->add_option("--context", dreq.context_path, "normalisation context")->required();
    dec->add_option("-o,--out", dreq.out_path, "molecule text output")->required();
    dec->add_option("--graphs", dreq.graphs_path, "bond-order listing output");
    dec->add_option("--scale", scale, "paper2x or strict1x");
    dec->add_option("--atoms", m_override, "atom count (skips thresholding)");
    dec->add_option("--tau", dreq.options.tau, "occupancy threshold");
    dec->add_flag("--count-slot", dreq.options.count_slot,
                  "states were encoded with --store-count");

    // eval
    auto *ev = app.add_subcommand("eval", "compare two ensembles");
    std::string gen_path;
    std::string tgt_path;
    std::string ev_out;
    std::string points;
    ev->add_option("--generated", gen_path, "generated ensemble")->required();
    ev->add_option("--target", tgt_path, "target ensemble")->required();
    ev->add_option("-o,--out", ev_out, "metrics JSON (default stdout)");
    ev->add_option("--points", points, "PCA point CSV");

    // gen-dataset
    auto *gd = app.add_subcommand("gen-dataset", "write a multi-cluster ensemble");
    int gd_n = 4;
    int gd_m = 2;
    int gd_count = 2048;
    std::uint64_t gd_seed = 1;
    double gd_scale = 0.05;
    std::string gd_out;
    gd->add_option("--n", gd_n, "data qubits");
    gd->add_option("--m", gd_m, "ancilla qubits");
    gd->add_option("--count", gd_count, "states (multiple of 4)");
    gd->add_option("--seed", gd_seed, "seed");
    gd->add_option("--scale", gd_scale, "perturbation angle std");
    gd->add_option("-o,--out", gd_out, "output ensemble")->required();

    // impe
    auto *im = app.add_subcommand("impe", "train the projected-ensemble baseline");
    cli::ImpeRequest ireq;
    ireq.config.n_data = 2;
    ireq.config.n_aux = 1;
    ireq.config.layers = 2;
    ireq.config.cycles = 2;
    ireq.config.epochs_per_cycle = 200;
    std::string im_out;
    im->add_option("--n-data", ireq.config.n_data, "data qubits");
    im->add_option("--n-aux", ireq.config.n_aux, "auxiliary qubits");
    im->add_option("--layers", ireq.config.layers, "layers per cycle");
    im->add_option("--cycles", ireq.config.cycles, "cycles");
    im->add_option("--epochs", ireq.config.epochs_per_cycle, "epochs per cycle");
    im->add_option("--batch", ireq.config.batch, "batch size (0 = all)");
    im->add_option("--lr", ireq.config.lr, "Adam learning rate");
    im->add_option("--targets", ireq.targets_path, "pure target ensemble");
    im->add_option("--count", ireq.target_count, "multi-cluster targets if no file");
    im->add_option("--seed", ireq.seed, "seed");
    im->add_option("-o,--out", im_out, "history JSON (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            config::ExperimentConfig cfg = config::load_config(config_path);
            if (seed_override) {
                cfg.seed = *seed_override;
            }
            if (epochs_override) {
                cfg.optimizer.epochs = *epochs_override;
            }
            if (!outdir_override.empty()) {
                cfg.output_dir = outdir_override;
            }
            cfg.validate();
            cli::cmd_train(cfg, std::cerr);
        } else if (*show) {
            std::cout << config::to_json(config::default_config()).dump(2) << '\n';
        } else if (*gn) {
            const auto rows = cli::cmd_gradnorm(greq, &std::cerr);
            if (gn_out.empty()) {
                cli::write_gradnorm_csv(std::cout, rows);
            } else {
                std::ofstream out(gn_out);
                if (!out) {
                    throw Error("cannot open '" + gn_out + "' for writing");
                }
                cli::write_gradnorm_csv(out, rows);
            }
        } else if (*enc) {
            const auto rep = cli::cmd_encode(mol_path, ctx_path, enc_out, store_count,
                                             std::cerr);
            std::cerr << "encoded " << rep.ok << ", failed " << rep.failed << '\n';
        } else if (*dec) {
            dreq.options.scale = data::scale_mode_from_string(scale);
            dreq.options.m_override = m_override;
            const auto rep = cli::cmd_decode(dreq, std::cerr);
            std::cerr << "decoded " << rep.ok << ", failed " << rep.failed << '\n';
        } else if (*ev) {
            write_json(ev_out, cli::cmd_eval(gen_path, tgt_path, points));
        } else if (*gd) {
            cli::cmd_gen_dataset(gd_n, gd_m, gd_count, gd_seed, gd_scale, gd_out);
        } else if (*im) {
            write_json(im_out, cli::cmd_impe(ireq, &std::cerr));
        }
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
