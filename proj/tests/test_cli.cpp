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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lpqc/commands.hpp"
#include "lpqc/data.hpp"
#include "lpqc/error.hpp"
#include "lpqc/molecule.hpp"
#include "oracles.hpp"

using namespace lpqc;
namespace fs = std::filesystem;

namespace {

const char *kSmallConfig = R"({
  "task": "multicluster",
  "dataset": {"count": 64, "seed": 3, "scale": 0.05},
  "layout": {"n": 2, "m": 1, "L": 2},
  "generator": {"family": "lpqc", "experts": 1, "latent_dim": 2, "hidden_dim": 8,
                "hidden_layers": 1, "activation": "tanh",
                "prior": {"family": "uniform", "modes": 2}},
  "optimizer": {"lr": 0.01, "batch": 16, "epochs": 50, "lambda": 0.01},
  "eval": {"samples": 16, "stride": 1},
  "seed": 7
})";

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("lpqc_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string &args) {
    const std::string cmd = std::string(LPQC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config parsing", "[cli]") {
    const auto cfg = config::parse_config(kSmallConfig);
    CHECK(cfg.generator.layout.n_data == 2);
    CHECK(cfg.generator.layout.m_anc == 1);
    CHECK(cfg.generator.layout.layers == 2);
    CHECK(cfg.optimizer.epochs == 50);
    CHECK(cfg.seed == 7);

    SECTION("round trip through JSON") {
        const auto j = config::to_json(cfg);
        CHECK(config::to_json(config::parse_config(j.dump())) == j);
        const auto d = config::to_json(config::default_config());
        CHECK(config::to_json(config::parse_config(d.dump())) == d);
    }
    SECTION("errors") {
        CHECK_THROWS_AS(config::parse_config("{\"bogus\": 1}"), ConfigError);
        CHECK_THROWS_AS(config::parse_config("{\"seed\": \"x\"}"), ConfigError);
        CHECK_THROWS_AS(config::parse_config("{ not json"), ConfigError);
        CHECK_THROWS_AS(config::parse_config(R"({"optimizer": {"lr": -1}})"), ConfigError);
        CHECK_THROWS_AS(config::load_config("/nonexistent/cfg.json"), ConfigError);
    }
    SECTION("shipped configs load") {
        for (const auto &e : fs::directory_iterator(LPQC_CONFIG_DIR)) {
            INFO(e.path().string());
            CHECK_NOTHROW(config::load_config(e.path().string()).validate());
        }
    }
}

TEST_CASE("small training run", "[cli]") {
    auto cfg = config::parse_config(kSmallConfig);
    const auto dir = scratch("train");
    cfg.output_dir = dir.string();
    std::ostringstream log;
    const auto res = cli::cmd_train(cfg, log);
    REQUIRE(res.test_losses.size() == 50);
    for (const auto &[epoch, loss] : res.test_losses) {
        CHECK(std::isfinite(loss));
        CHECK(loss >= 0.0);
    }
    CHECK(res.train_losses.size() == 50);
    for (const char *f : {"manifest.json", "losses.csv", "checkpoint.bin", "generated.lpqe",
                          "test.lpqe"}) {
        CHECK(fs::exists(dir / f));
    }
    const auto gen = data::load_ensemble((dir / "generated.lpqe").string());
    CHECK(gen.mixed);
    CHECK(gen.n_data == 2);

    const auto again = cli::run_training(cfg);
    CHECK(cli::deterministic_part(again.manifest) == cli::deterministic_part(res.manifest));
    CHECK(again.generator->weights() == res.generator->weights());

    const auto metrics = cli::cmd_eval((dir / "generated.lpqe").string(),
                                       (dir / "test.lpqe").string(),
                                       (dir / "points.csv").string());
    CHECK(metrics.at("wasserstein").get<double>() >= 0.0);
    CHECK(fs::exists(dir / "points.csv"));
}

TEST_CASE("gradnorm CSV", "[cli]") {
    cli::GradnormRequest req;
    req.families = {"no-latent-uniform", "lpqc-gauss-tanh"};
    req.n_list = {2};
    req.L_list = {1, 2};
    req.m = 1;
    req.trials = 3;
    req.batch = 4;
    req.reference = 4;
    req.seed = 5;
    const auto rows = cli::cmd_gradnorm(req);
    REQUIRE(rows.size() == 4);
    for (const auto &r : rows) {
        CHECK(r.trials == 3);
        CHECK(r.mean > 0.0);
        CHECK(std::isfinite(r.stddev));
    }
    std::ostringstream out;
    cli::write_gradnorm_csv(out, rows);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("family,", 0) == 0);
    int n_lines = 0;
    while (std::getline(in, line)) {
        ++n_lines;
    }
    CHECK(n_lines == 4);
    CHECK(cli::cmd_gradnorm(req).front().mean == rows.front().mean);
}

TEST_CASE("molecule encode and decode commands", "[cli]") {
    const auto dir = scratch("codec");
    data::MoleculeRecord mol;
    mol.atoms = {{data::Element::C, {0.0, 0.0, 0.0}},
                 {data::Element::C, {1.5, 0.0, 0.0}},
                 {data::Element::O, {2.2, 1.2, 0.0}}};
    {
        std::ofstream f(dir / "mols.txt");
        data::write_molecules(f, {mol, mol});
        std::ofstream c(dir / "ctx.json");
        data::write_context(c, data::qm9_context());
    }
    std::ostringstream log;
    const auto enc = cli::cmd_encode((dir / "mols.txt").string(), (dir / "ctx.json").string(),
                                     (dir / "mols.lpqe").string(), false, log);
    CHECK(enc.ok == 2);
    CHECK(enc.failed == 0);
    const auto ens = data::load_ensemble((dir / "mols.lpqe").string());
    CHECK(ens.n_data == 7);
    CHECK_FALSE(ens.mixed);

    cli::DecodeRequest req;
    req.ensemble_path = (dir / "mols.lpqe").string();
    req.context_path = (dir / "ctx.json").string();
    req.out_path = (dir / "back.txt").string();
    req.graphs_path = (dir / "graphs.txt").string();
    const auto dec = cli::cmd_decode(req, log);
    CHECK(dec.ok == 2);
    std::ifstream back(dir / "back.txt");
    const auto mols = data::read_molecules(back);
    REQUIRE(mols.size() == 2);
    REQUIRE(mols[0].atoms.size() == 3);
    CHECK(mols[0].atoms[0].element == data::Element::C);
    CHECK(fs::file_size(dir / "graphs.txt") > 0);
}

TEST_CASE("dataset and IMPE commands", "[cli]") {
    const auto dir = scratch("gen");
    const auto path = (dir / "mc.lpqe").string();
    cli::cmd_gen_dataset(2, 1, 16, 4, 0.05, path);
    const auto ens = data::load_ensemble(path);
    CHECK(ens.size() == 16);
    CHECK(ens.n_data == 2);
    CHECK(ens.mixed);
    CHECK_THROWS(cli::cmd_gen_dataset(2, 1, 15, 4, 0.05, path));

    cli::ImpeRequest req;
    req.config.n_data = 2;
    req.config.n_aux = 1;
    req.config.layers = 1;
    req.config.cycles = 2;
    req.config.epochs_per_cycle = 5;
    req.target_count = 8;
    req.seed = 2;
    const auto out = cli::cmd_impe(req);
    CHECK(out.at("cycles").size() == 2);
    CHECK(out.at("targets").get<int>() == 8);
    CHECK(cli::cmd_impe(req) == out);
}

TEST_CASE("exit codes", "[cli]") {
    const auto dir = scratch("exit");
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("config") == 0);
    {
        std::ofstream(dir / "bad.json") << "{\"bogus\": true}";
    }
    CHECK(run_cli("train -c " + (dir / "bad.json").string()) == 2);
    {
        std::ofstream(dir / "junk.lpqe") << "not an ensemble";
    }
    CHECK(run_cli("eval --generated " + (dir / "junk.lpqe").string() + " --target " +
                  (dir / "junk.lpqe").string()) == 3);
    CHECK(run_cli("gen-dataset --count 8 --n 1 --m 0 -o " + (dir / "ok.lpqe").string()) == 0);
}
