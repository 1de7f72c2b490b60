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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lpqc/config.hpp"
#include "lpqc/generators.hpp"
#include "lpqc/grad.hpp"
#include "lpqc/impe.hpp"
#include "lpqc/molecule.hpp"

namespace lpqc::cli {

inline constexpr const char *kVersion = "0.1.0";

struct TrainResult {
    nlohmann::json manifest;
    std::vector<double> train_losses;            // one per epoch
    std::vector<std::pair<int, double>> test_losses; // (epoch, D_Wass)
    double final_test_loss = 0.0;
    std::unique_ptr<generators::Generator> generator;
    std::vector<qcore::DensityMatrix> generated; // last evaluation sample
    std::vector<qcore::DensityMatrix> test;      // full test half
};

/**
 * Builds or loads the dataset, splits it 50/50, trains with Adam and logs
 * the test D_Wass on a fixed subset of eval.samples test states against
 * eval.samples generated states drawn with fixed evaluation noise.
 * The manifest holds everything except wall-clock time deterministically.
 */
TrainResult run_training(const config::ExperimentConfig &cfg,
                         std::ostream *progress = nullptr);

/// run_training plus manifest.json, losses.csv, checkpoint.bin,
/// generated.lpqe and test.lpqe in cfg.output_dir.
TrainResult cmd_train(const config::ExperimentConfig &cfg, std::ostream &log);

struct GradnormRow {
    std::string family;
    int n = 0;
    int m = 0;
    int L = 0;
    int trials = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::uint64_t seed = 0;
};

struct GradnormRequest {
    std::vector<std::string> families;
    std::vector<int> n_list;
    std::vector<int> L_list;
    int m = 0;
    int trials = 128;
    int batch = 128;
    int reference = 32;
    std::uint64_t seed = 0;
};

/// One row per (family, n, L). The reference batch holds `reference`
/// multi-cluster states drawn with (n, m, seed).
std::vector<GradnormRow> cmd_gradnorm(const GradnormRequest &req,
                                      std::ostream *progress = nullptr);
void write_gradnorm_csv(std::ostream &out, const std::vector<GradnormRow> &rows);

struct CodecReport {
    std::size_t ok = 0;
    std::size_t failed = 0;
};

CodecReport cmd_encode(const std::string &molecules_path,
                       const std::string &context_path,
                       const std::string &out_path, bool store_count,
                       std::ostream &log);

struct DecodeRequest {
    std::string ensemble_path;
    std::string context_path;
    std::string out_path;
    std::string graphs_path; // empty: no graph output
    data::DecodeOptions options;
};

CodecReport cmd_decode(const DecodeRequest &req, std::ostream &log);

/// D_Wass, mean purities and (when points_path is set) a 2-D PCA of the
/// real vectorisations of both ensembles.
nlohmann::json cmd_eval(const std::string &generated_path,
                        const std::string &target_path,
                        const std::string &points_path);

void cmd_gen_dataset(int n, int m, int count, std::uint64_t seed, double scale,
                     const std::string &out_path);

struct ImpeRequest {
    impe::ImpeConfig config;
    std::string targets_path; // pure ensemble; empty: multi-cluster states
    int target_count = 16;
    std::uint64_t seed = 0;
};

nlohmann::json cmd_impe(const ImpeRequest &req, std::ostream *progress = nullptr);

/// Manifest without wall-clock fields, for bitwise replay comparisons.
nlohmann::json deterministic_part(const nlohmann::json &manifest);

} // namespace lpqc::cli
