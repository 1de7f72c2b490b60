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
#include <string>

#include "json.hpp"

#include "lpqc/generators.hpp"

namespace lpqc::config {

struct DatasetConfig {
    std::string task = "multicluster"; // or "ensemble-file"
    int count = 2048;
    std::uint64_t seed = 1;
    double scale = 0.05;
    std::string path; // ensemble file for task "ensemble-file"
};

struct OptimizerConfig {
    double lr = 1e-3;
    int batch = 128;
    int epochs = 500;
    double lambda = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct EvalConfig {
    int samples = 256; // generated and test states per evaluation
    int stride = 1;    // evaluate every `stride` epochs (and the last one)
};

struct ExperimentConfig {
    DatasetConfig dataset;
    generators::GeneratorConfig generator;
    OptimizerConfig optimizer;
    EvalConfig eval;
    std::uint64_t seed = 0;
    std::string output_dir = "run";

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

ExperimentConfig default_config();

/// Parses a JSON document; unknown keys and type errors raise ConfigError
/// with the field path (and line/column for syntax errors).
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::string &path);

/// Every field, defaults included.
nlohmann::json to_json(const ExperimentConfig &cfg);

} // namespace lpqc::config
