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

#include "lpqc/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "lpqc/error.hpp"

namespace lpqc::config {

using nlohmann::json;

namespace {

/// Typed access to one JSON object with dotted-path error messages.
class Section {
  public:
    Section(const json &j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError("config: '" + where() + "' must be an object");
        }
    }

    void allow(std::initializer_list<const char *> keys) const {
        for (const auto &item : j_.items()) {
            bool known = false;
            for (const char *k : keys) {
                known = known || item.key() == k;
            }
            if (!known) {
                throw ConfigError("config: unknown field '" + field(item.key()) + "'");
            }
        }
    }

    template <typename T> void get(const char *key, T &out) const {
        if (!j_.contains(key)) {
            return;
        }
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception &) {
            throw ConfigError("config: field '" + field(key) + "' has the wrong type");
        }
    }

    [[nodiscard]] bool has(const char *key) const { return j_.contains(key); }
    [[nodiscard]] Section sub(const char *key) const {
        return {j_.at(key), field(key)};
    }

  private:
    [[nodiscard]] std::string where() const { return path_.empty() ? "<root>" : path_; }
    [[nodiscard]] std::string field(const std::string &k) const {
        return path_.empty() ? k : path_ + "." + k;
    }

    const json &j_;
    std::string path_;
};

template <typename F> void wrap(const char *field, F &&f) {
    try {
        f();
    } catch (const ConfigError &e) {
        throw ConfigError(std::string("config: field '") + field + "': " + e.what());
    }
}

} // namespace

void ExperimentConfig::validate() const {
    LPQC_REQUIRE(dataset.task == "multicluster" || dataset.task == "ensemble-file",
                 ConfigError, "config: field 'task' must be multicluster or ensemble-file");
    if (dataset.task == "multicluster") {
        LPQC_REQUIRE(dataset.count >= 8 && dataset.count % 4 == 0, ConfigError,
                     "config: field 'dataset.count' must be a multiple of 4, >= 8");
        LPQC_REQUIRE(dataset.scale >= 0.0, ConfigError,
                     "config: field 'dataset.scale' must be >= 0");
    } else {
        LPQC_REQUIRE(!dataset.path.empty(), ConfigError,
                     "config: field 'dataset.path' is required for ensemble-file");
        LPQC_REQUIRE(std::ifstream(dataset.path).good(), ConfigError,
                     "config: field 'dataset.path': cannot open '" + dataset.path + "'");
    }
    wrap("generator", [&] { generator.validate(); });
    LPQC_REQUIRE(optimizer.lr > 0.0, ConfigError,
                 "config: field 'optimizer.lr' must be positive");
    LPQC_REQUIRE(optimizer.batch >= 1, ConfigError,
                 "config: field 'optimizer.batch' must be >= 1");
    LPQC_REQUIRE(optimizer.epochs >= 1, ConfigError,
                 "config: field 'optimizer.epochs' must be >= 1");
    LPQC_REQUIRE(optimizer.lambda >= 0.0, ConfigError,
                 "config: field 'optimizer.lambda' must be >= 0");
    LPQC_REQUIRE(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 &&
                     optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0 &&
                     optimizer.eps > 0.0,
                 ConfigError, "config: field 'optimizer' has invalid Adam constants");
    LPQC_REQUIRE(eval.samples >= 1, ConfigError,
                 "config: field 'eval.samples' must be >= 1");
    LPQC_REQUIRE(eval.stride >= 1, ConfigError,
                 "config: field 'eval.stride' must be >= 1");
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.generator.layout = {4, 2, 10};
    return c;
}

ExperimentConfig parse_config(const std::string &text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config: syntax error: ") + e.what());
    }
    ExperimentConfig c = default_config();
    const Section top(root, "");
    top.allow({"task", "dataset", "layout", "generator", "optimizer", "eval",
               "seed", "output_dir"});
    top.get("task", c.dataset.task);
    top.get("seed", c.seed);
    top.get("output_dir", c.output_dir);
    if (top.has("dataset")) {
        const Section s = top.sub("dataset");
        s.allow({"count", "seed", "scale", "path"});
        s.get("count", c.dataset.count);
        s.get("seed", c.dataset.seed);
        s.get("scale", c.dataset.scale);
        s.get("path", c.dataset.path);
    }
    if (top.has("layout")) {
        const Section s = top.sub("layout");
        s.allow({"n", "m", "L"});
        s.get("n", c.generator.layout.n_data);
        s.get("m", c.generator.layout.m_anc);
        s.get("L", c.generator.layout.layers);
    }
    if (top.has("generator")) {
        const Section s = top.sub("generator");
        s.allow({"family", "experts", "latent_dim", "hidden_dim", "hidden_layers",
                 "activation", "prior", "rd_modes", "gating"});
        std::string family = generators::to_string(c.generator.family);
        s.get("family", family);
        wrap("generator.family",
             [&] { c.generator.family = generators::family_from_string(family); });
        s.get("experts", c.generator.experts);
        s.get("latent_dim", c.generator.mlp.d_in);
        s.get("hidden_dim", c.generator.mlp.hidden_dim);
        s.get("hidden_layers", c.generator.mlp.hidden_layers);
        std::string act = netgen::to_string(c.generator.mlp.activation);
        s.get("activation", act);
        wrap("generator.activation",
             [&] { c.generator.mlp.activation = netgen::activation_from_string(act); });
        s.get("rd_modes", c.generator.rd_modes);
        if (s.has("gating")) {
            // The gate architecture is fixed; the field is echoed in resolved
            // configs and only checked here.
            const Section gs = s.sub("gating");
            gs.allow({"hidden_dim", "hidden_layers", "activation"});
            int hd = 32;
            int hl = 1;
            std::string ga = "tanh";
            gs.get("hidden_dim", hd);
            gs.get("hidden_layers", hl);
            gs.get("activation", ga);
            LPQC_REQUIRE(hd == 32 && hl == 1 && ga == "tanh", ConfigError,
                         "config: field 'generator.gating' must be MLP(d, 32^(1), E) "
                         "with tanh");
        }
        if (s.has("prior")) {
            const Section p = s.sub("prior");
            p.allow({"family", "modes"});
            std::string pf = priors::to_string(c.generator.prior);
            p.get("family", pf);
            wrap("generator.prior.family",
                 [&] { c.generator.prior = priors::prior_family_from_string(pf); });
            p.get("modes", c.generator.prior_modes);
        }
    }
    if (top.has("optimizer")) {
        const Section s = top.sub("optimizer");
        s.allow({"lr", "batch", "epochs", "lambda", "beta1", "beta2", "eps"});
        s.get("lr", c.optimizer.lr);
        s.get("batch", c.optimizer.batch);
        s.get("epochs", c.optimizer.epochs);
        s.get("lambda", c.optimizer.lambda);
        s.get("beta1", c.optimizer.beta1);
        s.get("beta2", c.optimizer.beta2);
        s.get("eps", c.optimizer.eps);
    }
    if (top.has("eval")) {
        const Section s = top.sub("eval");
        s.allow({"samples", "stride"});
        s.get("samples", c.eval.samples);
        s.get("stride", c.eval.stride);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json to_json(const ExperimentConfig &c) {
    const auto &g = c.generator;
    return json{
        {"task", c.dataset.task},
        {"dataset",
         {{"count", c.dataset.count},
          {"seed", c.dataset.seed},
          {"scale", c.dataset.scale},
          {"path", c.dataset.path}}},
        {"layout", {{"n", g.layout.n_data}, {"m", g.layout.m_anc}, {"L", g.layout.layers}}},
        {"generator",
         {{"family", generators::to_string(g.family)},
          {"experts", g.experts},
          {"latent_dim", g.mlp.d_in},
          {"hidden_dim", g.mlp.hidden_dim},
          {"hidden_layers", g.mlp.hidden_layers},
          {"activation", netgen::to_string(g.mlp.activation)},
          {"prior", {{"family", priors::to_string(g.prior)}, {"modes", g.prior_modes}}},
          {"rd_modes", g.rd_modes},
          {"gating", {{"hidden_dim", 32}, {"hidden_layers", 1}, {"activation", "tanh"}}}}},
        {"optimizer",
         {{"lr", c.optimizer.lr},
          {"batch", c.optimizer.batch},
          {"epochs", c.optimizer.epochs},
          {"lambda", c.optimizer.lambda},
          {"beta1", c.optimizer.beta1},
          {"beta2", c.optimizer.beta2},
          {"eps", c.optimizer.eps}}},
        {"eval", {{"samples", c.eval.samples}, {"stride", c.eval.stride}}},
        {"seed", c.seed},
        {"output_dir", c.output_dir}};
}

} // namespace lpqc::config
