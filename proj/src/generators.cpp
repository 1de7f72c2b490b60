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

#include "lpqc/generators.hpp"

#include <cmath>
#include <ostream>

#include "lpqc/binio.hpp"
#include "lpqc/error.hpp"
#include "lpqc/grad.hpp"
#include "lpqc/otloss.hpp"

namespace lpqc::generators {

std::string to_string(Family f) {
    switch (f) {
    case Family::Lpqc:
        return "lpqc";
    case Family::NoLatent:
        return "no-latent";
    case Family::Rd:
        return "rd";
    case Family::Lmlp:
        return "lmlp";
    }
    return "?";
}

Family family_from_string(const std::string &s) {
    for (auto f : {Family::Lpqc, Family::NoLatent, Family::Rd, Family::Lmlp}) {
        if (to_string(f) == s) {
            return f;
        }
    }
    throw ConfigError("unknown generator family '" + s + "'");
}

void GeneratorConfig::validate() const {
    layout.validate();
    mlp.validate();
    LPQC_REQUIRE(experts >= 1, ConfigError, "generator: experts must be >= 1");
    LPQC_REQUIRE(prior_modes >= 1, ConfigError, "generator: prior modes must be >= 1");
    LPQC_REQUIRE(rd_modes >= 1, ConfigError, "generator: rd modes must be >= 1");
    if (family == Family::Rd) {
        LPQC_REQUIRE(layout.layers % 2 == 0, ConfigError,
                     "generator: rd needs an even layer count");
    }
}

namespace {

/// Flat checkpoint for the non-MoE families: "LPQB", u16 version, i32
/// family, u64 count, f64 values.
void save_flat(std::ostream &out, Family f, const std::vector<double> &w) {
    binio::put_magic(out, "LPQB");
    binio::put<std::uint16_t>(out, 1);
    binio::put<std::int32_t>(out, static_cast<std::int32_t>(f));
    binio::put<std::uint64_t>(out, w.size());
    for (double v : w) {
        binio::put<double>(out, v);
    }
}

std::vector<DensityMatrix> states_for(const qcore::QubitLayout &layout,
                                      const RMatrix &theta) {
    return grad::circuit_batch(layout, theta).rho;
}

class LpqcGenerator final : public Generator {
  public:
    LpqcGenerator(const GeneratorConfig &cfg, std::uint64_t seed) {
        Rng rng(seed, 0x494e4954ULL);
        gen_ = netgen::make_generator(cfg.layout, cfg.mlp, cfg.experts, rng);
        prior_ = priors::make_prior(cfg.prior, cfg.mlp.d_in, cfg.prior_modes,
                                    splitmix64(seed ^ 0x50524fULL));
    }

    [[nodiscard]] std::vector<double> weights() const override {
        return gen_.flatten();
    }
    void set_weights(const std::vector<double> &w) override { gen_.unflatten(w); }

    StepResult loss_and_grad(int batch, Rng &rng,
                             const std::vector<DensityMatrix> &targets,
                             double lambda) override {
        const RMatrix Z = priors::sample_prior(prior_, rng, batch);
        const grad::FullResult r = grad::backward_full(gen_, Z, targets, lambda);
        return {r.loss, r.wasserstein, r.gradient};
    }

    [[nodiscard]] std::vector<DensityMatrix> generate(int count,
                                                      Rng &rng) const override {
        const RMatrix Z = priors::sample_prior(prior_, rng, count);
        RMatrix theta(static_cast<Eigen::Index>(gen_.layout.num_params()), count);
        for (int c = 0; c < count; ++c) {
            theta.col(c) = netgen::moe_parameters(gen_, Z.col(c));
        }
        return states_for(gen_.layout, theta);
    }

    void save(std::ostream &out) const override {
        netgen::write_checkpoint(out, gen_);
    }

    [[nodiscard]] const netgen::GeneratorWeights &moe() const { return gen_; }

  private:
    netgen::GeneratorWeights gen_;
    priors::LatentPriorSpec prior_;
};

class NoLatentGenerator final : public Generator {
  public:
    explicit NoLatentGenerator(const GeneratorConfig &cfg) : layout_(cfg.layout) {
        const auto K = static_cast<Eigen::Index>(cfg.layout.num_params());
        spec_.mean = RVector::Zero(K);
        spec_.log_std = RVector::Zero(K);
    }

    [[nodiscard]] std::vector<double> weights() const override {
        std::vector<double> w(spec_.mean.data(), spec_.mean.data() + spec_.mean.size());
        w.insert(w.end(), spec_.log_std.data(),
                 spec_.log_std.data() + spec_.log_std.size());
        return w;
    }

    void set_weights(const std::vector<double> &w) override {
        const auto K = spec_.mean.size();
        LPQC_REQUIRE(static_cast<Eigen::Index>(w.size()) == 2 * K, ShapeError,
                     "no-latent: weight count mismatch");
        spec_.mean = Eigen::Map<const RVector>(w.data(), K);
        spec_.log_std = Eigen::Map<const RVector>(w.data() + K, K);
    }

    StepResult loss_and_grad(int batch, Rng &rng,
                             const std::vector<DensityMatrix> &targets,
                             double) override {
        const netgen::NoLatentDraw d = netgen::sample_no_latent(spec_, rng, batch);
        const grad::CircuitBatch cb = grad::circuit_batch(layout_, d.theta);
        const grad::EnsembleCotangents ct =
            grad::wasserstein_cotangents(cb.rho, targets);
        const RMatrix dtheta =
            grad::circuit_batch_backward(layout_, d.theta, cb, ct.cotangents);
        const RVector sd = spec_.log_std.array().exp();
        const RVector dmean = dtheta.rowwise().sum();
        const RVector dlog =
            (dtheta.array() * d.eps.array()).rowwise().sum().matrix().cwiseProduct(sd);
        StepResult r{ct.loss, ct.loss, {}};
        r.gradient.assign(dmean.data(), dmean.data() + dmean.size());
        r.gradient.insert(r.gradient.end(), dlog.data(), dlog.data() + dlog.size());
        return r;
    }

    [[nodiscard]] std::vector<DensityMatrix> generate(int count,
                                                      Rng &rng) const override {
        return states_for(layout_, netgen::sample_no_latent(spec_, rng, count).theta);
    }

    void save(std::ostream &out) const override {
        save_flat(out, Family::NoLatent, weights());
    }

  private:
    qcore::QubitLayout layout_;
    netgen::NoLatentSpec spec_;
};

class RdGenerator final : public Generator {
  public:
    RdGenerator(const GeneratorConfig &cfg, std::uint64_t seed)
        : spec_(netgen::make_rd(cfg.layout, cfg.rd_modes,
                                splitmix64(seed ^ 0x5244ULL))) {}

    [[nodiscard]] std::vector<double> weights() const override {
        return {spec_.trainable.data(), spec_.trainable.data() + spec_.trainable.size()};
    }

    void set_weights(const std::vector<double> &w) override {
        LPQC_REQUIRE(static_cast<Eigen::Index>(w.size()) == spec_.trainable.size(),
                     ShapeError, "rd: weight count mismatch");
        spec_.trainable = Eigen::Map<const RVector>(w.data(), spec_.trainable.size());
    }

    StepResult loss_and_grad(int batch, Rng &rng,
                             const std::vector<DensityMatrix> &targets,
                             double) override {
        const RMatrix theta = netgen::rd_parameters_batch(spec_, rng, batch);
        const grad::CircuitBatch cb = grad::circuit_batch(spec_.layout, theta);
        const grad::EnsembleCotangents ct =
            grad::wasserstein_cotangents(cb.rho, targets);
        const RMatrix dtheta =
            grad::circuit_batch_backward(spec_.layout, theta, cb, ct.cotangents);
        const RVector g = dtheta.bottomRows(spec_.trainable.size()).rowwise().sum();
        return {ct.loss, ct.loss, {g.data(), g.data() + g.size()}};
    }

    [[nodiscard]] std::vector<DensityMatrix> generate(int count,
                                                      Rng &rng) const override {
        return states_for(spec_.layout, netgen::rd_parameters_batch(spec_, rng, count));
    }

    void save(std::ostream &out) const override {
        save_flat(out, Family::Rd, weights());
    }

  private:
    netgen::RdSpec spec_;
};

class LmlpGenerator final : public Generator {
  public:
    LmlpGenerator(const GeneratorConfig &cfg, std::uint64_t seed) {
        Rng rng(seed, 0x494e4954ULL);
        spec_ = netgen::make_lmlp(cfg.layout.n_data, cfg.layout.m_anc, cfg.mlp, rng);
        prior_ = priors::make_prior(cfg.prior, cfg.mlp.d_in, cfg.prior_modes,
                                    splitmix64(seed ^ 0x50524fULL));
    }

    [[nodiscard]] std::vector<double> weights() const override {
        std::vector<double> w;
        spec_.mlp.params.append_to(w);
        return w;
    }

    void set_weights(const std::vector<double> &w) override {
        LPQC_REQUIRE(w.size() == spec_.mlp.params.size(), ShapeError,
                     "lmlp: weight count mismatch");
        std::size_t pos = 0;
        spec_.mlp.params.read_from(w, pos);
    }

    StepResult loss_and_grad(int batch, Rng &rng,
                             const std::vector<DensityMatrix> &targets,
                             double) override {
        const RMatrix Z = priors::sample_prior(prior_, rng, batch);
        netgen::MlpTape tape;
        const RMatrix raw = netgen::mlp_forward_batch(spec_.mlp, Z, &tape);
        std::vector<CMatrix> A;
        std::vector<DensityMatrix> rho;
        for (int c = 0; c < batch; ++c) {
            A.push_back(netgen::lmlp_output_matrix(raw.col(c), spec_.n_data,
                                                   spec_.mixed));
            rho.push_back(netgen::normalize_gram(A.back()));
        }
        const grad::EnsembleCotangents ct = grad::wasserstein_cotangents(rho, targets);
        RMatrix draw(raw.rows(), raw.cols());
        for (int c = 0; c < batch; ++c) {
            const auto k = static_cast<std::size_t>(c);
            const CMatrix &Ak = A[k];
            const CMatrix &G = ct.cotangents[k];
            const double t = (Ak * Ak.adjoint()).trace().real();
            const cplx gr = (G * rho[k].entries()).trace();
            const CMatrix W = (Ak.adjoint() * G - gr * Ak.adjoint()) / t;
            const Eigen::Index rows = Ak.rows();
            const Eigen::Index cols = Ak.cols();
            const Eigen::Index half = rows * cols;
            for (Eigen::Index r = 0; r < rows; ++r) {
                for (Eigen::Index s = 0; s < cols; ++s) {
                    draw(r * cols + s, c) = 2.0 * W(s, r).real();
                    draw(half + r * cols + s, c) = -2.0 * W(s, r).imag();
                }
            }
        }
        netgen::MlpParams g = spec_.mlp.params.zeros_like();
        netgen::mlp_backward(spec_.mlp, tape, draw, g);
        StepResult res{ct.loss, ct.loss, {}};
        g.append_to(res.gradient);
        return res;
    }

    [[nodiscard]] std::vector<DensityMatrix> generate(int count,
                                                      Rng &rng) const override {
        const RMatrix Z = priors::sample_prior(prior_, rng, count);
        std::vector<DensityMatrix> out;
        for (int c = 0; c < count; ++c) {
            out.push_back(netgen::lmlp_state(spec_, Z.col(c)));
        }
        return out;
    }

    void save(std::ostream &out) const override {
        save_flat(out, Family::Lmlp, weights());
    }

  private:
    netgen::LmlpSpec spec_;
    priors::LatentPriorSpec prior_;
};

} // namespace

std::unique_ptr<Generator> make_generator(const GeneratorConfig &cfg,
                                          std::uint64_t init_seed) {
    cfg.validate();
    switch (cfg.family) {
    case Family::Lpqc:
        return std::make_unique<LpqcGenerator>(cfg, init_seed);
    case Family::NoLatent:
        return std::make_unique<NoLatentGenerator>(cfg);
    case Family::Rd:
        return std::make_unique<RdGenerator>(cfg, init_seed);
    case Family::Lmlp:
        return std::make_unique<LmlpGenerator>(cfg, init_seed);
    }
    throw ConfigError("unknown generator family");
}

const netgen::GeneratorWeights *lpqc_weights(const Generator &g) {
    const auto *p = dynamic_cast<const LpqcGenerator *>(&g);
    return p == nullptr ? nullptr : &p->moe();
}

} // namespace lpqc::generators
