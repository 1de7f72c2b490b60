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

#include "lpqc/netgen.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "lpqc/binio.hpp"
#include "lpqc/error.hpp"

namespace lpqc::netgen {

std::string to_string(Activation a) {
    switch (a) {
    case Activation::Tanh:
        return "tanh";
    case Activation::Relu:
        return "relu";
    case Activation::Gelu:
        return "gelu";
    case Activation::Linear:
        return "linear";
    }
    return "?";
}

Activation activation_from_string(const std::string &s) {
    if (s == "tanh") {
        return Activation::Tanh;
    }
    if (s == "relu") {
        return Activation::Relu;
    }
    if (s == "gelu") {
        return Activation::Gelu;
    }
    if (s == "linear") {
        return Activation::Linear;
    }
    throw ConfigError("unknown activation '" + s + "'");
}

std::vector<int> MlpSpec::layer_dims() const {
    std::vector<int> dims;
    dims.reserve(static_cast<std::size_t>(hidden_layers) + 2);
    dims.push_back(d_in);
    for (int i = 0; i < hidden_layers; ++i) {
        dims.push_back(hidden_dim);
    }
    dims.push_back(d_out);
    return dims;
}

void MlpSpec::validate() const {
    LPQC_REQUIRE(d_in >= 1 && d_out >= 1, ConfigError,
                 "mlp: input and output widths must be positive");
    LPQC_REQUIRE(hidden_layers >= 0, ConfigError,
                 "mlp: hidden layer count must be nonnegative");
    LPQC_REQUIRE(hidden_layers == 0 || hidden_dim >= 1, ConfigError,
                 "mlp: hidden width must be positive");
}

std::size_t MlpParams::size() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < W.size(); ++k) {
        n += static_cast<std::size_t>(W[k].size() + b[k].size());
    }
    return n;
}

MlpParams MlpParams::zeros_like() const {
    MlpParams z;
    for (std::size_t k = 0; k < W.size(); ++k) {
        z.W.push_back(Eigen::MatrixXd::Zero(W[k].rows(), W[k].cols()));
        z.b.push_back(Eigen::VectorXd::Zero(b[k].size()));
    }
    return z;
}

void MlpParams::append_to(std::vector<double> &flat) const {
    for (std::size_t k = 0; k < W.size(); ++k) {
        for (Eigen::Index r = 0; r < W[k].rows(); ++r) {
            for (Eigen::Index c = 0; c < W[k].cols(); ++c) {
                flat.push_back(W[k](r, c));
            }
        }
        for (Eigen::Index r = 0; r < b[k].size(); ++r) {
            flat.push_back(b[k](r));
        }
    }
}

void MlpParams::read_from(const std::vector<double> &flat, std::size_t &pos) {
    LPQC_REQUIRE(pos + size() <= flat.size(), ShapeError,
                 "mlp: flat weight vector too short");
    for (std::size_t k = 0; k < W.size(); ++k) {
        for (Eigen::Index r = 0; r < W[k].rows(); ++r) {
            for (Eigen::Index c = 0; c < W[k].cols(); ++c) {
                W[k](r, c) = flat[pos++];
            }
        }
        for (Eigen::Index r = 0; r < b[k].size(); ++r) {
            b[k](r) = flat[pos++];
        }
    }
}

MlpParams &MlpParams::operator+=(const MlpParams &other) {
    LPQC_REQUIRE(other.W.size() == W.size(), ShapeError,
                 "mlp: parameter shapes differ");
    for (std::size_t k = 0; k < W.size(); ++k) {
        W[k] += other.W[k];
        b[k] += other.b[k];
    }
    return *this;
}

Mlp zero_mlp(const MlpSpec &spec) {
    spec.validate();
    Mlp mlp{spec, {}};
    const auto dims = spec.layer_dims();
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        mlp.params.W.push_back(Eigen::MatrixXd::Zero(dims[k + 1], dims[k]));
        mlp.params.b.push_back(Eigen::VectorXd::Zero(dims[k + 1]));
    }
    return mlp;
}

Mlp make_mlp(const MlpSpec &spec, Rng &rng) {
    Mlp mlp = zero_mlp(spec);
    for (auto &W : mlp.params.W) {
        const double limit =
            std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) {
                W(r, c) = rng.uniform(-limit, limit);
            }
        }
    }
    return mlp;
}

double activate(Activation a, double x) {
    switch (a) {
    case Activation::Tanh:
        return std::tanh(x);
    case Activation::Relu:
        return x > 0.0 ? x : 0.0;
    case Activation::Gelu:
        return 0.5 * x * std::erfc(-x / std::numbers::sqrt2);
    case Activation::Linear:
        return x;
    }
    return x;
}

double activate_derivative(Activation a, double x) {
    switch (a) {
    case Activation::Tanh: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }
    case Activation::Relu:
        return x > 0.0 ? 1.0 : 0.0;
    case Activation::Gelu: {
        const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
        const double pdf =
            std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        return cdf + x * pdf;
    }
    case Activation::Linear:
        return 1.0;
    }
    return 1.0;
}

Eigen::MatrixXd mlp_forward_batch(const Mlp &mlp, const Eigen::MatrixXd &Z,
                                  MlpTape *tape) {
    LPQC_REQUIRE(Z.rows() == mlp.spec.d_in, ShapeError,
                 "mlp: input length does not match d_in");
    const std::size_t layers = mlp.params.W.size();
    if (tape != nullptr) {
        tape->inputs.clear();
        tape->pre.clear();
    }
    Eigen::MatrixXd h = Z;
    for (std::size_t k = 0; k < layers; ++k) {
        Eigen::MatrixXd a = mlp.params.W[k] * h;
        a.colwise() += mlp.params.b[k];
        if (tape != nullptr) {
            tape->inputs.push_back(h);
        }
        if (k + 1 == layers) {
            return a;
        }
        if (tape != nullptr) {
            tape->pre.push_back(a);
        }
        h = a.unaryExpr(
            [act = mlp.spec.activation](double x) { return activate(act, x); });
    }
    return h;
}

Eigen::VectorXd mlp_forward(const Mlp &mlp, const Eigen::VectorXd &z) {
    return mlp_forward_batch(mlp, z);
}

Eigen::MatrixXd mlp_backward(const Mlp &mlp, const MlpTape &tape,
                             const Eigen::MatrixXd &d_out, MlpParams &grad) {
    const std::size_t layers = mlp.params.W.size();
    LPQC_REQUIRE(tape.inputs.size() == layers, ShapeError,
                 "mlp: tape does not match network");
    Eigen::MatrixXd delta = d_out;
    for (std::size_t k = layers; k-- > 0;) {
        grad.W[k].noalias() += delta * tape.inputs[k].transpose();
        grad.b[k] += delta.rowwise().sum();
        Eigen::MatrixXd back = mlp.params.W[k].transpose() * delta;
        if (k == 0) {
            return back;
        }
        const auto &pre = tape.pre[k - 1];
        const Activation act = mlp.spec.activation;
        delta = back.cwiseProduct(pre.unaryExpr(
            [act](double x) { return activate_derivative(act, x); }));
    }
    return delta;
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd &logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double mx = logits.col(c).maxCoeff();
        Eigen::VectorXd e = (logits.col(c).array() - mx).exp();
        out.col(c) = e / e.sum();
    }
    return out;
}

MlpSpec gating_spec(int latent_dim, int experts) {
    return MlpSpec{latent_dim, 32, 1, experts, Activation::Tanh};
}

void GeneratorWeights::validate() const {
    layout.validate();
    LPQC_REQUIRE(!experts.empty(), ConfigError, "generator: at least one expert");
    const auto K = static_cast<int>(layout.num_params());
    for (const auto &e : experts) {
        LPQC_REQUIRE(e.spec.d_out == K, ShapeError,
                     "generator: expert output must match circuit parameters");
        LPQC_REQUIRE(e.spec.d_in == gating.spec.d_in, ShapeError,
                     "generator: experts and gate need the same latent width");
    }
    LPQC_REQUIRE(gating.spec.d_out == num_experts(), ShapeError,
                 "generator: gate width must equal expert count");
}

std::vector<double> GeneratorWeights::flatten() const {
    std::vector<double> flat;
    flat.reserve(num_weights());
    for (const auto &e : experts) {
        e.params.append_to(flat);
    }
    gating.params.append_to(flat);
    return flat;
}

void GeneratorWeights::unflatten(const std::vector<double> &flat) {
    LPQC_REQUIRE(flat.size() == num_weights(), ShapeError,
                 "generator: flat weight count mismatch");
    std::size_t pos = 0;
    for (auto &e : experts) {
        e.params.read_from(flat, pos);
    }
    gating.params.read_from(flat, pos);
}

std::size_t GeneratorWeights::num_weights() const {
    std::size_t n = gating.params.size();
    for (const auto &e : experts) {
        n += e.params.size();
    }
    return n;
}

GeneratorWeights make_generator(const qcore::QubitLayout &layout,
                                const MlpSpec &expert_spec, int experts,
                                Rng &rng) {
    layout.validate();
    LPQC_REQUIRE(experts >= 1, ConfigError, "generator: at least one expert");
    MlpSpec spec = expert_spec;
    spec.d_out = static_cast<int>(layout.num_params());
    GeneratorWeights gen;
    gen.layout = layout;
    for (int i = 0; i < experts; ++i) {
        gen.experts.push_back(make_mlp(spec, rng));
    }
    gen.gating = make_mlp(gating_spec(spec.d_in, experts), rng);
    return gen;
}

Eigen::VectorXd gate_weights(const Mlp &gating, const Eigen::VectorXd &z) {
    return softmax_columns(mlp_forward(gating, z));
}

Eigen::VectorXd moe_parameters(const GeneratorWeights &gen,
                               const Eigen::VectorXd &z) {
    if (gen.experts.size() == 1) {
        return mlp_forward(gen.experts.front(), z);
    }
    const Eigen::VectorXd pi = gate_weights(gen.gating, z);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(gen.experts.front().spec.d_out);
    for (std::size_t i = 0; i < gen.experts.size(); ++i) {
        theta += pi(static_cast<Eigen::Index>(i)) *
                 mlp_forward(gen.experts[i], z);
    }
    return theta;
}

NoLatentDraw sample_no_latent(const NoLatentSpec &spec, Rng &rng, int count) {
    LPQC_REQUIRE(spec.mean.size() == spec.log_std.size(), ShapeError,
                 "no-latent: mean and log_std lengths differ");
    const Eigen::Index K = spec.mean.size();
    NoLatentDraw draw{Eigen::MatrixXd(K, count), Eigen::MatrixXd(K, count)};
    const Eigen::VectorXd sd = spec.log_std.array().exp();
    for (int c = 0; c < count; ++c) {
        for (Eigen::Index k = 0; k < K; ++k) {
            draw.eps(k, c) = rng.normal();
        }
        draw.theta.col(c) = spec.mean + sd.cwiseProduct(draw.eps.col(c));
    }
    return draw;
}

NoLatentDraw sample_no_latent(const NoLatentSpec &spec, std::uint64_t seed,
                              int count) {
    Rng rng(seed);
    return sample_no_latent(spec, rng, count);
}

std::size_t RdSpec::random_size() const {
    return 2 * static_cast<std::size_t>(layout.num_qubits()) *
           static_cast<std::size_t>(layout.layers / 2 + 1);
}

std::size_t RdSpec::trainable_size() const {
    return layout.num_params() - random_size();
}

RdSpec make_rd(const qcore::QubitLayout &layout, int modes,
               std::uint64_t center_seed) {
    layout.validate();
    LPQC_REQUIRE(layout.layers % 2 == 0, ConfigError,
                 "rd: layer count must be even");
    LPQC_REQUIRE(modes >= 1, ConfigError, "rd: modes must be >= 1");
    RdSpec spec;
    spec.layout = layout;
    Rng rng(center_seed, 0x5244ULL);
    for (int i = 0; i < modes; ++i) {
        Eigen::VectorXd c(static_cast<Eigen::Index>(spec.random_size()));
        for (Eigen::Index k = 0; k < c.size(); ++k) {
            c(k) = rng.normal();
        }
        spec.centers.push_back(std::move(c));
    }
    spec.trainable =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.trainable_size()));
    return spec;
}

Eigen::VectorXd rd_parameters(const RdSpec &spec, Rng &rng) {
    const auto nr = static_cast<Eigen::Index>(spec.random_size());
    const auto nt = static_cast<Eigen::Index>(spec.trainable_size());
    LPQC_REQUIRE(spec.trainable.size() == nt, ShapeError,
                 "rd: trainable block has the wrong length");
    Eigen::VectorXd theta(nr + nt);
    const Eigen::VectorXd *center = &spec.centers.front();
    if (spec.centers.size() > 1) {
        center = &spec.centers[rng.index(spec.centers.size())];
    }
    const double sd = std::exp(-1.0);
    for (Eigen::Index k = 0; k < nr; ++k) {
        theta(k) = (*center)(k) + sd * rng.normal();
    }
    theta.tail(nt) = spec.trainable;
    return theta;
}

Eigen::MatrixXd rd_parameters_batch(const RdSpec &spec, Rng &rng, int count) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(spec.layout.num_params()),
                        count);
    for (int c = 0; c < count; ++c) {
        out.col(c) = rd_parameters(spec, rng);
    }
    return out;
}

int LmlpSpec::output_dim(int n_data, bool mixed) {
    const int d = 1 << n_data;
    return mixed ? 2 * d * d : 2 * d;
}

LmlpSpec make_lmlp(int n_data, int m_anc, const MlpSpec &hidden, Rng &rng) {
    LPQC_REQUIRE(n_data >= 1 && m_anc >= 0, ConfigError,
                 "lmlp: invalid register sizes");
    LmlpSpec spec;
    spec.n_data = n_data;
    spec.mixed = m_anc > 0;
    MlpSpec s = hidden;
    s.d_out = LmlpSpec::output_dim(n_data, spec.mixed);
    spec.mlp = make_mlp(s, rng);
    return spec;
}

CMatrix lmlp_output_matrix(const Eigen::VectorXd &raw, int n_data, bool mixed) {
    const Eigen::Index rows = Eigen::Index{1} << n_data;
    const Eigen::Index cols = mixed ? rows : 1;
    LPQC_REQUIRE(raw.size() == 2 * rows * cols, ShapeError,
                 "lmlp: raw output has the wrong length");
    CMatrix A(rows, cols);
    const Eigen::Index half = rows * cols;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Eigen::Index k = r * cols + c;
            A(r, c) = cplx(raw(k), raw(half + k));
        }
    }
    return A;
}

qcore::DensityMatrix normalize_gram(const CMatrix &A) {
    CMatrix rho = A * A.adjoint();
    const double t = rho.trace().real();
    if (!(t >= 1e-12)) {
        throw DegenerateOutputError("lmlp: tr(AA^dagger) below 1e-12");
    }
    rho /= t;
    // Exact Hermitian symmetry; the product above leaves rounding noise.
    rho = (0.5 * (rho + rho.adjoint())).eval();
    return qcore::DensityMatrix(std::move(rho));
}

qcore::DensityMatrix lmlp_state(const LmlpSpec &spec, const Eigen::VectorXd &z) {
    return normalize_gram(
        lmlp_output_matrix(mlp_forward(spec.mlp, z), spec.n_data, spec.mixed));
}

namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

void put_spec(std::ostream &out, const MlpSpec &s) {
    binio::put<std::int32_t>(out, s.d_in);
    binio::put<std::int32_t>(out, s.hidden_dim);
    binio::put<std::int32_t>(out, s.hidden_layers);
    binio::put<std::int32_t>(out, s.d_out);
    binio::put<std::int32_t>(out, static_cast<std::int32_t>(s.activation));
}

MlpSpec get_spec(std::istream &in) {
    MlpSpec s;
    s.d_in = binio::get<std::int32_t>(in);
    s.hidden_dim = binio::get<std::int32_t>(in);
    s.hidden_layers = binio::get<std::int32_t>(in);
    s.d_out = binio::get<std::int32_t>(in);
    const auto act = binio::get<std::int32_t>(in);
    if (act < 0 || act > static_cast<std::int32_t>(Activation::Linear)) {
        throw DataError("checkpoint: unknown activation code");
    }
    s.activation = static_cast<Activation>(act);
    return s;
}

} // namespace

void write_checkpoint(std::ostream &out, const GeneratorWeights &gen) {
    gen.validate();
    binio::put_magic(out, "LPQW");
    binio::put<std::uint16_t>(out, kCheckpointVersion);
    binio::put<std::int32_t>(out, gen.layout.n_data);
    binio::put<std::int32_t>(out, gen.layout.m_anc);
    binio::put<std::int32_t>(out, gen.layout.layers);
    binio::put<std::int32_t>(out, gen.num_experts());
    put_spec(out, gen.experts.front().spec);
    put_spec(out, gen.gating.spec);
    const auto flat = gen.flatten();
    binio::put<std::uint64_t>(out, flat.size());
    for (double v : flat) {
        binio::put<double>(out, v);
    }
    if (!out) {
        throw Error("checkpoint: write failed");
    }
}

GeneratorWeights read_checkpoint(std::istream &in) {
    binio::expect_magic(in, "LPQW");
    const auto version = binio::get<std::uint16_t>(in);
    if (version != kCheckpointVersion) {
        throw DataError("checkpoint: unsupported version " +
                        std::to_string(version));
    }
    GeneratorWeights gen;
    gen.layout.n_data = binio::get<std::int32_t>(in);
    gen.layout.m_anc = binio::get<std::int32_t>(in);
    gen.layout.layers = binio::get<std::int32_t>(in);
    const auto experts = binio::get<std::int32_t>(in);
    const MlpSpec expert_spec = get_spec(in);
    const MlpSpec gate_spec = get_spec(in);
    try {
        gen.layout.validate();
        expert_spec.validate();
        gate_spec.validate();
    } catch (const ConfigError &e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
    if (experts < 1 || experts > 4096) {
        throw DataError("checkpoint: implausible expert count");
    }
    for (int i = 0; i < experts; ++i) {
        gen.experts.push_back(zero_mlp(expert_spec));
    }
    gen.gating = zero_mlp(gate_spec);
    try {
        gen.validate();
    } catch (const Error &e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
    const auto count = binio::get<std::uint64_t>(in);
    if (count != gen.num_weights()) {
        throw DataError("checkpoint: weight count does not match architecture");
    }
    std::vector<double> flat(count);
    for (auto &v : flat) {
        v = binio::get<double>(in);
    }
    gen.unflatten(flat);
    return gen;
}

} // namespace lpqc::netgen
