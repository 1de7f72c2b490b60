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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpqc/qcore.hpp"
#include "lpqc/rng.hpp"

namespace lpqc::netgen {

enum class Activation { Tanh, Relu, Gelu, Linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string &s);

/// MLP(d_in, D^(h), d_out). Hidden layers use `activation`; the output layer
/// is affine.
struct MlpSpec {
    int d_in = 1;
    int hidden_dim = 32;
    int hidden_layers = 1;
    int d_out = 1;
    Activation activation = Activation::Tanh;

    /// (d_in, D, ..., D, d_out)
    [[nodiscard]] std::vector<int> layer_dims() const;
    void validate() const;
    bool operator==(const MlpSpec &) const = default;
};

/// Weights W[k] (out x in) and biases b[k] of each affine layer. Also used as
/// the gradient container for an MLP.
struct MlpParams {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;

    [[nodiscard]] std::size_t size() const;
    /// Zero-filled copy with the same shapes.
    [[nodiscard]] MlpParams zeros_like() const;
    /// Row-major W then b, layer by layer.
    void append_to(std::vector<double> &flat) const;
    /// Reads size() values starting at `pos`; advances `pos`.
    void read_from(const std::vector<double> &flat, std::size_t &pos);
    MlpParams &operator+=(const MlpParams &other);
};

struct Mlp {
    MlpSpec spec;
    MlpParams params;
};

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
Mlp make_mlp(const MlpSpec &spec, Rng &rng);
/// All-zero weights and biases.
Mlp zero_mlp(const MlpSpec &spec);

/// Activations of each layer for a batch, kept for backpropagation.
struct MlpTape {
    std::vector<Eigen::MatrixXd> inputs; // input to layer k (d_k x B)
    std::vector<Eigen::MatrixXd> pre;    // pre-activation of hidden layer k
};

double activate(Activation a, double x);
double activate_derivative(Activation a, double x);

/// Forward pass for a single latent vector.
Eigen::VectorXd mlp_forward(const Mlp &mlp, const Eigen::VectorXd &z);
/// Forward pass for a batch stored as columns; fills `tape` when non-null.
Eigen::MatrixXd mlp_forward_batch(const Mlp &mlp, const Eigen::MatrixXd &Z,
                                  MlpTape *tape = nullptr);
/// Accumulates parameter gradients into `grad` and returns dL/dZ.
Eigen::MatrixXd mlp_backward(const Mlp &mlp, const MlpTape &tape,
                             const Eigen::MatrixXd &d_out, MlpParams &grad);

/// Column-wise softmax.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd &logits);

/// E expert networks (d -> K), gating network MLP(d, 32^(1), E) and the
/// circuit layout they drive.
struct GeneratorWeights {
    std::vector<Mlp> experts;
    Mlp gating;
    qcore::QubitLayout layout;

    [[nodiscard]] int num_experts() const {
        return static_cast<int>(experts.size());
    }
    [[nodiscard]] int latent_dim() const { return gating.spec.d_in; }
    void validate() const;

    /// Declaration order: experts in order, then the gating network.
    [[nodiscard]] std::vector<double> flatten() const;
    void unflatten(const std::vector<double> &flat);
    [[nodiscard]] std::size_t num_weights() const;
};

/// Architecture of the gating network for E experts.
MlpSpec gating_spec(int latent_dim, int experts);

GeneratorWeights make_generator(const qcore::QubitLayout &layout,
                                const MlpSpec &expert_spec, int experts,
                                Rng &rng);

/// Softmax of the gating logits: pi(z), length E.
Eigen::VectorXd gate_weights(const Mlp &gating, const Eigen::VectorXd &z);

/// theta(z) = sum_i pi_i(z) theta^(i)(z).
Eigen::VectorXd moe_parameters(const GeneratorWeights &gen,
                               const Eigen::VectorXd &z);

/// Trainable diagonal Gaussian over angles: theta = mean + exp(log_std) eps.
struct NoLatentSpec {
    Eigen::VectorXd mean;
    Eigen::VectorXd log_std;
};

struct NoLatentDraw {
    Eigen::MatrixXd theta; // K x count
    Eigen::MatrixXd eps;   // K x count, the standard-normal noise used
};

NoLatentDraw sample_no_latent(const NoLatentSpec &spec, Rng &rng, int count);
NoLatentDraw sample_no_latent(const NoLatentSpec &spec, std::uint64_t seed,
                              int count);

/**
 * Random-deterministic baseline: the rotation layers 0..L/2 take angles
 * drawn per sample from an M-mode Gaussian mixture over that block
 * (component stddev e^-1, centers ~ N(0, I)); layers L/2+1..L share one
 * trainable block.
 */
struct RdSpec {
    qcore::QubitLayout layout;
    std::vector<Eigen::VectorXd> centers; // each of random_size()
    Eigen::VectorXd trainable;            // trainable_size()

    [[nodiscard]] std::size_t random_size() const;
    [[nodiscard]] std::size_t trainable_size() const;
};

/// Throws ConfigError for odd L.
RdSpec make_rd(const qcore::QubitLayout &layout, int modes,
               std::uint64_t center_seed);
/// One angle vector: frozen random block followed by the shared block.
Eigen::VectorXd rd_parameters(const RdSpec &spec, Rng &rng);
Eigen::MatrixXd rd_parameters_batch(const RdSpec &spec, Rng &rng, int count);

/// Classical latent-MLP baseline emitting a density matrix directly.
struct LmlpSpec {
    Mlp mlp;
    int n_data = 1;
    bool mixed = true; // variant (i): complex matrix A; else complex vector

    /// 2 * 4^n (mixed) or 2 * 2^n (pure).
    [[nodiscard]] static int output_dim(int n_data, bool mixed);
};

LmlpSpec make_lmlp(int n_data, int m_anc, const MlpSpec &hidden, Rng &rng);

/// Reshape raw MLP output into A (rows x cols); real parts first, then
/// imaginary parts, each row-major.
lpqc::CMatrix lmlp_output_matrix(const Eigen::VectorXd &raw, int n_data, bool mixed);
/// AA^dagger / tr(AA^dagger). Throws DegenerateOutputError if the trace is
/// below 1e-12.
qcore::DensityMatrix normalize_gram(const lpqc::CMatrix &A);
qcore::DensityMatrix lmlp_state(const LmlpSpec &spec, const Eigen::VectorXd &z);

/// Weight checkpoints: "LPQW", u16 version, the generator architecture as
/// little-endian i32 fields, u64 weight count, then little-endian f64 values
/// in GeneratorWeights::flatten order.
void write_checkpoint(std::ostream &out, const GeneratorWeights &gen);
GeneratorWeights read_checkpoint(std::istream &in);

} // namespace lpqc::netgen
