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

#include <vector>

#include <Eigen/Dense>

#include "lpqc/qcore.hpp"

namespace lpqc::ot {

using qcore::DensityMatrix;

/// Result of a transport solve. `cost` is sum_ij P_ij C_ij.
struct OtResult {
    Eigen::MatrixXd plan;
    double cost = 0.0;
    bool converged = true;
    int iterations = 0;
};

/// C_ij = max(0, 1 - kappa(X_i, Y_j)) with kappa the super-fidelity.
Eigen::MatrixXd cost_matrix(const std::vector<DensityMatrix> &X,
                            const std::vector<DensityMatrix> &Y);

/// Uniform histogram of length n.
Eigen::VectorXd uniform_histogram(Eigen::Index n);

/**
 * Minimum-cost assignment for a square matrix. Returns col[i], the column
 * assigned to row i. Ties resolve toward lower indices.
 */
std::vector<int> hungarian(const Eigen::MatrixXd &C);

/**
 * Exact transport LP. Square problems with identical uniform marginals are
 * solved as assignments; everything else by the transportation simplex.
 * Throws HistogramError for negative mass or if sum(a) and sum(b) differ by
 * more than 1e-8.
 */
OtResult ot_exact(const Eigen::MatrixXd &C, const Eigen::VectorXd &a,
                  const Eigen::VectorXd &b);

/// Transportation simplex regardless of shape (northwest-corner start).
OtResult ot_transport_simplex(const Eigen::MatrixXd &C, const Eigen::VectorXd &a,
                              const Eigen::VectorXd &b);

/**
 * Entropic transport in the log domain. Stops once the L1 row-marginal
 * violation is at most `tol`; otherwise returns with converged = false.
 * The returned plan is rounded onto the transport polytope either way, so
 * it is always feasible.
 */
OtResult ot_sinkhorn(const Eigen::MatrixXd &C, const Eigen::VectorXd &a,
                     const Eigen::VectorXd &b, double epsilon,
                     int max_iters = 10000, double tol = 1e-9);

/// Exact transport with uniform marginals on a precomputed cost matrix.
OtResult wasserstein_plan(const Eigen::MatrixXd &C);

double wasserstein_loss(const std::vector<DensityMatrix> &X,
                        const std::vector<DensityMatrix> &Y);

/// Batch mean of sum_i pi_i log pi_i; `gate_probs` holds one column per
/// sample. 0 log 0 is taken as 0.
double entropy_regularizer(const Eigen::MatrixXd &gate_probs);

/// wasserstein_loss(X, Y) + lambda * entropy_regularizer(gate_probs).
double train_loss(const std::vector<DensityMatrix> &X,
                  const std::vector<DensityMatrix> &Y,
                  const Eigen::MatrixXd &gate_probs, double lambda);

} // namespace lpqc::ot
