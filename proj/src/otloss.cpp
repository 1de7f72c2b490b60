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

#include "lpqc/otloss.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "lpqc/error.hpp"

namespace lpqc::ot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_histograms(const Eigen::MatrixXd &C, const Eigen::VectorXd &a,
                      const Eigen::VectorXd &b) {
    LPQC_REQUIRE(C.rows() > 0 && C.cols() > 0, ShapeError,
                 "ot: empty cost matrix");
    LPQC_REQUIRE(a.size() == C.rows() && b.size() == C.cols(), ShapeError,
                 "ot: histogram lengths do not match the cost matrix");
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        LPQC_REQUIRE(a(i) >= 0.0 && std::isfinite(a(i)), HistogramError,
                     "ot: source histogram has negative or non-finite mass");
    }
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        LPQC_REQUIRE(b(j) >= 0.0 && std::isfinite(b(j)), HistogramError,
                     "ot: target histogram has negative or non-finite mass");
    }
    LPQC_REQUIRE(std::abs(a.sum() - b.sum()) <= 1e-8, HistogramError,
                 "ot: histogram masses differ");
}

bool is_constant(const Eigen::VectorXd &v, double value) {
    return (v.array() == value).all();
}

double log_sum_exp(const Eigen::VectorXd &x) {
    const double mx = x.maxCoeff();
    if (!std::isfinite(mx)) {
        return mx;
    }
    return mx + std::log((x.array() - mx).exp().sum());
}

} // namespace

Eigen::MatrixXd cost_matrix(const std::vector<DensityMatrix> &X,
                            const std::vector<DensityMatrix> &Y) {
    LPQC_REQUIRE(!X.empty() && !Y.empty(), ShapeError, "ot: empty ensemble");
    const auto dim = X.front().dim();
    std::vector<double> px(X.size());
    std::vector<double> py(Y.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        LPQC_REQUIRE(X[i].dim() == dim, ShapeError,
                     "ot: ensembles mix state dimensions");
        px[i] = qcore::purity(X[i]);
    }
    for (std::size_t j = 0; j < Y.size(); ++j) {
        LPQC_REQUIRE(Y[j].dim() == dim, ShapeError,
                     "ot: ensembles mix state dimensions");
        py[j] = qcore::purity(Y[j]);
    }
    Eigen::MatrixXd C(static_cast<Eigen::Index>(X.size()),
                      static_cast<Eigen::Index>(Y.size()));
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (std::size_t j = 0; j < Y.size(); ++j) {
            const double k = qcore::super_fidelity(X[i], Y[j], px[i], py[j]);
            C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::max(0.0, 1.0 - k);
        }
    }
    return C;
}

Eigen::VectorXd uniform_histogram(Eigen::Index n) {
    return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

std::vector<int> hungarian(const Eigen::MatrixXd &C) {
    LPQC_REQUIRE(C.rows() == C.cols() && C.rows() > 0, ShapeError,
                 "hungarian: cost matrix must be square and nonempty");
    const int n = static_cast<int>(C.rows());
    std::vector<double> u(n + 1, 0.0);
    std::vector<double> v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0);
    std::vector<int> way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = C(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> col(n, -1);
    for (int j = 1; j <= n; ++j) {
        col[p[j] - 1] = j - 1;
    }
    return col;
}

OtResult ot_transport_simplex(const Eigen::MatrixXd &C, const Eigen::VectorXd &a,
                              const Eigen::VectorXd &b) {
    check_histograms(C, a, b);
    const int n = static_cast<int>(C.rows());
    const int m = static_cast<int>(C.cols());
    const int nodes = n + m;

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, m);
    Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> basic =
        Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, m);

    // Northwest corner: exactly one index advances per step, so the basis
    // has n + m - 1 cells and forms a spanning tree.
    {
        Eigen::VectorXd supply = a;
        Eigen::VectorXd demand = b;
        int i = 0;
        int j = 0;
        while (true) {
            const double x = std::min(supply(i), demand(j));
            X(i, j) = x;
            basic(i, j) = 1;
            supply(i) -= x;
            demand(j) -= x;
            if (i == n - 1 && j == m - 1) {
                break;
            }
            if (j == m - 1 || (i < n - 1 && supply(i) <= demand(j))) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(nodes));
    std::vector<double> pot(static_cast<std::size_t>(nodes));
    std::vector<int> parent(static_cast<std::size_t>(nodes));
    std::vector<char> seen(static_cast<std::size_t>(nodes));
    std::deque<int> queue;

    auto rebuild = [&] {
        for (auto &l : adj) {
            l.clear();
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) {
                if (basic(i, j)) {
                    adj[static_cast<std::size_t>(i)].push_back(n + j);
                    adj[static_cast<std::size_t>(n + j)].push_back(i);
                }
            }
        }
    };
    auto cell_cost = [&](int u, int w) {
        return u < n ? C(u, w - n) : C(w, u - n);
    };
    // BFS over the basis tree from `root`; fills parent and potentials
    // (row potential u_i, column potential v_j with u_i + v_j = C_ij).
    auto bfs = [&](int root) {
        std::fill(seen.begin(), seen.end(), 0);
        parent[static_cast<std::size_t>(root)] = -1;
        pot[static_cast<std::size_t>(root)] = 0.0;
        seen[static_cast<std::size_t>(root)] = 1;
        queue.assign(1, root);
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int w : adj[static_cast<std::size_t>(u)]) {
                if (seen[static_cast<std::size_t>(w)]) {
                    continue;
                }
                seen[static_cast<std::size_t>(w)] = 1;
                parent[static_cast<std::size_t>(w)] = u;
                pot[static_cast<std::size_t>(w)] =
                    cell_cost(u, w) - pot[static_cast<std::size_t>(u)];
                queue.push_back(w);
            }
        }
    };

    const double tol = 1e-12;
    const int max_iters = 50 * nodes * nodes + 1000;
    const int stall_limit = 2 * nodes;
    int degenerate_run = 0;
    OtResult result;
    result.converged = false;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        rebuild();
        bfs(0);
        const bool bland = degenerate_run >= stall_limit;
        int ei = -1;
        int ej = -1;
        double best = -tol;
        for (int i = 0; i < n && !(bland && ei >= 0); ++i) {
            for (int j = 0; j < m; ++j) {
                if (basic(i, j)) {
                    continue;
                }
                const double r = C(i, j) - pot[static_cast<std::size_t>(i)] -
                                 pot[static_cast<std::size_t>(n + j)];
                if (r < best) {
                    best = r;
                    ei = i;
                    ej = j;
                    if (bland) {
                        break;
                    }
                }
            }
        }
        if (ei < 0) {
            result.converged = true;
            break;
        }
        // Tree path from row ei to column ej; with the entering cell it
        // closes the pivot cycle. Cells alternate -, +, - ... along it.
        bfs(ei);
        std::vector<std::pair<int, int>> path;
        for (int w = n + ej; parent[static_cast<std::size_t>(w)] >= 0;
             w = parent[static_cast<std::size_t>(w)]) {
            const int u = parent[static_cast<std::size_t>(w)];
            path.emplace_back(u < n ? u : w, u < n ? w - n : u - n);
        }
        std::reverse(path.begin(), path.end());
        double theta = kInf;
        int leave = -1;
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const auto [pi, pj] = path[k];
            const double x = X(pi, pj);
            const bool better =
                x < theta ||
                (x == theta && leave >= 0 &&
                 std::pair(pi, pj) < path[static_cast<std::size_t>(leave)]);
            if (better) {
                theta = x;
                leave = static_cast<int>(k);
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k) {
            const auto [pi, pj] = path[k];
            X(pi, pj) += (k % 2 == 0) ? -theta : theta;
        }
        X(ei, ej) = theta;
        basic(ei, ej) = 1;
        const auto [li, lj] = path[static_cast<std::size_t>(leave)];
        X(li, lj) = 0.0;
        basic(li, lj) = 0;
        degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    }
    result.iterations = iter;
    result.plan = X.cwiseMax(0.0);
    result.cost = (result.plan.array() * C.array()).sum();
    return result;
}

OtResult ot_exact(const Eigen::MatrixXd &C, const Eigen::VectorXd &a,
                  const Eigen::VectorXd &b) {
    check_histograms(C, a, b);
    if (C.rows() == C.cols() && is_constant(a, a(0)) && is_constant(b, a(0))) {
        const auto col = hungarian(C);
        OtResult r;
        r.plan = Eigen::MatrixXd::Zero(C.rows(), C.cols());
        for (std::size_t i = 0; i < col.size(); ++i) {
            r.plan(static_cast<Eigen::Index>(i), col[i]) = a(0);
        }
        r.cost = (r.plan.array() * C.array()).sum();
        return r;
    }
    OtResult r = ot_transport_simplex(C, a, b);
    if (!r.converged) {
        throw Error("ot: transportation simplex hit its iteration cap");
    }
    return r;
}

namespace {

// Feasible rounding of an approximate plan (Altschuler, Weed, Rigollet
// 2017): shrink rows and columns that exceed their marginals, then spread
// the missing mass as a rank-one correction.
Eigen::MatrixXd round_to_marginals(Eigen::MatrixXd P, const Eigen::VectorXd &a,
                                   const Eigen::VectorXd &b) {
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        const double s = P.row(i).sum();
        if (s > a(i)) {
            P.row(i) *= a(i) / s;
        }
    }
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
        const double s = P.col(j).sum();
        if (s > b(j)) {
            P.col(j) *= b(j) / s;
        }
    }
    const Eigen::VectorXd er = (a - P.rowwise().sum()).cwiseMax(0.0);
    const Eigen::VectorXd ec = (b - P.colwise().sum().transpose()).cwiseMax(0.0);
    const double mass = er.sum();
    if (mass > 0.0) {
        P += er * ec.transpose() / mass;
    }
    return P;
}

} // namespace

OtResult ot_sinkhorn(const Eigen::MatrixXd &C, const Eigen::VectorXd &a,
                     const Eigen::VectorXd &b, double epsilon, int max_iters,
                     double tol) {
    check_histograms(C, a, b);
    LPQC_REQUIRE(epsilon > 0.0, ConfigError, "sinkhorn: epsilon must be positive");
    const Eigen::Index n = C.rows();
    const Eigen::Index m = C.cols();
    const Eigen::VectorXd la = a.array().log();
    const Eigen::VectorXd lb = b.array().log();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd tmp;
    OtResult r;
    r.converged = false;
    auto plan = [&] {
        Eigen::MatrixXd P(n, m);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                P(i, j) = std::exp((f(i) + g(j) - C(i, j)) / epsilon);
            }
        }
        return P;
    };
    int it = 0;
    for (; it < max_iters; ++it) {
        tmp.resize(m);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                tmp(j) = (g(j) - C(i, j)) / epsilon;
            }
            f(i) = std::isinf(la(i)) ? -kInf
                                     : epsilon * (la(i) - log_sum_exp(tmp));
        }
        tmp.resize(n);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                tmp(i) = (f(i) - C(i, j)) / epsilon;
            }
            g(j) = std::isinf(lb(j)) ? -kInf
                                     : epsilon * (lb(j) - log_sum_exp(tmp));
        }
        if ((it + 1) % 10 == 0 || it + 1 == max_iters) {
            const Eigen::MatrixXd P = plan();
            if ((P.rowwise().sum() - a).lpNorm<1>() <= tol) {
                r.converged = true;
                ++it;
                break;
            }
        }
    }
    r.iterations = it;
    r.plan = round_to_marginals(plan(), a, b);
    r.cost = (r.plan.array() * C.array()).sum();
    return r;
}

OtResult wasserstein_plan(const Eigen::MatrixXd &C) {
    return ot_exact(C, uniform_histogram(C.rows()), uniform_histogram(C.cols()));
}

double wasserstein_loss(const std::vector<DensityMatrix> &X,
                        const std::vector<DensityMatrix> &Y) {
    return wasserstein_plan(cost_matrix(X, Y)).cost;
}

double entropy_regularizer(const Eigen::MatrixXd &gate_probs) {
    if (gate_probs.cols() == 0) {
        return 0.0;
    }
    double total = 0.0;
    for (Eigen::Index c = 0; c < gate_probs.cols(); ++c) {
        for (Eigen::Index e = 0; e < gate_probs.rows(); ++e) {
            const double p = gate_probs(e, c);
            if (p > 0.0) {
                total += p * std::log(p);
            }
        }
    }
    return total / static_cast<double>(gate_probs.cols());
}

double train_loss(const std::vector<DensityMatrix> &X,
                  const std::vector<DensityMatrix> &Y,
                  const Eigen::MatrixXd &gate_probs, double lambda) {
    LPQC_REQUIRE(lambda >= 0.0, ConfigError, "train_loss: lambda must be >= 0");
    const double d = wasserstein_loss(X, Y);
    return lambda == 0.0 ? d : d + lambda * entropy_regularizer(gate_probs);
}

} // namespace lpqc::ot
