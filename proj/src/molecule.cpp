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

#include "lpqc/molecule.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Geometry>
#include "json.hpp"

#include "lpqc/error.hpp"

namespace lpqc::data {

std::string element_symbol(Element e) {
    static const std::array<const char *, 4> names{"C", "N", "O", "F"};
    return names[static_cast<std::size_t>(e)];
}

Element element_from_symbol(const std::string &s) {
    if (s == "C") {
        return Element::C;
    }
    if (s == "N") {
        return Element::N;
    }
    if (s == "O") {
        return Element::O;
    }
    if (s == "F") {
        return Element::F;
    }
    throw DataError("unsupported element '" + s + "'");
}

double covalent_radius(Element e) {
    static const std::array<double, 4> r{0.76, 0.71, 0.66, 0.57};
    return r[static_cast<std::size_t>(e)];
}

int max_valence(Element e) {
    static const std::array<int, 4> v{4, 3, 2, 1};
    return v[static_cast<std::size_t>(e)];
}

void NormalizationContext::validate() const {
    LPQC_REQUIRE(delta > 0.0 && std::isfinite(delta), ConfigError,
                 "context: delta must be positive");
    LPQC_REQUIRE(v_min.allFinite(), ConfigError, "context: v_min must be finite");
}

NormalizationContext qm9_context() {
    return {Eigen::Vector3d(-3.93, -4.54, -5.11), 10.36};
}

MoleculeRecord canonicalize_pose(const MoleculeRecord &mol) {
    LPQC_REQUIRE(!mol.atoms.empty(), DataError, "molecule has no atoms");
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto &a : mol.atoms) {
        centroid += a.position;
    }
    centroid /= static_cast<double>(mol.atoms.size());
    MoleculeRecord out = mol;
    for (auto &a : out.atoms) {
        a.position -= centroid;
    }
    const Eigen::Vector3d first = out.atoms.front().position;
    const double len = first.norm();
    if (len < 1e-12) {
        return out;
    }
    const Eigen::Vector3d u = first / len;
    const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
    const Eigen::Vector3d axis = u.cross(z);
    const double s = axis.norm();
    const double c = u.dot(z);
    Eigen::Matrix3d R;
    if (s < 1e-12) {
        R = c > 0 ? Eigen::Matrix3d::Identity()
                  : Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitX())
                        .toRotationMatrix();
    } else {
        R = Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
    }
    for (auto &a : out.atoms) {
        a.position = R * a.position;
    }
    return out;
}

RVector molecule_features(const MoleculeRecord &mol,
                          const NormalizationContext &ctx) {
    ctx.validate();
    const auto m = static_cast<int>(mol.atoms.size());
    LPQC_REQUIRE(m >= 1, DataError, "molecule has no atoms");
    LPQC_REQUIRE(m <= kMaxAtoms, DataError,
                 "molecule has more atoms than the 7-qubit layout holds");
    const MoleculeRecord posed = canonicalize_pose(mol);
    RVector f = RVector::Zero(kCodecDim);
    for (int i = 0; i < m; ++i) {
        const auto &a = posed.atoms[static_cast<std::size_t>(i)];
        const Eigen::Vector3d v = (a.position - ctx.v_min) / ctx.delta;
        f.segment<3>(7 * i) = v;
        f(7 * i + 3 + static_cast<int>(a.element)) = 1.0;
        f(7 * m + i) = std::sqrt(std::max(0.0, 3.0 - v.squaredNorm()));
    }
    return f;
}

qcore::StateVector encode_molecule(const MoleculeRecord &mol,
                                   const NormalizationContext &ctx,
                                   bool store_count) {
    RVector f = molecule_features(mol, ctx);
    const auto m = static_cast<double>(mol.atoms.size());
    f /= 2.0 * std::sqrt(m);
    if (store_count) {
        f(kCodecDim - 1) = m / (2.0 * std::sqrt(m));
        f /= f.norm();
    }
    return {f.cast<cplx>(), 7};
}

ScaleMode scale_mode_from_string(const std::string &s) {
    if (s == "paper2x") {
        return ScaleMode::Paper2x;
    }
    if (s == "strict1x") {
        return ScaleMode::Strict1x;
    }
    throw ConfigError("unknown scale mode '" + s + "'");
}

std::string to_string(ScaleMode m) {
    return m == ScaleMode::Paper2x ? "paper2x" : "strict1x";
}

int detect_atom_count(const RVector &x, double tau) {
    LPQC_REQUIRE(x.size() == kCodecDim, ShapeError,
                 "decode: expected 128 amplitudes");
    auto type_mass = [&](int slot) { return x.segment<4>(7 * slot + 3).sum(); };
    for (int k = 1; k <= kMaxAtoms; ++k) {
        const double scale = 2.0 * std::sqrt(static_cast<double>(k));
        bool occupied = true;
        for (int i = 0; i < k && occupied; ++i) {
            occupied = scale * type_mass(i) > tau;
        }
        if (!occupied) {
            continue;
        }
        const double tail = x.segment(8 * k, kCodecDim - 1 - 8 * k).squaredNorm();
        if (scale * scale * tail <= tau * tau) {
            return k;
        }
    }
    return 0;
}

MoleculeRecord decode_state(const qcore::StateVector &state,
                            const NormalizationContext &ctx,
                            const DecodeOptions &opts) {
    ctx.validate();
    LPQC_REQUIRE(state.dim() == static_cast<std::size_t>(kCodecDim), ShapeError,
                 "decode: expected a 7-qubit state");
    const RVector x = state.amplitudes().cwiseAbs();
    int m = 0;
    if (opts.m_override) {
        m = *opts.m_override;
        LPQC_REQUIRE(m >= 1 && m <= kMaxAtoms, ConfigError,
                     "decode: atom count override out of range");
    } else {
        m = detect_atom_count(x, opts.tau);
    }
    if (m == 0) {
        throw DataError("decode: no occupied atom slots (empty molecule)");
    }
    const double md = static_cast<double>(m);
    const double factor =
        opts.count_slot ? std::sqrt(4.0 * md + md * md) : 2.0 * std::sqrt(md);
    const RVector xt = factor * x;
    const double coord_scale = opts.scale == ScaleMode::Paper2x ? 2.0 : 1.0;
    MoleculeRecord mol;
    for (int i = 0; i < m; ++i) {
        Eigen::Index t = 0;
        xt.segment<4>(7 * i + 3).maxCoeff(&t);
        Atom a;
        a.element = static_cast<Element>(t);
        a.position = coord_scale * ctx.delta * xt.segment<3>(7 * i) + ctx.v_min;
        mol.atoms.push_back(a);
    }
    return mol;
}

MolecularGraph infer_bonds(const MoleculeRecord &mol, double scale) {
    const auto m = static_cast<int>(mol.atoms.size());
    LPQC_REQUIRE(m >= 1, DataError, "infer_bonds: molecule has no atoms");
    MolecularGraph g;
    g.adjacency = Eigen::MatrixXi::Zero(m, m);
    for (const auto &a : mol.atoms) {
        g.elements.push_back(a.element);
    }
    struct Pair {
        double d;
        int i;
        int j;
    };
    std::vector<Pair> pairs;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const auto &ai = mol.atoms[static_cast<std::size_t>(i)];
            const auto &aj = mol.atoms[static_cast<std::size_t>(j)];
            pairs.push_back({(ai.position - aj.position).norm(), i, j});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair &a, const Pair &b) { return a.d < b.d; });
    std::vector<int> deg(static_cast<std::size_t>(m), 0);
    for (const auto &p : pairs) {
        const Element ei = g.elements[static_cast<std::size_t>(p.i)];
        const Element ej = g.elements[static_cast<std::size_t>(p.j)];
        if (p.d > scale * (covalent_radius(ei) + covalent_radius(ej))) {
            continue;
        }
        if (deg[static_cast<std::size_t>(p.i)] >= max_valence(ei) ||
            deg[static_cast<std::size_t>(p.j)] >= max_valence(ej)) {
            continue;
        }
        g.adjacency(p.i, p.j) = g.adjacency(p.j, p.i) = 1;
        ++deg[static_cast<std::size_t>(p.i)];
        ++deg[static_cast<std::size_t>(p.j)];
    }
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::deque<int> q{0};
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int w = 0; w < m; ++w) {
            if (g.adjacency(v, w) != 0 && !seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                ++reached;
                q.push_back(w);
            }
        }
    }
    g.connected = reached == m;
    g.bond_order = g.adjacency;
    g.implicit_h.assign(static_cast<std::size_t>(m), 0);
    return g;
}

namespace {

/// Edmonds' blossom algorithm, augmenting from each free vertex in order.
class Blossom {
  public:
    explicit Blossom(const Eigen::MatrixXi &adj)
        : n_(static_cast<int>(adj.rows())), adj_(static_cast<std::size_t>(n_)),
          match_(static_cast<std::size_t>(n_), -1),
          p_(static_cast<std::size_t>(n_)), base_(static_cast<std::size_t>(n_)),
          used_(static_cast<std::size_t>(n_)),
          blossom_(static_cast<std::size_t>(n_)) {
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                if (i != j && adj(i, j) != 0) {
                    adj_[static_cast<std::size_t>(i)].push_back(j);
                }
            }
        }
    }

    std::vector<int> solve() {
        for (int i = 0; i < n_; ++i) {
            if (match_[u(i)] != -1) {
                continue;
            }
            int v = find_path(i);
            while (v != -1) {
                const int pv = p_[u(v)];
                const int ppv = match_[u(pv)];
                match_[u(v)] = pv;
                match_[u(pv)] = v;
                v = ppv;
            }
        }
        return match_;
    }

  private:
    static std::size_t u(int i) { return static_cast<std::size_t>(i); }

    int lca(int a, int b) {
        std::vector<char> seen(u(n_), 0);
        while (true) {
            a = base_[u(a)];
            seen[u(a)] = 1;
            if (match_[u(a)] == -1) {
                break;
            }
            a = p_[u(match_[u(a)])];
        }
        while (true) {
            b = base_[u(b)];
            if (seen[u(b)]) {
                return b;
            }
            b = p_[u(match_[u(b)])];
        }
    }

    void mark_path(int v, int b, int child) {
        while (base_[u(v)] != b) {
            blossom_[u(base_[u(v)])] = 1;
            blossom_[u(base_[u(match_[u(v)])])] = 1;
            p_[u(v)] = child;
            child = match_[u(v)];
            v = p_[u(match_[u(v)])];
        }
    }

    int find_path(int root) {
        std::fill(used_.begin(), used_.end(), 0);
        std::fill(p_.begin(), p_.end(), -1);
        for (int i = 0; i < n_; ++i) {
            base_[u(i)] = i;
        }
        used_[u(root)] = 1;
        std::deque<int> q{root};
        while (!q.empty()) {
            const int v = q.front();
            q.pop_front();
            for (int to : adj_[u(v)]) {
                if (base_[u(v)] == base_[u(to)] || match_[u(v)] == to) {
                    continue;
                }
                if (to == root ||
                    (match_[u(to)] != -1 && p_[u(match_[u(to)])] != -1)) {
                    const int cur = lca(v, to);
                    std::fill(blossom_.begin(), blossom_.end(), 0);
                    mark_path(v, cur, to);
                    mark_path(to, cur, v);
                    for (int i = 0; i < n_; ++i) {
                        if (blossom_[u(base_[u(i)])]) {
                            base_[u(i)] = cur;
                            if (!used_[u(i)]) {
                                used_[u(i)] = 1;
                                q.push_back(i);
                            }
                        }
                    }
                } else if (p_[u(to)] == -1) {
                    p_[u(to)] = v;
                    if (match_[u(to)] == -1) {
                        return to;
                    }
                    used_[u(match_[u(to)])] = 1;
                    q.push_back(match_[u(to)]);
                }
            }
        }
        return -1;
    }

    int n_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> match_;
    std::vector<int> p_;
    std::vector<int> base_;
    std::vector<char> used_;
    std::vector<char> blossom_;
};

} // namespace

std::vector<int> max_cardinality_matching(const Eigen::MatrixXi &adj) {
    LPQC_REQUIRE(adj.rows() == adj.cols(), ShapeError,
                 "matching: adjacency must be square");
    return Blossom(adj).solve();
}

MolecularGraph complete_valences(MolecularGraph g) {
    const auto m = static_cast<int>(g.elements.size());
    LPQC_REQUIRE(g.adjacency.rows() == m && g.adjacency.cols() == m, ShapeError,
                 "complete_valences: adjacency size mismatch");
    g.bond_order = g.adjacency;
    auto deficiency = [&](int i) {
        return max_valence(g.elements[static_cast<std::size_t>(i)]) -
               g.bond_order.row(i).sum();
    };
    while (true) {
        Eigen::MatrixXi eligible = Eigen::MatrixXi::Zero(m, m);
        bool any = false;
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                if (g.adjacency(i, j) != 0 && g.bond_order(i, j) < 3 &&
                    deficiency(i) > 0 && deficiency(j) > 0) {
                    eligible(i, j) = eligible(j, i) = 1;
                    any = true;
                }
            }
        }
        if (!any) {
            break;
        }
        const auto mate = max_cardinality_matching(eligible);
        for (int i = 0; i < m; ++i) {
            const int j = mate[static_cast<std::size_t>(i)];
            if (j > i) {
                ++g.bond_order(i, j);
                ++g.bond_order(j, i);
            }
        }
    }
    g.implicit_h.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        g.implicit_h[static_cast<std::size_t>(i)] = std::max(0, deficiency(i));
    }
    return g;
}

std::vector<MoleculeRecord> read_molecules(std::istream &in) {
    std::vector<MoleculeRecord> out;
    std::string line;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream head(line);
        long count = 0;
        if (!(head >> count) || count < 1 || count > kMaxAtoms) {
            throw DataError("molecule file: bad atom count line", record);
        }
        MoleculeRecord mol;
        for (long k = 0; k < count; ++k) {
            if (!std::getline(in, line)) {
                throw DataError("molecule file: truncated record", record);
            }
            std::istringstream row(line);
            std::string sym;
            Atom a;
            if (!(row >> sym >> a.position.x() >> a.position.y() >>
                  a.position.z())) {
                throw DataError("molecule file: malformed atom line", record);
            }
            try {
                a.element = element_from_symbol(sym);
            } catch (const DataError &) {
                throw DataError("molecule file: unsupported element '" + sym + "'",
                                record);
            }
            mol.atoms.push_back(a);
        }
        out.push_back(std::move(mol));
        ++record;
    }
    return out;
}

void write_molecules(std::ostream &out, const std::vector<MoleculeRecord> &mols) {
    out.precision(17);
    for (const auto &mol : mols) {
        out << mol.atoms.size() << '\n';
        for (const auto &a : mol.atoms) {
            out << element_symbol(a.element) << ' ' << a.position.x() << ' '
                << a.position.y() << ' ' << a.position.z() << '\n';
        }
    }
}

NormalizationContext read_context(std::istream &in) {
    nlohmann::json j;
    try {
        in >> j;
        NormalizationContext ctx;
        const auto v = j.at("v_min").get<std::vector<double>>();
        LPQC_REQUIRE(v.size() == 3, ConfigError, "context: v_min needs 3 values");
        ctx.v_min = Eigen::Vector3d(v[0], v[1], v[2]);
        ctx.delta = j.at("delta").get<double>();
        ctx.validate();
        return ctx;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("context: ") + e.what());
    }
}

void write_context(std::ostream &out, const NormalizationContext &ctx) {
    nlohmann::json j;
    j["v_min"] = {ctx.v_min.x(), ctx.v_min.y(), ctx.v_min.z()};
    j["delta"] = ctx.delta;
    out << j.dump(2) << '\n';
}

void write_graph(std::ostream &out, const MolecularGraph &g, std::size_t index) {
    const auto m = static_cast<int>(g.elements.size());
    out << "molecule " << index << " atoms " << m << " connected "
        << (g.connected ? 1 : 0) << '\n';
    for (int i = 0; i < m; ++i) {
        out << "atom " << i << ' ' << element_symbol(g.elements[static_cast<std::size_t>(i)])
            << " H " << (g.implicit_h.empty() ? 0 : g.implicit_h[static_cast<std::size_t>(i)])
            << '\n';
    }
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            if (g.bond_order(i, j) > 0) {
                out << "bond " << i << ' ' << j << ' ' << g.bond_order(i, j) << '\n';
            }
        }
    }
}

} // namespace lpqc::data
