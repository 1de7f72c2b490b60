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

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpqc/qcore.hpp"

namespace lpqc::data {

enum class Element { C = 0, N = 1, O = 2, F = 3 };

std::string element_symbol(Element e);
/// Throws DataError for anything outside {C, N, O, F}.
Element element_from_symbol(const std::string &s);
/// Single-bond covalent radius in angstrom.
double covalent_radius(Element e);
/// Maximum (and target) valence: C 4, N 3, O 2, F 1.
int max_valence(Element e);

struct Atom {
    Element element = Element::C;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

/// Heavy atoms in canonical order.
struct MoleculeRecord {
    std::vector<Atom> atoms;
};

struct NormalizationContext {
    Eigen::Vector3d v_min = Eigen::Vector3d::Zero();
    double delta = 1.0;

    void validate() const;
};

/// Bounding-box context of the QM9 subset used for the molecule experiments.
NormalizationContext qm9_context();

/// Number of amplitudes (7 qubits).
inline constexpr int kCodecDim = 128;
/// Atom slots that fit next to their auxiliary entries below the last
/// amplitude: 8m <= 127.
inline constexpr int kMaxAtoms = 15;

/// Translate the centroid to the origin and rotate the first atom onto +z.
/// The rotation is skipped when the first atom sits at the centroid.
MoleculeRecord canonicalize_pose(const MoleculeRecord &mol);

/**
 * Amplitude encoding on 7 qubits. The pose is canonicalised first. Blocks
 * (x~, y~, z~, C, N, O, F) for each atom, then alpha_i = sqrt(max(0, 3 -
 * |v~_i|^2)), zero padding, and the whole vector divided by 2 sqrt(m).
 * With `store_count` the last amplitude holds m and the vector is
 * renormalised; otherwise the last amplitude is 0.
 */
qcore::StateVector encode_molecule(const MoleculeRecord &mol,
                                   const NormalizationContext &ctx,
                                   bool store_count = false);

/// Raw feature vector before the global division (length 128, last slot 0).
RVector molecule_features(const MoleculeRecord &mol,
                          const NormalizationContext &ctx);

enum class ScaleMode { Paper2x, Strict1x };

ScaleMode scale_mode_from_string(const std::string &s);
std::string to_string(ScaleMode m);

struct DecodeOptions {
    ScaleMode scale = ScaleMode::Strict1x;
    std::optional<int> m_override;
    double tau = 0.4;
    /// The state was encoded with store_count on.
    bool count_slot = false;
};

/**
 * Occupied slot count of an amplitude-modulus vector: the smallest k whose
 * slots 0..k-1 all carry rescaled type mass 2 sqrt(k) sum_t x > tau and
 * whose rescaled squared mass past the k-atom layout (indices 8k..126) is at
 * most tau^2. Returns 0 if no slot is occupied.
 */
int detect_atom_count(const RVector &x, double tau = 0.4);

/// Positions in angstrom and argmax element types.
MoleculeRecord decode_state(const qcore::StateVector &state,
                            const NormalizationContext &ctx,
                            const DecodeOptions &opts = {});

struct MolecularGraph {
    std::vector<Element> elements;
    Eigen::MatrixXi adjacency;  // AC
    Eigen::MatrixXi bond_order; // BO
    std::vector<int> implicit_h;
    bool connected = true;
};

/// Covalent-radius bonding with a 2.2 scale and valence gating at both ends;
/// pairs are visited in increasing distance. Fills adjacency and connected.
MolecularGraph infer_bonds(const MoleculeRecord &mol, double scale = 2.2);

/// Maximum-cardinality matching on an undirected 0/1 adjacency matrix.
/// mate[v] is the partner of v or -1. Ties resolve toward lower indices.
std::vector<int> max_cardinality_matching(const Eigen::MatrixXi &adj);

/**
 * BO starts at AC; each round matches unsaturated bonded pairs whose order
 * is below 3 and raises the matched bonds by one, until no pair qualifies.
 * Leftover deficiencies become implicit hydrogens.
 */
MolecularGraph complete_valences(MolecularGraph graph);

/// Molecules as text: a count line, then one "El x y z" line per atom.
std::vector<MoleculeRecord> read_molecules(std::istream &in);
void write_molecules(std::ostream &out, const std::vector<MoleculeRecord> &mols);

/// JSON object {"v_min": [x, y, z], "delta": d}.
NormalizationContext read_context(std::istream &in);
void write_context(std::ostream &out, const NormalizationContext &ctx);

/// Text listing of a graph: header, atoms with implicit H, bonds with order.
void write_graph(std::ostream &out, const MolecularGraph &g, std::size_t index);

} // namespace lpqc::data
