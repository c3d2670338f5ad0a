//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLEDIT_MOLECULE_HPP_
#define MOLEDIT_MOLECULE_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "moledit/errors.hpp"

namespace moledit {

enum class Chirality : uint8_t { kNone, kCW, kCCW };
enum class BondStereo : uint8_t { kNone, kCis, kTrans };
enum class BondDir : uint8_t { kNone, kUp, kDown };

// Atom as written in a SMILES string. Hydrogens are never graph nodes;
// explicit_h is the bracket H count (-1 for organic-subset atoms, whose
// hydrogen count is filled in by valence rules).
struct AtomSpec {
  int element = 0;
  int isotope = 0;  // 0 = unspecified
  int formal_charge = 0;
  int explicit_h = -1;
  bool aromatic = false;
  Chirality chirality = Chirality::kNone;
  int atom_map = 0;

  friend bool operator==(const AtomSpec &, const AtomSpec &) = default;
};

struct Atom {
  AtomSpec spec;
  int implicit_h = 0;
  // Neighbor sequence that fixes the meaning of spec.chirality (@ = CCW
  // looking from the first entry). -1 marks the implicit-hydrogen position.
  // Empty unless chirality is set.
  std::vector<int> chiral_order;

  friend bool operator==(const Atom &, const Atom &) = default;
};

// Bond orders are stored doubled so the aromatic order 1.5 stays integral.
inline constexpr int kSingleX2 = 2;
inline constexpr int kAromaticX2 = 3;
inline constexpr int kDoubleX2 = 4;
inline constexpr int kTripleX2 = 6;

struct Bond {
  int a = 0;
  int b = 0;
  int order_x2 = kSingleX2;
  // Cis/trans of a double bond, relative to one reference neighbor on each
  // side: kCis means ref_a and ref_b lie on the same side. -1 refs mean the
  // implicit hydrogen.
  BondStereo stereo = BondStereo::kNone;
  int stereo_ref_a = -1;
  int stereo_ref_b = -1;
  // Up/down mark of a directional single bond, in a->b orientation.
  BondDir dir = BondDir::kNone;

  double order() const { return order_x2 / 2.0; }
  int other(int atom) const { return atom == a ? b : a; }

  friend bool operator==(const Bond &, const Bond &) = default;
};

// Labeled multigraph of atoms and bonds, possibly multi-component. Value
// type; all pipeline operations take copies or const references, so sharing
// a Molecule read-only across threads is safe.
class Molecule {
public:
  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Atom &atom(int i) const { return atoms_[i]; }
  Atom &atom(int i) { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }
  Bond &bond(int i) { return bonds_[i]; }
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }

  // (neighbor atom, bond index) pairs, sorted by neighbor index.
  const std::vector<std::pair<int, int>> &neighbors(int i) const {
    return adj_[i];
  }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

  // Bond index joining a and b, or -1.
  int find_bond(int a, int b) const;
  int bond_order_x2(int a, int b) const;  // 0 when not bonded

  int add_atom(const AtomSpec &spec, int implicit_h);
  // Returns the new bond's index; throws on self-loops and duplicates.
  int add_bond(int a, int b, int order_x2);
  void remove_bond(int bond_index);

  bool operator==(const Molecule &rhs) const = default;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
};

// Product graph P plus substrate graph S, linked by atom maps. The
// correspondence vectors are filled in by map_correspondence.
struct Reaction {
  Molecule product;
  Molecule substrates;
  std::string raw;  // source reaction SMILES, when parsed from text
  std::vector<int> product_to_substrate;  // substrate index per product atom
  std::vector<int> substrate_to_product;  // -1 marks substrate-only atoms
  bool validated = false;
};

struct AtomRanks {
  std::vector<int> rank;  // dense, 0-based, canonical order
  int num_classes = 0;
};

// --- rank refinement core ------------------------------------------------
//
// Iterative neighborhood refinement shared by canonical_ranks and the
// Weisfeiler-Lehman labeling. Nodes start from order-significant initial
// keys; each round a node's key becomes (own rank, sorted multiset of
// (edge label, neighbor rank)) and keys are renumbered to dense ranks by
// lexicographic order. Deterministic across runs and platforms, invariant
// under node-index permutation, and collision-free (no hashing involved).

struct LabeledGraph {
  int num_nodes = 0;
  // adj[v] = (edge label, neighbor) pairs
  std::vector<std::vector<std::pair<int64_t, int>>> adj;
};

AtomRanks refine_partition(const LabeledGraph &graph,
                           const std::vector<uint64_t> &initial_keys,
                           int max_rounds);

// Initial invariant of an atom: (element, charge, aromatic, degree,
// implicit_h, isotope) packed most-significant-first into a sortable key.
uint64_t atom_invariant_key(const Molecule &mol, int atom);

// --- molgraph operations ---------------------------------------------------

// Partition by bond connectivity; relative atom order inside each component
// is preserved, as are atom maps.
std::vector<Molecule> connected_components(const Molecule &mol);

// Per-atom component id plus component count.
std::pair<std::vector<int>, int> component_labels(const Molecule &mol);

// Morgan-style refinement over the whole (possibly multi-component) graph.
// Automorphic atoms share a rank; the partition is refinement-stable.
AtomRanks canonical_ranks(const Molecule &mol);

// canonical_ranks driven to a total order by repeated individualization of
// the smallest tied class. Backs the canonical writer's emission order and
// the application frame; for automorphic atoms any pick is equivalent.
AtomRanks individualized_ranks(const Molecule &mol);

// True iff canonical writes (atom maps stripped) are byte-identical.
bool molecules_isomorphic(const Molecule &a, const Molecule &b);

// Builds the atom-map correspondence between product and substrates and
// validates it, throwing DuplicateMapNumber / UnmappedProductAtom /
// ProductAtomMissingFromSubstrates / ElementMismatch.
void map_correspondence(Reaction &rxn);

// Rebuilds the molecule with atom i of the result = atom perm[i] of mol.
// Bonds, chiral reference orders and stereo references are remapped.
Molecule permute_atoms(const Molecule &mol, const std::vector<int> &perm);

// Parity sign (+1 / -1) of the permutation taking `from` to `to`; both must
// hold the same distinct entries. Returns 0 when they differ as sets.
int permutation_parity(const std::vector<int> &from, const std::vector<int> &to);

// The atom's chirality tag re-expressed against a different neighbor order.
Chirality chirality_in_order(const Atom &atom, const std::vector<int> &order);

std::string_view element_symbol(int z);
int element_number(std::string_view symbol);  // 0 if unknown

}  // namespace moledit

#endif  // MOLEDIT_MOLECULE_HPP_
