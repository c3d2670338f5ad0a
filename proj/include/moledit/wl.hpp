//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLEDIT_WL_HPP_
#define MOLEDIT_WL_HPP_

#include <cstdint>
#include <vector>

#include "moledit/molecule.hpp"

namespace moledit {

// The atom universe of a validated reaction: every product atom (which has a
// substrate partner) followed by every substrate-only atom. Extraction,
// labeling and ordering all speak in universe ids.
class AtomUniverse {
public:
  explicit AtomUniverse(const Reaction &rxn);

  int size() const { return n_product_ + static_cast<int>(extra_.size()); }
  int num_product() const { return n_product_; }
  bool is_product(int universe) const { return universe < n_product_; }
  int product_index(int universe) const { return universe; }
  // Substrate atom index of any universe atom.
  int substrate_index(int universe) const {
    return is_product(universe) ? product_of_substrate_inverse_[universe]
                                : extra_[universe - n_product_];
  }
  // Universe id of a substrate atom index.
  int universe_of_substrate(int substrate) const {
    return universe_by_substrate_[substrate];
  }
  int atom_map(const Reaction &rxn, int universe) const {
    return is_product(universe)
               ? rxn.product.atom(universe).spec.atom_map
               : rxn.substrates.atom(substrate_index(universe)).spec.atom_map;
  }

private:
  int n_product_ = 0;
  std::vector<int> extra_;                        // substrate-only indices
  std::vector<int> universe_by_substrate_;
  std::vector<int> product_of_substrate_inverse_;  // product idx -> substrate idx
};

// Atoms touched by the reaction: property change, bond change, or a
// substrate-only atom bonded to a mapped atom. Edges join center atoms
// bonded in P or in S, labeled with both orders (0 = absent).
struct ReactionCenterGraph {
  std::vector<int> atoms;  // universe ids, ascending
  struct Edge {
    int u = 0, v = 0;              // universe ids
    int order_p_x2 = 0, order_s_x2 = 0;
  };
  std::vector<Edge> edges;

  bool contains(int universe) const;
};

struct WLTriple {
  uint64_t l_center = 0;
  uint64_t l_substrates = 0;
  uint64_t l_product = 0;  // zero for atoms absent from the product

  friend auto operator<=>(const WLTriple &, const WLTriple &) = default;
};

enum class OrderStrategy { kWLCanonical, kCanonicalSmilesOrder, kRandom, kInputOrder };

struct CanonicalOrder {
  std::vector<int> order;  // permutation of universe ids
  OrderStrategy strategy = OrderStrategy::kWLCanonical;
  uint64_t seed = 0;
};

// One round replaces a node label with its (own label, sorted multiset of
// (edge label, neighbor label)) signature, renumbered densely in
// lexicographic order; stops when the partition stops refining. Labels are
// therefore collision-free and permutation-invariant.
std::vector<uint64_t> wl_refine(const LabeledGraph &graph,
                                const std::vector<uint64_t> &initial_labels,
                                int max_rounds);

// Throws EmptyCenter for identity reactions.
ReactionCenterGraph reaction_center(const Reaction &rxn);

// Per-universe-atom labels from three refinement runs (center graph,
// substrate graph, product graph), each seeded with the molgraph atom
// invariants; absent-graph slots are zero.
std::vector<WLTriple> wl_triples(const Reaction &rxn);

// WLCanonical sorts by (l_C, l_S, l_P) with (is-center, atom map) as the
// tie-break; the other strategies implement the Table-3 alternatives.
CanonicalOrder canonical_atom_order(const Reaction &rxn, OrderStrategy strategy,
                                    uint64_t seed = 0);

// --- diff predicates shared by the center test and action extraction ------

// Chirality of `atom` in molecule `mol`, re-expressed against the neighbor
// order induced by frame_key (ascending), with the implicit-H sentinel last.
// frame_key must rank every current neighbor; ties broken by atom index.
Chirality chirality_in_frame(const Molecule &mol, int atom,
                             const std::vector<int64_t> &frame_key);

// Cis/trans flag of bond (a,b) re-expressed against the frame's reference
// neighbors (the lowest-frame-key neighbor on each side). kNone when the
// stored stereo is unset or its references are stale.
BondStereo stereo_in_frame(const Molecule &mol, int bond_index,
                           const std::vector<int64_t> &frame_key);

}  // namespace moledit

#endif  // MOLEDIT_WL_HPP_
