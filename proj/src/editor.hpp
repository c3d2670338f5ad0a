//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLEDIT_SRC_EDITOR_HPP_
#define MOLEDIT_SRC_EDITOR_HPP_

#include <algorithm>
#include <cstdint>
#include <vector>

#include "moledit/molecule.hpp"
#include "moledit/template.hpp"

namespace moledit::internal {

// Application-frame key: center/original product atoms first by canonical
// rank, then added atoms by creation order. Chirality and stereo targets in
// edit actions are parities relative to this frame, so extraction and
// application resolve them identically.
inline int64_t pack_app_key(int group, int major, int minor) {
  return (static_cast<int64_t>(group) << 60) |
         (static_cast<int64_t>(major) << 30) | minor;
}

// Executes edit actions on a molecule. Both template extraction (on its
// working graph) and template application (on an input product) drive this
// one engine, which is what makes apply(extract(R)) an exact replay.
class GraphEditor {
public:
  GraphEditor(Molecule mol, std::vector<int64_t> app_keys)
      : mol_(std::move(mol)), keys_(std::move(app_keys)) {}

  const Molecule &mol() const { return mol_; }
  Molecule take() { return std::move(mol_); }
  int64_t app_key(int atom) const { return keys_[atom]; }
  const std::vector<int64_t> &frame() const { return keys_; }

  int add_atom(const AddAtomAction &action, int attach_atom) {
    AtomSpec spec;
    spec.element = action.element;
    spec.formal_charge = action.formal_charge;
    spec.explicit_h = action.num_h;
    spec.aromatic = action.aromatic;
    int idx = mol_.add_atom(spec, action.num_h);
    keys_.push_back(pack_app_key(1, added_count_++, 0));
    mol_.add_bond(attach_atom, idx, action.bond_order_x2);
    return idx;
  }

  void edit_atom(int atom, const EditAtomAction &action) {
    Atom &a = mol_.atom(atom);
    a.spec.formal_charge += action.charge_delta;
    a.implicit_h += action.h_delta;
    if (action.aromatic_change == AromaticChange::kSet) a.spec.aromatic = true;
    if (action.aromatic_change == AromaticChange::kClear) a.spec.aromatic = false;
    switch (action.chirality_change) {
      case ChiralityChange::kNone:
        break;
      case ChiralityChange::kToNone:
        a.spec.chirality = Chirality::kNone;
        a.chiral_order.clear();
        break;
      case ChiralityChange::kToCW:
      case ChiralityChange::kToCCW:
        a.chiral_order = frame_neighbor_order(atom);
        a.spec.chirality = action.chirality_change == ChiralityChange::kToCW
                               ? Chirality::kCW
                               : Chirality::kCCW;
        break;
    }
  }

  void edit_bond(int from_atom, int to_atom, const EditBondAction &action) {
    int bi = mol_.find_bond(from_atom, to_atom);
    if (bi < 0) {
      if (action.order_delta_x2 <= 0) {
        throw_error(ErrorCode::kInvalidResult,
                    "bond edit on a missing bond with non-positive delta");
      }
      bi = mol_.add_bond(from_atom, to_atom, action.order_delta_x2);
    } else {
      int order = mol_.bond(bi).order_x2 + action.order_delta_x2;
      if (order == 0) {
        mol_.remove_bond(bi);
        return;  // stereo and direction vanish with the bond
      }
      if (order < 0) {
        throw_error(ErrorCode::kInvalidResult, "bond order driven negative");
      }
      mol_.bond(bi).order_x2 = order;
    }
    Bond &bond = mol_.bond(bi);
    bond.stereo = BondStereo::kNone;
    bond.stereo_ref_a = bond.stereo_ref_b = -1;
    if (action.stereo_target != BondStereo::kNone) {
      int ref_a = frame_ref(bond.a, bond.b);
      int ref_b = frame_ref(bond.b, bond.a);
      if (ref_a >= 0 && ref_b >= 0) {
        bond.stereo = action.stereo_target;
        bond.stereo_ref_a = ref_a;
        bond.stereo_ref_b = ref_b;
      }
    }
    bond.dir = bond.a == from_atom ? action.dir_target : flipped(action.dir_target);
  }

  // Current neighbors in frame order, implicit hydrogen last; the reference
  // order stored when an action sets a chirality tag.
  std::vector<int> frame_neighbor_order(int atom) const {
    std::vector<int> order;
    for (const auto &[nbr, bi] : mol_.neighbors(atom)) order.push_back(nbr);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      if (keys_[x] != keys_[y]) return keys_[x] < keys_[y];
      return x < y;
    });
    if (mol_.atom(atom).implicit_h > 0) order.push_back(-1);
    return order;
  }

  // Lowest-frame-key neighbor of endpoint, excluding the bond partner.
  int frame_ref(int endpoint, int exclude) const {
    int best = -1;
    for (const auto &[nbr, bi] : mol_.neighbors(endpoint)) {
      if (nbr == exclude) continue;
      if (best < 0 || keys_[nbr] < keys_[best] ||
          (keys_[nbr] == keys_[best] && nbr < best)) {
        best = nbr;
      }
    }
    return best;
  }

  // Post-application validity: hydrogen counts non-negative, charges sane,
  // bond orders in the legal set, aromatic flags consistent with 1.5-order
  // bonds.
  void check_valid() const {
    for (int i = 0; i < mol_.num_atoms(); ++i) {
      const Atom &a = mol_.atom(i);
      if (a.implicit_h < 0) {
        throw_error(ErrorCode::kInvalidResult, "negative hydrogen count");
      }
      if (a.spec.formal_charge < -8 || a.spec.formal_charge > 8) {
        throw_error(ErrorCode::kInvalidResult, "formal charge out of range");
      }
    }
    for (const Bond &bond : mol_.bonds()) {
      if (bond.order_x2 != kSingleX2 && bond.order_x2 != kAromaticX2 &&
          bond.order_x2 != kDoubleX2 && bond.order_x2 != kTripleX2) {
        throw_error(ErrorCode::kInvalidResult, "illegal bond order");
      }
      if (bond.order_x2 == kAromaticX2 &&
          (!mol_.atom(bond.a).spec.aromatic || !mol_.atom(bond.b).spec.aromatic)) {
        throw_error(ErrorCode::kInvalidResult,
                    "aromatic bond between non-aromatic atoms");
      }
      if (bond.stereo != BondStereo::kNone && bond.order_x2 != kDoubleX2) {
        throw_error(ErrorCode::kInvalidResult, "stereo flag on non-double bond");
      }
    }
    if (mol_.empty()) {
      throw_error(ErrorCode::kInvalidResult, "empty result molecule");
    }
  }

private:
  static BondDir flipped(BondDir d) {
    if (d == BondDir::kUp) return BondDir::kDown;
    if (d == BondDir::kDown) return BondDir::kUp;
    return BondDir::kNone;
  }

  Molecule mol_;
  std::vector<int64_t> keys_;
  int added_count_ = 0;
};

// Frame keys of an unmodified product: rank-ordered original atoms.
inline std::vector<int64_t> product_app_keys(const Molecule &product) {
  AtomRanks ranks = individualized_ranks(product);
  std::vector<int64_t> keys(product.num_atoms());
  for (int i = 0; i < product.num_atoms(); ++i) {
    keys[i] = pack_app_key(0, ranks.rank[i], i);
  }
  return keys;
}

}  // namespace moledit::internal

#endif  // MOLEDIT_SRC_EDITOR_HPP_
