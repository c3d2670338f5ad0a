//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moledit/apply.hpp"

#include <algorithm>
#include <string>

#include "editor.hpp"

namespace moledit {

namespace {

bool slot_compatible(const Molecule &product, int atom, const SlotSignature &sig) {
  const AtomSpec &spec = product.atom(atom).spec;
  return spec.element == sig.element && spec.formal_charge == sig.formal_charge &&
         spec.aromatic == sig.aromatic;
}

// Depth-first extension of a partial assignment to all center slots. The
// signature's bond pattern must be reproduced exactly among assigned slots
// (present with the same order, absent otherwise).
void extend(const Molecule &product, const CenterSignature &sig,
            SiteAssignment &assignment, std::vector<bool> &used,
            std::vector<SiteAssignment> &out) {
  size_t slot = assignment.size();
  if (slot == sig.slots.size()) {
    out.push_back(assignment);
    return;
  }
  for (int atom = 0; atom < product.num_atoms(); ++atom) {
    if (used[atom] || !slot_compatible(product, atom, sig.slots[slot])) continue;
    bool bonds_ok = true;
    for (size_t prev = 0; prev < slot && bonds_ok; ++prev) {
      int sig_bond = sig.find_bond(static_cast<int>(prev), static_cast<int>(slot));
      int want = sig_bond < 0 ? 0 : sig.bonds[sig_bond].order_x2;
      bonds_ok = product.bond_order_x2(assignment[prev], atom) == want;
    }
    if (!bonds_ok) continue;
    assignment.push_back(atom);
    used[atom] = true;
    extend(product, sig, assignment, used, out);
    used[atom] = false;
    assignment.pop_back();
  }
}

}  // namespace

std::vector<SiteAssignment> match_sites(const Molecule &product,
                                        const Template &t, const Anchor &anchor) {
  const CenterSignature &sig = t.signature;
  bool has_signature = !sig.slots.empty();
  SiteAssignment seed;

  if (const auto *site = std::get_if<AtomSite>(&anchor)) {
    if (t.kind != TemplateKind::kAtom) {
      throw_error(ErrorCode::kAnchorMismatch, "bond template needs a bond site");
    }
    if (site->atom < 0 || site->atom >= product.num_atoms()) {
      throw_error(ErrorCode::kAnchorMismatch, "anchor atom out of range");
    }
    if (has_signature && !slot_compatible(product, site->atom, sig.slots[0])) {
      throw_error(ErrorCode::kAnchorMismatch,
                  "anchor atom does not match the c0 signature");
    }
    seed.push_back(site->atom);
  } else {
    const auto &pair = std::get<BondSite>(anchor);
    if (t.kind != TemplateKind::kBond) {
      throw_error(ErrorCode::kAnchorMismatch, "atom template needs an atom site");
    }
    if (pair.from < 0 || pair.from >= product.num_atoms() || pair.to < 0 ||
        pair.to >= product.num_atoms() || pair.from == pair.to) {
      throw_error(ErrorCode::kAnchorMismatch, "anchor atoms out of range");
    }
    int order = product.bond_order_x2(pair.from, pair.to);
    if (order == 0) {
      throw_error(ErrorCode::kAnchorMismatch, "anchor atoms are not bonded");
    }
    if (has_signature) {
      if (!slot_compatible(product, pair.from, sig.slots[0]) ||
          !slot_compatible(product, pair.to, sig.slots[1])) {
        throw_error(ErrorCode::kAnchorMismatch,
                    "anchor pair does not match the c0/c1 signature");
      }
      int sig_bond = sig.find_bond(0, 1);
      if (sig_bond >= 0 && sig.bonds[sig_bond].order_x2 != order) {
        throw_error(ErrorCode::kAnchorMismatch,
                    "anchor bond order does not match the signature");
      }
    }
    seed.push_back(pair.from);
    seed.push_back(pair.to);
  }

  if (static_cast<int>(seed.size()) >= t.n_center) {
    return {std::move(seed)};
  }
  if (!has_signature) {
    throw_error(ErrorCode::kAnchorMismatch,
                "template carries no signature to extend the anchor with");
  }
  std::vector<bool> used(product.num_atoms(), false);
  for (int atom : seed) used[atom] = true;
  std::vector<SiteAssignment> out;
  extend(product, sig, seed, used, out);
  return out;
}

Molecule apply_template(const Molecule &product, const Template &t,
                        const SiteAssignment &assignment) {
  if (static_cast<int>(assignment.size()) < t.n_center) {
    throw_error(ErrorCode::kSlotUnassigned, "assignment misses center slots");
  }
  internal::GraphEditor editor(product, internal::product_app_keys(product));
  std::vector<int> added;
  auto resolve = [&](const Slot &slot) {
    if (slot.added) {
      if (slot.index < 0 || slot.index >= static_cast<int>(added.size())) {
        throw_error(ErrorCode::kSlotUnassigned,
                    "added slot " + slot_text(slot) + " not created yet");
      }
      return added[slot.index];
    }
    if (slot.index < 0 || slot.index >= static_cast<int>(assignment.size())) {
      throw_error(ErrorCode::kSlotUnassigned,
                  "center slot " + slot_text(slot) + " unassigned");
    }
    int atom = assignment[slot.index];
    if (atom < 0 || atom >= product.num_atoms()) {
      throw_error(ErrorCode::kSlotUnassigned, "assigned atom out of range");
    }
    return atom;
  };

  for (const EditAction &action : t.actions) {
    if (const auto *add = std::get_if<AddAtomAction>(&action)) {
      added.push_back(editor.add_atom(*add, resolve(add->attach)));
    } else if (const auto *edit = std::get_if<EditAtomAction>(&action)) {
      editor.edit_atom(resolve(edit->slot), *edit);
    } else {
      const auto &bond = std::get<EditBondAction>(action);
      editor.edit_bond(resolve(bond.from), resolve(bond.to), bond);
    }
  }
  editor.check_valid();
  return editor.take();
}

std::vector<RankedPrediction> rank_applications(const Molecule &product,
                                                const Template &t,
                                                const Anchor &anchor, double p) {
  if (!(p > 0.0) || p > 1.0) {
    throw std::invalid_argument("probability must lie in (0, 1]");
  }
  std::vector<RankedPrediction> predictions;
  for (const SiteAssignment &assignment : match_sites(product, t, anchor)) {
    try {
      RankedPrediction pred;
      pred.substrates = apply_template(product, t, assignment);
      pred.assignment = assignment;
      predictions.push_back(std::move(pred));
    } catch (const MolError &err) {
      if (err.code() != ErrorCode::kInvalidResult &&
          err.code() != ErrorCode::kSlotUnassigned) {
        throw;
      }
      // chemically incompatible site; it does not count toward k
    }
  }
  if (predictions.empty()) {
    throw_error(ErrorCode::kNoValidSite, "no enumerated site survived");
  }
  double score = p / static_cast<double>(predictions.size());
  for (RankedPrediction &pred : predictions) pred.score = score;
  std::stable_sort(predictions.begin(), predictions.end(),
                   [](const RankedPrediction &x, const RankedPrediction &y) {
                     if (x.score != y.score) return x.score > y.score;
                     return x.assignment < y.assignment;
                   });
  return predictions;
}

std::vector<RankedPrediction> top_k_applications(
    const Molecule &product, const std::vector<ScoredSite> &candidates, int k) {
  std::vector<RankedPrediction> pool;
  for (const ScoredSite &site : candidates) {
    try {
      std::vector<RankedPrediction> preds =
          rank_applications(product, *site.tmpl, site.anchor, site.p);
      pool.insert(pool.end(), std::make_move_iterator(preds.begin()),
                  std::make_move_iterator(preds.end()));
    } catch (const MolError &err) {
      if (err.code() != ErrorCode::kNoValidSite &&
          err.code() != ErrorCode::kAnchorMismatch) {
        throw;
      }
    }
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const RankedPrediction &x, const RankedPrediction &y) {
                     if (x.score != y.score) return x.score > y.score;
                     return x.assignment < y.assignment;
                   });
  if (k >= 0 && static_cast<int>(pool.size()) > k) pool.resize(k);
  return pool;
}

}  // namespace moledit
