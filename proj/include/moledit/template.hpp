//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLEDIT_TEMPLATE_HPP_
#define MOLEDIT_TEMPLATE_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "moledit/molecule.hpp"
#include "moledit/wl.hpp"

namespace moledit {

// Template actions address atoms through slots: c<k> is the k-th center
// atom in canonical order, a<k> the k-th atom added while applying.
struct Slot {
  bool added = false;
  int index = 0;

  friend auto operator<=>(const Slot &, const Slot &) = default;
};

std::string slot_text(const Slot &slot);

enum class AromaticChange : uint8_t { kNone, kSet, kClear };
enum class ChiralityChange : uint8_t { kNone, kToNone, kToCW, kToCCW };

// Adds a new atom bonded to an atom already in the graph. The payload is
// the added atom's final state plus the order of the attaching bond.
struct AddAtomAction {
  int element = 0;
  int formal_charge = 0;
  int num_h = 0;
  bool aromatic = false;
  int bond_order_x2 = kSingleX2;
  Slot attach;

  friend bool operator==(const AddAtomAction &, const AddAtomAction &) = default;
};

// Property deltas on an existing atom. Chirality targets are parities in
// the application frame (center slots, then added atoms, then remaining
// product atoms by canonical rank; implicit hydrogen last).
struct EditAtomAction {
  int charge_delta = 0;
  int h_delta = 0;
  AromaticChange aromatic_change = AromaticChange::kNone;
  ChiralityChange chirality_change = ChiralityChange::kNone;
  Slot slot;

  friend bool operator==(const EditAtomAction &, const EditAtomAction &) = default;
};

// Order delta on a bond (0 = no bond, so -1.0 deletes a single bond and a
// creation starts from 0), plus the target stereo and direction states.
struct EditBondAction {
  int order_delta_x2 = 0;
  BondStereo stereo_target = BondStereo::kNone;
  BondDir dir_target = BondDir::kNone;
  Slot from;
  Slot to;

  friend bool operator==(const EditBondAction &, const EditBondAction &) = default;
};

using EditAction = std::variant<AddAtomAction, EditAtomAction, EditBondAction>;

enum class TemplateKind : uint8_t { kAtom, kBond };

// Product-side state of the center slots, kept as a matching aid for site
// enumeration. Not part of the template key.
struct SlotSignature {
  int element = 0;
  int formal_charge = 0;
  bool aromatic = false;
  int implicit_h = 0;

  friend bool operator==(const SlotSignature &, const SlotSignature &) = default;
};

struct CenterSignature {
  std::vector<SlotSignature> slots;
  struct SigBond {
    int u = 0, v = 0;
    int order_x2 = 0;
    friend bool operator==(const SigBond &, const SigBond &) = default;
  };
  std::vector<SigBond> bonds;

  int find_bond(int u, int v) const;  // index into bonds, or -1
  friend bool operator==(const CenterSignature &, const CenterSignature &) = default;
};

struct Template {
  int n_center = 0;
  TemplateKind kind = TemplateKind::kAtom;
  std::vector<EditAction> actions;
  CenterSignature signature;
};

struct ExtractionResult {
  Template tmpl;
  std::string key;
  // Product atom index per center slot, in slot order; the anchor of the
  // source reaction is center_atoms[0] (and [1] for bond templates).
  std::vector<int> center_atoms;
};

// Single-shot diff queries against the initial working graph (= product).
// Slot fields in the returned action hold universe ids rather than template
// slots; extract_template renumbers them after the center set is known.
std::optional<EditAction> diff_atom_action(const Reaction &rxn, int universe_atom);
std::optional<EditAction> diff_bond_action(const Reaction &rxn, int universe_a,
                                           int universe_b);

// Algorithm: sweep atoms in canonical order, applying the first applicable
// atom action per atom and then bond actions per ordered pair, until the
// working graph reaches the substrates. Throws EmptyCenter for identity
// reactions and NonTerminating when no action can make progress.
ExtractionResult extract_template(const Reaction &rxn, const CanonicalOrder &order);

// Key grammar (bit-exact):
//   N "|" kind "|" action (";" action)*
//   AA:el=<int>,chg=<int>,hs=<int>,ar=<0|1>,ord=<dec>@<slot>
//   EA:dchg=<int>,dhs=<int>,ar=<n|s|c>,chir=<n|0|+|->@<slot>
//   EB:dord=<dec>,st=<n|c|t>,dir=<n|u|d>@<slot>,<slot>
std::string encode_template(const Template &t);
Template decode_template(std::string_view key);  // MalformedKey on bad input

struct TemplateEntry {
  int id = -1;
  std::string key;
  Template tmpl;
  int64_t count = 0;
  std::string first_example;
};

// Deduplicated template store. Sealing assigns dense ids in sorted key
// order, making library files independent of insertion and worker order.
class TemplateLibrary {
public:
  TemplateLibrary() = default;
  // order_ holds pointers into by_key_ nodes, so copying is disabled; map
  // moves keep the nodes alive.
  TemplateLibrary(const TemplateLibrary &) = delete;
  TemplateLibrary &operator=(const TemplateLibrary &) = delete;
  TemplateLibrary(TemplateLibrary &&) = default;
  TemplateLibrary &operator=(TemplateLibrary &&) = default;

  void add(const std::string &key, const Template &tmpl,
           const std::string &example_id);
  void merge(const TemplateLibrary &other);
  void seal();

  bool sealed() const { return sealed_; }
  int size() const { return static_cast<int>(by_key_.size()); }
  int64_t total_count() const;
  const TemplateEntry *find(std::string_view key) const;
  const TemplateEntry *find_id(int id) const;
  // Entries in id order; valid after seal().
  const std::vector<const TemplateEntry *> &entries() const { return order_; }

  void write_jsonl(std::ostream &os) const;
  static TemplateLibrary read_jsonl(std::istream &is);

private:
  std::map<std::string, TemplateEntry, std::less<>> by_key_;
  std::vector<const TemplateEntry *> order_;
  bool sealed_ = false;
};

TemplateLibrary library_build(
    const std::vector<std::pair<std::string, ExtractionResult>> &extractions);
TemplateLibrary library_merge(const TemplateLibrary &a, const TemplateLibrary &b);

}  // namespace moledit

#endif  // MOLEDIT_TEMPLATE_HPP_
