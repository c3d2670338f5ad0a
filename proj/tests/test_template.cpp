//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moledit/template.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "moledit/apply.hpp"
#include "moledit/smiles.hpp"
#include "moledit/wl.hpp"
#include "testutil.hpp"

namespace moledit {
namespace {

Reaction make_reaction(const std::string &rxn_smiles) {
  Reaction rxn = parse_reaction(rxn_smiles);
  map_correspondence(rxn);
  return rxn;
}

ExtractionResult extract_wl(const std::string &rxn_smiles) {
  Reaction rxn = make_reaction(rxn_smiles);
  return extract_template(rxn, canonical_atom_order(rxn, OrderStrategy::kWLCanonical));
}

constexpr const char *kEsterification =
    "[CH3:1][C:2](=[O:3])Cl.[OH:4][CH2:5][CH3:6]"
    ">>[CH3:1][C:2](=[O:3])[O:4][CH2:5][CH3:6]";

constexpr const char *kEsterificationKey =
    "2|bond|AA:el=17,chg=0,hs=0,ar=0,ord=1.0@c0;"
    "EB:dord=-1.0,st=n,dir=n@c0,c1;"
    "EA:dchg=0,dhs=1,ar=n,chir=n@c1";

TEST_CASE("esterification extracts the reference template") {
  ExtractionResult result = extract_wl(kEsterification);
  CHECK(result.tmpl.n_center == 2);
  CHECK(result.tmpl.kind == TemplateKind::kBond);
  REQUIRE(result.tmpl.actions.size() == 3);

  const auto &add = std::get<AddAtomAction>(result.tmpl.actions[0]);
  CHECK(add.element == 17);
  CHECK(add.formal_charge == 0);
  CHECK(add.num_h == 0);
  CHECK(!add.aromatic);
  CHECK(add.bond_order_x2 == kSingleX2);
  CHECK(add.attach == Slot{false, 0});

  const auto &bond = std::get<EditBondAction>(result.tmpl.actions[1]);
  CHECK(bond.order_delta_x2 == -kSingleX2);
  CHECK(bond.from == Slot{false, 0});
  CHECK(bond.to == Slot{false, 1});

  const auto &edit = std::get<EditAtomAction>(result.tmpl.actions[2]);
  CHECK(edit.h_delta == 1);
  CHECK(edit.charge_delta == 0);
  CHECK(edit.slot == Slot{false, 1});

  CHECK(result.key == kEsterificationKey);
  // c0 is the carbonyl carbon, c1 the ester oxygen
  CHECK(result.center_atoms == std::vector<int>{1, 3});
  // signature records the product-side state of the slots
  REQUIRE(result.tmpl.signature.slots.size() == 2);
  CHECK(result.tmpl.signature.slots[0].element == 6);
  CHECK(result.tmpl.signature.slots[1].element == 8);
  CHECK(result.tmpl.signature.find_bond(0, 1) >= 0);
}

TEST_CASE("single-shot diff queries") {
  Reaction rxn = make_reaction(kEsterification);
  // universe ids: product atoms 0..5, the substrate-only Cl is 6

  auto add = diff_atom_action(rxn, 6);
  REQUIRE(add.has_value());
  const auto &payload = std::get<AddAtomAction>(*add);
  CHECK(payload.element == 17);
  CHECK(payload.num_h == 0);
  CHECK(payload.bond_order_x2 == kSingleX2);
  CHECK(payload.attach.index == 1);  // carbonyl carbon, as a universe id

  auto oxygen = diff_atom_action(rxn, 3);
  REQUIRE(oxygen.has_value());
  CHECK(std::get<EditAtomAction>(*oxygen).h_delta == 1);

  CHECK(!diff_atom_action(rxn, 0).has_value());  // untouched methyl

  auto severed = diff_bond_action(rxn, 1, 3);
  REQUIRE(severed.has_value());
  CHECK(std::get<EditBondAction>(*severed).order_delta_x2 == -kSingleX2);
  CHECK(!diff_bond_action(rxn, 1, 2).has_value());  // carbonyl stays double
  CHECK(!diff_bond_action(rxn, 0, 1).has_value());
}

TEST_CASE("identity reaction yields EmptyCenter") {
  Reaction rxn = make_reaction("[CH4:1]>>[CH4:1]");
  CanonicalOrder order = canonical_atom_order(rxn, OrderStrategy::kInputOrder);
  try {
    extract_template(rxn, order);
    FAIL("expected EmptyCenter");
  } catch (const MolError &err) {
    CHECK(err.code() == ErrorCode::kEmptyCenter);
  }
}

TEST_CASE("extraction is invariant under input permutation") {
  std::mt19937_64 rng(424242);
  for (const char *rxn_smiles :
       {kEsterification,
        "[CH3:1][CH:2]=[CH:3][CH2:14][CH3:15].[B:4]([O:5][CH3:6])([O:7][CH3:8])"
        "[B:9]([O:10][CH3:11])[O:12][CH3:13]>>[CH3:1][CH:2]([B:4]([O:5][CH3:6])"
        "[O:7][CH3:8])[CH:3]([B:9]([O:10][CH3:11])[O:12][CH3:13])[CH2:14][CH3:15]"}) {
    std::string reference = extract_wl(rxn_smiles).key;
    for (int trial = 0; trial < 10; ++trial) {
      std::string shuffled = test::shuffled_reaction_smiles(rxn_smiles, rng);
      CHECK_MESSAGE(extract_wl(shuffled).key == reference, shuffled);
    }
  }
}

TEST_CASE("input-order extraction is sensitive where WL is not") {
  // the same esterification, once written from the acyl side and once from
  // the alcohol side
  std::string from_acyl = kEsterification;
  std::string from_alcohol =
      "[OH:4][CH2:5][CH3:6].[CH3:1][C:2](=[O:3])Cl"
      ">>[O:4]([CH2:5][CH3:6])[C:2]([CH3:1])=[O:3]";
  auto key_with = [&](const std::string &text, OrderStrategy strategy) {
    Reaction rxn = make_reaction(text);
    return extract_template(rxn, canonical_atom_order(rxn, strategy)).key;
  };
  CHECK(key_with(from_acyl, OrderStrategy::kWLCanonical) ==
        key_with(from_alcohol, OrderStrategy::kWLCanonical));
  // the rewrite changes which edit the input order reaches first
  CHECK(key_with(from_acyl, OrderStrategy::kInputOrder) !=
        key_with(from_alcohol, OrderStrategy::kInputOrder));
}

TEST_CASE("key grammar round trip") {
  Template decoded = decode_template(kEsterificationKey);
  CHECK(encode_template(decoded) == kEsterificationKey);
  CHECK(decoded.n_center == 2);
  CHECK(decoded.kind == TemplateKind::kBond);
  CHECK(decoded.actions.size() == 3);

  ExtractionResult result = extract_wl(kEsterification);
  Template again = decode_template(result.key);
  CHECK(again.n_center == result.tmpl.n_center);
  CHECK(again.kind == result.tmpl.kind);
  CHECK(again.actions == result.tmpl.actions);

  // half-order deltas survive the decimal grammar
  Template half;
  half.n_center = 1;
  half.kind = TemplateKind::kAtom;
  EditBondAction eb;
  eb.order_delta_x2 = -1;  // aromatic -> single is -0.5
  eb.from = Slot{false, 0};
  eb.to = Slot{true, 0};
  AddAtomAction aa;
  aa.element = 6;
  aa.bond_order_x2 = kAromaticX2;
  aa.attach = Slot{false, 0};
  half.actions = {EditAction(aa), EditAction(eb)};
  std::string key = encode_template(half);
  CHECK(key == "1|atom|AA:el=6,chg=0,hs=0,ar=0,ord=1.5@c0;"
               "EB:dord=-0.5,st=n,dir=n@c0,a0");
  CHECK(decode_template(key).actions == half.actions);
}

TEST_CASE("malformed keys are rejected") {
  auto rejects = [](const char *key) {
    try {
      decode_template(key);
      return false;
    } catch (const MolError &err) {
      return err.code() == ErrorCode::kMalformedKey;
    }
  };
  CHECK(rejects("0|atom|"));
  CHECK(rejects("1|atom|"));
  CHECK(rejects("1|ring|EA:dchg=0,dhs=1,ar=n,chir=n@c0"));
  CHECK(rejects("1|atom|EA:dchg=0,dhs=1,ar=n,chir=n@c7"));
  CHECK(rejects("1|atom|EA:dchg=0,dhs=1,ar=n,chir=n@a0"));
  CHECK(rejects("1|atom|EB:dord=0.3,st=n,dir=n@c0,c1"));
  CHECK(rejects("2|bond|EB:dord=1.0,st=n,dir=n@c0,c0"));
  CHECK(rejects("1|atom|XX:el=6@c0"));
  CHECK(rejects("1|bond|EA:dchg=0,dhs=1,ar=n,chir=n@c0"));
}

TEST_CASE("library dedups by key and seals deterministic ids") {
  ExtractionResult ester = extract_wl(kEsterification);
  ExtractionResult methyl = extract_wl(
      "[CH3:1][C:2](=[O:3])Cl.[OH:4][CH3:5]>>[CH3:1][C:2](=[O:3])[O:4][CH3:5]");
  // two esterifications with different alcohols share one minimal template
  CHECK(ester.key == methyl.key);

  ExtractionResult nitrile = extract_wl("[N:1]=[N:2]>>[N:1]#[N:2]");
  CHECK(nitrile.key != ester.key);

  TemplateLibrary lib = library_build({{"rx-a", ester}, {"rx-b", methyl},
                                       {"rx-c", nitrile}});
  CHECK(lib.size() == 2);
  CHECK(lib.total_count() == 3);
  const TemplateEntry *entry = lib.find(ester.key);
  REQUIRE(entry != nullptr);
  CHECK(entry->count == 2);
  CHECK(entry->first_example == "rx-a");

  // merge with an empty library is the identity
  TemplateLibrary empty;
  TemplateLibrary merged = library_merge(lib, empty);
  CHECK(merged.size() == lib.size());
  CHECK(merged.total_count() == lib.total_count());

  TemplateLibrary other = library_build({{"rx-d", nitrile}});
  TemplateLibrary ab = library_merge(lib, other);
  TemplateLibrary ba = library_merge(other, lib);
  CHECK(ab.size() == ba.size());
  CHECK(ab.total_count() == ba.total_count());
  std::ostringstream sab, sba;
  ab.write_jsonl(sab);
  ba.write_jsonl(sba);
  CHECK(sab.str() == sba.str());
}

TEST_CASE("dearomatization carries flag edits and half-order deltas") {
  // retro direction: aromatic benzene back to a localized cyclohexatriene
  Reaction rxn = make_reaction(
      "[CH:1]1=[CH:2][CH:3]=[CH:4][CH:5]=[CH:6]1"
      ">>[cH:1]1[cH:2][cH:3][cH:4][cH:5][cH:6]1");
  ExtractionResult result = extract_template(
      rxn, canonical_atom_order(rxn, OrderStrategy::kWLCanonical));
  int clears = 0;
  int half_deltas = 0;
  for (const EditAction &action : result.tmpl.actions) {
    if (const auto *edit = std::get_if<EditAtomAction>(&action)) {
      if (edit->aromatic_change == AromaticChange::kClear) ++clears;
    }
    if (const auto *bond = std::get_if<EditBondAction>(&action)) {
      CHECK(std::abs(bond->order_delta_x2) == 1);  // 1.5 -> 1.0 or 2.0
      ++half_deltas;
    }
  }
  CHECK(clears == 6);
  CHECK(half_deltas == 6);
  CHECK(result.tmpl.n_center == 6);
  Molecule substrates =
      apply_template(rxn.product, result.tmpl, result.center_atoms);
  CHECK(molecules_isomorphic(substrates, rxn.substrates));

  // the single-shot diff view of one ring bond: aromatic to double is +0.5
  auto bond_diff = diff_bond_action(rxn, 0, 1);
  REQUIRE(bond_diff.has_value());
  CHECK(std::abs(std::get<EditBondAction>(*bond_diff).order_delta_x2) == 1);
}

TEST_CASE("a substrate-side stereocenter is recreated on application") {
  // ketone product, chiral alcohol substrate: the edit list must set the
  // tetrahedral tag, not just move hydrogens
  Reaction rxn = make_reaction(
      "[C@H:1]([OH:2])([CH3:3])[CH2:4][CH3:5]"
      ">>[C:1](=[O:2])([CH3:3])[CH2:4][CH3:5]");
  ExtractionResult result = extract_template(
      rxn, canonical_atom_order(rxn, OrderStrategy::kWLCanonical));
  bool sets_chirality = false;
  for (const EditAction &action : result.tmpl.actions) {
    if (const auto *edit = std::get_if<EditAtomAction>(&action)) {
      if (edit->chirality_change == ChiralityChange::kToCW ||
          edit->chirality_change == ChiralityChange::kToCCW) {
        sets_chirality = true;
      }
    }
  }
  CHECK(sets_chirality);
  Molecule substrates =
      apply_template(rxn.product, result.tmpl, result.center_atoms);
  CHECK(molecules_isomorphic(substrates, rxn.substrates));
  // and the produced alcohol is the right enantiomer, not its mirror
  CHECK(!molecules_isomorphic(
      substrates, parse_molecule("[C@@H]([OH])([CH3])[CH2][CH3]")));
  CHECK(molecules_isomorphic(substrates,
                             parse_molecule("[C@H]([OH])([CH3])[CH2][CH3]")));
}

TEST_CASE("library JSONL round trip is byte identical") {
  ExtractionResult ester = extract_wl(kEsterification);
  ExtractionResult nitrile = extract_wl("[N:1]=[N:2]>>[N:1]#[N:2]");
  TemplateLibrary lib = library_build({{"rx-a", ester}, {"rx-b", nitrile}});
  std::ostringstream first;
  lib.write_jsonl(first);
  std::istringstream input(first.str());
  TemplateLibrary reread = TemplateLibrary::read_jsonl(input);
  std::ostringstream second;
  reread.write_jsonl(second);
  CHECK(first.str() == second.str());
  CHECK(reread.size() == lib.size());
  const TemplateEntry *entry = reread.find(ester.key);
  REQUIRE(entry != nullptr);
  CHECK(entry->tmpl.signature.slots.size() == 2);
}

}  // namespace
}  // namespace moledit
