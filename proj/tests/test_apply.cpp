//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moledit/apply.hpp"

#include <cmath>

#include <doctest.h>

#include "moledit/smiles.hpp"
#include "moledit/template.hpp"
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
  return extract_template(rxn,
                          canonical_atom_order(rxn, OrderStrategy::kWLCanonical));
}

constexpr const char *kEsterification =
    "[CH3:1][C:2](=[O:3])Cl.[OH:4][CH2:5][CH3:6]"
    ">>[CH3:1][C:2](=[O:3])[O:4][CH2:5][CH3:6]";

ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const MolError &err) {
    return err.code();
  }
  FAIL("expected a MolError");
  return ErrorCode::kEmptyInput;
}

// Hand-built three-center atom template: c0 a carbon bonded to two oxygen
// slots; the action just moves a hydrogen onto c1. Used for site
// enumeration tests where the anchor underdetermines the assignment.
Template three_center_template() {
  Template t;
  t.n_center = 3;
  t.kind = TemplateKind::kAtom;
  t.signature.slots = {{6, 0, false, 2}, {8, 0, false, 1}, {8, 0, false, 1}};
  t.signature.bonds = {{0, 1, kSingleX2}, {0, 2, kSingleX2}};
  EditAtomAction edit;
  edit.h_delta = 1;
  edit.slot = Slot{false, 1};
  t.actions = {EditAction(edit)};
  return t;
}

TEST_CASE("fig-2 template regenerates acetyl chloride and ethanol") {
  ExtractionResult extraction = extract_wl(kEsterification);
  Molecule product = parse_molecule("CC(=O)OCC");
  // carbonyl carbon is atom 1, ester oxygen atom 3
  Anchor anchor = BondSite{1, 3};
  auto sites = match_sites(product, extraction.tmpl, anchor);
  REQUIRE(sites.size() == 1);
  Molecule substrates = apply_template(product, extraction.tmpl, sites[0]);
  CHECK(molecules_isomorphic(substrates, parse_molecule("CC(=O)Cl.OCC")));
  CHECK(connected_components(substrates).size() == 2);
}

TEST_CASE("apply after extract round-trips the source reactions") {
  for (const char *rxn_smiles :
       {kEsterification, "[N:1]=[N:2]>>[N:1]#[N:2]",
        "[CH3:1][CH:2]=[CH:3][CH2:14][CH3:15].[B:4]([O:5][CH3:6])([O:7][CH3:8])"
        "[B:9]([O:10][CH3:11])[O:12][CH3:13]>>[CH3:1][CH:2]([B:4]([O:5][CH3:6])"
        "[O:7][CH3:8])[CH:3]([B:9]([O:10][CH3:11])[O:12][CH3:13])[CH2:14][CH3:15]"}) {
    Reaction rxn = make_reaction(rxn_smiles);
    ExtractionResult extraction = extract_template(
        rxn, canonical_atom_order(rxn, OrderStrategy::kWLCanonical));
    Molecule substrates =
        apply_template(rxn.product, extraction.tmpl, extraction.center_atoms);
    CHECK_MESSAGE(molecules_isomorphic(substrates, rxn.substrates), rxn_smiles);
  }
}

TEST_CASE("anchor validation") {
  ExtractionResult extraction = extract_wl(kEsterification);
  Molecule product = parse_molecule("CC(=O)OCC");
  CHECK(code_of([&] { match_sites(product, extraction.tmpl, AtomSite{1}); }) ==
        ErrorCode::kAnchorMismatch);  // bond template, atom anchor
  CHECK(code_of([&] { match_sites(product, extraction.tmpl, BondSite{0, 1}); }) ==
        ErrorCode::kAnchorMismatch);  // c1 expects the ester oxygen
  CHECK(code_of([&] { match_sites(product, extraction.tmpl, BondSite{0, 3}); }) ==
        ErrorCode::kAnchorMismatch);  // atoms not bonded
  // charge is part of the compatibility test; the product side is the anion
  ExtractionResult charged = extract_wl("[CH3:1][OH:2]>>[CH3:1][O-:2]");
  CHECK(charged.tmpl.kind == TemplateKind::kAtom);
  Molecule neutral = parse_molecule("CO");
  CHECK(code_of([&] { match_sites(neutral, charged.tmpl, AtomSite{1}); }) ==
        ErrorCode::kAnchorMismatch);
  Molecule anion = parse_molecule("C[O-]");
  CHECK(match_sites(anion, charged.tmpl, AtomSite{1}).size() == 1);
}

TEST_CASE("site enumeration extends the anchor deterministically") {
  Template t = three_center_template();
  // methanediol: both oxygens can play c1/c2, exhaustively two assignments
  Molecule diol = parse_molecule("OCO");
  auto sites = match_sites(diol, t, AtomSite{1});
  REQUIRE(sites.size() == 2);
  CHECK(sites[0] == SiteAssignment{1, 0, 2});
  CHECK(sites[1] == SiteAssignment{1, 2, 0});

  // charging one oxygen starves the slot candidates (H counts are not a
  // matching criterion, charge is)
  Molecule asym = parse_molecule("OC[O-]");
  CHECK(match_sites(asym, t, AtomSite{1}).empty());
}

TEST_CASE("apply failure modes") {
  Template t = three_center_template();
  Molecule diol = parse_molecule("OCO");
  CHECK(code_of([&] { apply_template(diol, t, {1, 0}); }) ==
        ErrorCode::kSlotUnassigned);

  // h_delta underflow: remove a hydrogen that is not there
  Template strip;
  strip.n_center = 1;
  strip.kind = TemplateKind::kAtom;
  strip.signature.slots = {{8, 0, false, 0}};
  EditAtomAction edit;
  edit.h_delta = -1;
  edit.slot = Slot{false, 0};
  strip.actions = {EditAction(edit)};
  Molecule ether = parse_molecule("COC");
  CHECK(code_of([&] { apply_template(ether, strip, {1}); }) ==
        ErrorCode::kInvalidResult);
}

TEST_CASE("application leaves the product untouched and is repeatable") {
  ExtractionResult extraction = extract_wl(kEsterification);
  Molecule product = parse_molecule("CC(=O)OCC");
  Molecule before = product;
  Molecule first = apply_template(product, extraction.tmpl, {1, 3});
  Molecule second = apply_template(product, extraction.tmpl, {1, 3});
  CHECK(product == before);
  WriteOptions canon;
  canon.canonical = true;
  CHECK(write_molecule(first, canon) == write_molecule(second, canon));
}

TEST_CASE("scores split p across enumerated sites") {
  ExtractionResult extraction = extract_wl(kEsterification);
  Molecule product = parse_molecule("CC(=O)OCC");
  auto single = rank_applications(product, extraction.tmpl, BondSite{1, 3}, 0.8);
  REQUIRE(single.size() == 1);
  CHECK(single[0].score == 0.8);

  Template t = three_center_template();
  Molecule diol = parse_molecule("OCO");
  auto pair = rank_applications(diol, t, AtomSite{1}, 0.6);
  REQUIRE(pair.size() == 2);
  double sum = 0.0;
  for (const RankedPrediction &pred : pair) {
    CHECK(pred.score == 0.6 / 2.0);
    sum += pred.score;
  }
  CHECK(std::abs(sum - 0.6) <=
        std::numeric_limits<double>::epsilon() * 0.6);  // within one ulp
  // deterministic ordering by assignment
  CHECK(pair[0].assignment < pair[1].assignment);
}

TEST_CASE("ring leaving groups close through zero-to-positive bond edits") {
  // phthalimide removal: both carbonyl carbons attach to the mapped
  // nitrogen as additions, and the remaining ring bonds among the added
  // atoms are created by EditBond actions starting from no bond
  Reaction rxn = make_reaction(
      "[CH2:1]([N:2]1C(=O)c2ccccc2C1=O)[CH3:3]"
      ">>[CH2:1]([NH2:2])[CH3:3]");
  ExtractionResult result = extract_template(
      rxn, canonical_atom_order(rxn, OrderStrategy::kWLCanonical));
  int ring_closures = 0;
  for (const EditAction &action : result.tmpl.actions) {
    if (const auto *bond = std::get_if<EditBondAction>(&action)) {
      if (bond->order_delta_x2 > 0 && bond->from.added && bond->to.added) {
        ++ring_closures;
      }
    }
  }
  CHECK(ring_closures >= 2);  // imide ring and the fused benzo ring
  Molecule substrates =
      apply_template(rxn.product, result.tmpl, result.center_atoms);
  CHECK(molecules_isomorphic(substrates, rxn.substrates));
}

TEST_CASE("top-k pools and sorts scored sites") {
  ExtractionResult ester = extract_wl(kEsterification);
  Template spread = three_center_template();
  Molecule product = parse_molecule("CC(=O)OCC");
  Molecule diol = parse_molecule("OCO");

  // two candidates on the ester product: only the real site applies
  std::vector<ScoredSite> sites;
  sites.push_back({BondSite{1, 3}, &ester.tmpl, 0.7});
  sites.push_back({BondSite{3, 4}, &ester.tmpl, 0.9});  // O-C pair, wrong c0
  auto top = top_k_applications(product, sites, 5);
  REQUIRE(top.size() == 1);
  CHECK(top[0].score == 0.7);

  // pooled predictions from several sites sort by score and truncate
  std::vector<ScoredSite> pooled;
  pooled.push_back({AtomSite{1}, &spread, 0.4});  // two sites at 0.2 each
  auto ranked = top_k_applications(diol, pooled, 1);
  REQUIRE(ranked.size() == 1);
  CHECK(ranked[0].score == 0.2);
}

TEST_CASE("sites that fail validity are dropped from k") {
  // the edit strips two hydrogens from c1; only the CH2-bearing oxygen
  // cannot absorb it, so some assignments die while others survive
  Template t = three_center_template();
  std::get<EditAtomAction>(t.actions[0]).h_delta = -1;
  Molecule diol = parse_molecule("OCO");
  auto preds = rank_applications(diol, t, AtomSite{1}, 1.0);
  REQUIRE(preds.size() == 2);  // both oxygens carry one hydrogen
  CHECK(preds[0].score == 0.5);

  std::get<EditAtomAction>(t.actions[0]).h_delta = -2;
  CHECK(code_of([&] { rank_applications(diol, t, AtomSite{1}, 1.0); }) ==
        ErrorCode::kNoValidSite);
}

}  // namespace
}  // namespace moledit
