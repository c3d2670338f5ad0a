//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLEDIT_SMILES_HPP_
#define MOLEDIT_SMILES_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "moledit/molecule.hpp"

namespace moledit {

// Covered grammar: organic subset, bracket atoms with
// isotope/chirality/H-count/charge/atom-map, branches, ring closures
// including %nn, dots, bond symbols - = # : / \, aromatic lowercase.
// Aromaticity is trusted from the input notation; no re-perception or
// kekulization happens anywhere in the pipeline.
Molecule parse_molecule(std::string_view text);

struct WriteOptions {
  bool canonical = false;
  bool include_maps = true;
};

// canonical=false emits atoms in stored order; canonical=true follows
// canonical_ranks, recomputing chirality parity and cis/trans marks for the
// emitted neighbor order. Output re-parses to an isomorphic molecule.
std::string write_molecule(const Molecule &mol, const WriteOptions &opts = {});

// Atom emission order of the canonical writer (product of canonical_ranks;
// the order the atoms of write_molecule(mol, {.canonical=true}) appear in).
std::vector<int> canonical_emission_order(const Molecule &mol);

struct ParsedReactionText {
  std::string reactant_part;
  std::string reagent_part;
  std::string product_part;
};

// Splits reactants>reagents>products at top level; exactly two separators.
ParsedReactionText split_reaction_text(std::string_view text);

// S = reactant part, P = product part. The reagent part is parsed for
// syntax validity and discarded. The correspondence is not built here; run
// map_correspondence on the result before extraction.
Reaction parse_reaction(std::string_view text);

}  // namespace moledit

#endif  // MOLEDIT_SMILES_HPP_
