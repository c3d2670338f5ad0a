//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLEDIT_APPLY_HPP_
#define MOLEDIT_APPLY_HPP_

#include <variant>
#include <vector>

#include "moledit/molecule.hpp"
#include "moledit/template.hpp"

namespace moledit {

struct AtomSite {
  int atom = -1;
};

struct BondSite {
  int from = -1;
  int to = -1;  // must be bonded to `from`
};

using Anchor = std::variant<AtomSite, BondSite>;

// Product atom index per center slot.
using SiteAssignment = std::vector<int>;

// Enumerates assignments of the center slots starting from the anchor.
// c0 (and c1 for bond templates) come from the anchor; remaining slots are
// found by a depth-first search constrained by the center signature
// (element, charge, aromatic flag, and the inter-slot bond pattern).
// Deterministically ordered by assigned atom indices. Throws AnchorMismatch
// when the anchor does not fit the template kind or the c0/c1 signature.
std::vector<SiteAssignment> match_sites(const Molecule &product,
                                        const Template &t, const Anchor &anchor);

// Executes the template's actions on a copy of the product, producing the
// substrate set (possibly multi-component). Throws SlotUnassigned when the
// assignment misses a referenced slot and InvalidResult when the edited
// molecule fails validity checks.
Molecule apply_template(const Molecule &product, const Template &t,
                        const SiteAssignment &assignment);

struct RankedPrediction {
  Molecule substrates;
  double score = 0.0;
  SiteAssignment assignment;
};

// Applies the template at every matching site; each surviving prediction is
// scored p/k where k is the number of valid applications. Throws NoValidSite
// when nothing survives.
std::vector<RankedPrediction> rank_applications(const Molecule &product,
                                                const Template &t,
                                                const Anchor &anchor, double p);

struct ScoredSite {
  Anchor anchor;
  const Template *tmpl = nullptr;
  double p = 0.0;
};

// Sorting utility for externally supplied (site, template, p) triples: each
// triple is expanded through rank_applications, the pooled predictions are
// ordered by descending score, and the best k survive. Triples that yield
// no valid site are dropped silently.
std::vector<RankedPrediction> top_k_applications(
    const Molecule &product, const std::vector<ScoredSite> &candidates, int k);

}  // namespace moledit

#endif  // MOLEDIT_APPLY_HPP_
