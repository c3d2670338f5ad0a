//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moledit/wl.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "moledit/smiles.hpp"

namespace moledit {

namespace {

uint64_t fnv1a(std::string_view text) {
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace

AtomUniverse::AtomUniverse(const Reaction &rxn) {
  if (!rxn.validated) {
    throw std::logic_error("AtomUniverse requires a validated reaction");
  }
  n_product_ = rxn.product.num_atoms();
  product_of_substrate_inverse_ = rxn.product_to_substrate;
  universe_by_substrate_.assign(rxn.substrates.num_atoms(), -1);
  for (int i = 0; i < n_product_; ++i) {
    universe_by_substrate_[rxn.product_to_substrate[i]] = i;
  }
  for (int j = 0; j < rxn.substrates.num_atoms(); ++j) {
    if (rxn.substrate_to_product[j] < 0) {
      universe_by_substrate_[j] = n_product_ + static_cast<int>(extra_.size());
      extra_.push_back(j);
    }
  }
}

bool ReactionCenterGraph::contains(int universe) const {
  return std::binary_search(atoms.begin(), atoms.end(), universe);
}

std::vector<uint64_t> wl_refine(const LabeledGraph &graph,
                                const std::vector<uint64_t> &initial_labels,
                                int max_rounds) {
  AtomRanks ranks = refine_partition(graph, initial_labels, std::max(1, max_rounds));
  std::vector<uint64_t> out(ranks.rank.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<uint64_t>(ranks.rank[i]);
  }
  return out;
}

Chirality chirality_in_frame(const Molecule &mol, int atom,
                             const std::vector<int64_t> &frame_key) {
  const Atom &a = mol.atom(atom);
  if (a.spec.chirality == Chirality::kNone) return Chirality::kNone;
  std::vector<int> order;
  for (const auto &[nbr, bi] : mol.neighbors(atom)) order.push_back(nbr);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (frame_key[x] != frame_key[y]) return frame_key[x] < frame_key[y];
    return x < y;
  });
  if (a.implicit_h > 0) order.push_back(-1);
  return chirality_in_order(a, order);
}

BondStereo stereo_in_frame(const Molecule &mol, int bond_index,
                           const std::vector<int64_t> &frame_key) {
  const Bond &bond = mol.bond(bond_index);
  if (bond.stereo == BondStereo::kNone || bond.order_x2 != kDoubleX2) {
    return BondStereo::kNone;
  }
  if (bond.stereo_ref_a < 0 || bond.stereo_ref_b < 0 ||
      mol.find_bond(bond.a, bond.stereo_ref_a) < 0 ||
      mol.find_bond(bond.b, bond.stereo_ref_b) < 0) {
    return BondStereo::kNone;  // stale references
  }
  auto frame_ref = [&](int endpoint, int exclude) {
    int best = -1;
    for (const auto &[nbr, bi] : mol.neighbors(endpoint)) {
      if (nbr == exclude) continue;
      if (best < 0 || frame_key[nbr] < frame_key[best] ||
          (frame_key[nbr] == frame_key[best] && nbr < best)) {
        best = nbr;
      }
    }
    return best;
  };
  int ref_a = frame_ref(bond.a, bond.b);
  int ref_b = frame_ref(bond.b, bond.a);
  if (ref_a < 0 || ref_b < 0) return BondStereo::kNone;
  BondStereo rel = bond.stereo;
  auto flip = [](BondStereo s) {
    return s == BondStereo::kCis ? BondStereo::kTrans : BondStereo::kCis;
  };
  if (ref_a != bond.stereo_ref_a) rel = flip(rel);
  if (ref_b != bond.stereo_ref_b) rel = flip(rel);
  return rel;
}

namespace {

// Shared comparison frame for product-vs-substrate states: atoms are keyed
// by substrate index, so both sides sort their neighborhoods identically.
struct CenterScan {
  const Reaction &rxn;
  const AtomUniverse &uni;
  std::vector<int64_t> frame_p;
  std::vector<int64_t> frame_s;

  explicit CenterScan(const Reaction &r, const AtomUniverse &u)
      : rxn(r), uni(u) {
    frame_p.resize(r.product.num_atoms());
    for (int i = 0; i < r.product.num_atoms(); ++i) {
      frame_p[i] = r.product_to_substrate[i];
    }
    frame_s.resize(r.substrates.num_atoms());
    std::iota(frame_s.begin(), frame_s.end(), 0);
  }

  // Neighborhoods correspond one-to-one (and hydrogen counts agree), which
  // is what makes chirality parities comparable across the two graphs.
  bool chirality_comparable(int pi, int si) const {
    const Molecule &p = rxn.product;
    const Molecule &s = rxn.substrates;
    if (p.atom(pi).implicit_h != s.atom(si).implicit_h) return false;
    if (p.degree(pi) != s.degree(si)) return false;
    std::vector<int> from_p, from_s;
    for (const auto &[nbr, bi] : p.neighbors(pi)) {
      from_p.push_back(rxn.product_to_substrate[nbr]);
    }
    for (const auto &[nbr, bi] : s.neighbors(si)) from_s.push_back(nbr);
    std::sort(from_p.begin(), from_p.end());
    std::sort(from_s.begin(), from_s.end());
    return from_p == from_s;
  }

  bool chirality_differs(int pi, int si) const {
    Chirality tp = rxn.product.atom(pi).spec.chirality;
    Chirality ts = rxn.substrates.atom(si).spec.chirality;
    if (tp == Chirality::kNone && ts == Chirality::kNone) return false;
    if (tp == Chirality::kNone || ts == Chirality::kNone) return true;
    if (!chirality_comparable(pi, si)) return false;  // bond diffs flag it
    Chirality in_p = chirality_in_frame(rxn.product, pi, frame_p);
    Chirality in_s = chirality_in_frame(rxn.substrates, si, frame_s);
    return in_p != in_s;
  }

  bool props_differ(int pi, int si) const {
    const AtomSpec &ap = rxn.product.atom(pi).spec;
    const AtomSpec &as = rxn.substrates.atom(si).spec;
    return ap.formal_charge != as.formal_charge ||
           rxn.product.atom(pi).implicit_h != rxn.substrates.atom(si).implicit_h ||
           ap.aromatic != as.aromatic || chirality_differs(pi, si);
  }

  bool bond_differs(int p_bond, int s_bond) const {
    int order_p = p_bond < 0 ? 0 : rxn.product.bond(p_bond).order_x2;
    int order_s = s_bond < 0 ? 0 : rxn.substrates.bond(s_bond).order_x2;
    if (order_p != order_s) return true;
    BondStereo st_p = p_bond < 0 ? BondStereo::kNone
                                 : stereo_in_frame(rxn.product, p_bond, frame_p);
    BondStereo st_s = s_bond < 0
                          ? BondStereo::kNone
                          : stereo_in_frame(rxn.substrates, s_bond, frame_s);
    return st_p != st_s;
  }
};

}  // namespace

ReactionCenterGraph reaction_center(const Reaction &rxn) {
  AtomUniverse uni(rxn);
  CenterScan scan(rxn, uni);
  const Molecule &p = rxn.product;
  const Molecule &s = rxn.substrates;

  std::vector<bool> in_center(uni.size(), false);
  for (int i = 0; i < p.num_atoms(); ++i) {
    if (scan.props_differ(i, rxn.product_to_substrate[i])) in_center[i] = true;
  }
  for (const Bond &bond : p.bonds()) {
    int sa = rxn.product_to_substrate[bond.a];
    int sb = rxn.product_to_substrate[bond.b];
    if (scan.bond_differs(p.find_bond(bond.a, bond.b), s.find_bond(sa, sb))) {
      in_center[bond.a] = in_center[bond.b] = true;
    }
  }
  for (const Bond &bond : s.bonds()) {
    int pa = rxn.substrate_to_product[bond.a];
    int pb = rxn.substrate_to_product[bond.b];
    if (pa >= 0 && pb >= 0) {
      if (scan.bond_differs(p.find_bond(pa, pb), s.find_bond(bond.a, bond.b))) {
        in_center[pa] = in_center[pb] = true;
      }
    } else if (pa >= 0 || pb >= 0) {
      // substrate-only atom bonded to a mapped atom: both sides join the
      // center (the mapped atom gains this bond during the reaction)
      in_center[uni.universe_of_substrate(bond.a)] = true;
      in_center[uni.universe_of_substrate(bond.b)] = true;
    }
  }

  ReactionCenterGraph center;
  for (int u = 0; u < uni.size(); ++u) {
    if (in_center[u]) center.atoms.push_back(u);
  }
  if (center.atoms.empty()) {
    throw_error(ErrorCode::kEmptyCenter, "product and substrates are identical");
  }
  for (size_t x = 0; x < center.atoms.size(); ++x) {
    for (size_t y = x + 1; y < center.atoms.size(); ++y) {
      int u = center.atoms[x];
      int v = center.atoms[y];
      int order_p = 0;
      if (uni.is_product(u) && uni.is_product(v)) {
        order_p = p.bond_order_x2(u, v);
      }
      int order_s = s.bond_order_x2(uni.substrate_index(u), uni.substrate_index(v));
      if (order_p != 0 || order_s != 0) {
        center.edges.push_back({u, v, order_p, order_s});
      }
    }
  }
  return center;
}

namespace {

// Compacts arbitrary sortable keys into dense order-preserving ranks.
template <typename Key>
std::vector<uint64_t> dense_keys(const std::vector<Key> &keys) {
  std::vector<Key> sorted(keys);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<uint64_t> out(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) {
    out[i] = static_cast<uint64_t>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
  }
  return out;
}

}  // namespace

std::vector<WLTriple> wl_triples(const Reaction &rxn) {
  AtomUniverse uni(rxn);
  ReactionCenterGraph center = reaction_center(rxn);
  const Molecule &p = rxn.product;
  const Molecule &s = rxn.substrates;

  // Substrate and product runs, seeded with the molgraph atom invariants.
  auto molecule_labels = [](const Molecule &mol) {
    LabeledGraph g;
    g.num_nodes = mol.num_atoms();
    g.adj.resize(g.num_nodes);
    for (const Bond &bond : mol.bonds()) {
      g.adj[bond.a].emplace_back(bond.order_x2, bond.b);
      g.adj[bond.b].emplace_back(bond.order_x2, bond.a);
    }
    std::vector<uint64_t> init(mol.num_atoms());
    for (int i = 0; i < mol.num_atoms(); ++i) init[i] = atom_invariant_key(mol, i);
    return wl_refine(g, init, mol.num_atoms());
  };
  std::vector<uint64_t> labels_s = molecule_labels(s);
  std::vector<uint64_t> labels_p = molecule_labels(p);

  // Center run: nodes are the center atoms; the initial key pairs the
  // product-side invariant (absent for substrate-only atoms) with the
  // substrate-side invariant; edges carry both orders.
  std::vector<int> center_pos(uni.size(), -1);
  for (size_t k = 0; k < center.atoms.size(); ++k) center_pos[center.atoms[k]] = static_cast<int>(k);
  LabeledGraph cg;
  cg.num_nodes = static_cast<int>(center.atoms.size());
  cg.adj.resize(cg.num_nodes);
  for (const auto &edge : center.edges) {
    int64_t label = static_cast<int64_t>(edge.order_p_x2) << 8 | edge.order_s_x2;
    cg.adj[center_pos[edge.u]].emplace_back(label, center_pos[edge.v]);
    cg.adj[center_pos[edge.v]].emplace_back(label, center_pos[edge.u]);
  }
  std::vector<std::pair<uint64_t, uint64_t>> center_keys(cg.num_nodes);
  for (int k = 0; k < cg.num_nodes; ++k) {
    int u = center.atoms[k];
    uint64_t key_p =
        uni.is_product(u) ? atom_invariant_key(p, u) + 1 : 0;
    uint64_t key_s = atom_invariant_key(s, uni.substrate_index(u)) + 1;
    center_keys[k] = {key_p, key_s};
  }
  std::vector<uint64_t> labels_c =
      wl_refine(cg, dense_keys(center_keys), cg.num_nodes);

  std::vector<WLTriple> out(uni.size());
  for (int u = 0; u < uni.size(); ++u) {
    WLTriple &t = out[u];
    t.l_center = center_pos[u] >= 0 ? labels_c[center_pos[u]] + 1 : 0;
    t.l_substrates = labels_s[uni.substrate_index(u)] + 1;
    t.l_product = uni.is_product(u) ? labels_p[u] + 1 : 0;
  }
  return out;
}

CanonicalOrder canonical_atom_order(const Reaction &rxn, OrderStrategy strategy,
                                    uint64_t seed) {
  AtomUniverse uni(rxn);
  CanonicalOrder out;
  out.strategy = strategy;
  out.seed = seed;
  out.order.resize(uni.size());
  std::iota(out.order.begin(), out.order.end(), 0);

  switch (strategy) {
    case OrderStrategy::kWLCanonical: {
      std::vector<WLTriple> triples = wl_triples(rxn);
      // Unmapped leaving-group atoms tie on (triple, map); a discrete
      // substrate ranking breaks those ties consistently with the graph
      // structure, so permuted inputs reorder only along automorphisms.
      AtomRanks s_ranks = individualized_ranks(rxn.substrates);
      std::sort(out.order.begin(), out.order.end(), [&](int x, int y) {
        const WLTriple &tx = triples[x];
        const WLTriple &ty = triples[y];
        if (tx != ty) return tx < ty;
        bool cx = tx.l_center != 0;
        bool cy = ty.l_center != 0;
        if (cx != cy) return cx;  // center atoms first
        int mx = uni.atom_map(rxn, x);
        int my = uni.atom_map(rxn, y);
        if (mx != my) return mx < my;
        return s_ranks.rank[uni.substrate_index(x)] <
               s_ranks.rank[uni.substrate_index(y)];
      });
      break;
    }
    case OrderStrategy::kCanonicalSmilesOrder: {
      out.order.clear();
      for (int i : canonical_emission_order(rxn.product)) out.order.push_back(i);
      for (int j : canonical_emission_order(rxn.substrates)) {
        if (rxn.substrate_to_product[j] < 0) {
          out.order.push_back(uni.universe_of_substrate(j));
        }
      }
      break;
    }
    case OrderStrategy::kRandom: {
      std::string_view material = rxn.raw;
      std::string fallback;
      if (material.empty()) {
        WriteOptions opts;
        opts.canonical = true;
        fallback = write_molecule(rxn.substrates, opts) + ">>" +
                   write_molecule(rxn.product, opts);
        material = fallback;
      }
      std::mt19937_64 rng(seed ^ fnv1a(material));
      std::shuffle(out.order.begin(), out.order.end(), rng);
      break;
    }
    case OrderStrategy::kInputOrder:
      break;  // product atoms in parse order, then substrate-only atoms
  }
  return out;
}

}  // namespace moledit
