//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moledit/molecule.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <unordered_map>

#include "moledit/smiles.hpp"

namespace moledit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kUnclosedRing: return "unclosed_ring";
    case ErrorCode::kUnbalancedParens: return "unbalanced_parens";
    case ErrorCode::kBadBracketAtom: return "bad_bracket_atom";
    case ErrorCode::kBadBond: return "bad_bond";
    case ErrorCode::kValenceOverflow: return "valence_overflow";
    case ErrorCode::kMissingSeparator: return "missing_separator";
    case ErrorCode::kDuplicateMapNumber: return "duplicate_map_number";
    case ErrorCode::kUnmappedProductAtom: return "unmapped_product_atom";
    case ErrorCode::kProductAtomMissingFromSubstrates:
      return "product_atom_missing_from_substrates";
    case ErrorCode::kElementMismatch: return "element_mismatch";
    case ErrorCode::kEmptyCenter: return "empty_center";
    case ErrorCode::kNonTerminating: return "non_terminating";
    case ErrorCode::kMalformedKey: return "malformed_key";
    case ErrorCode::kAnchorMismatch: return "anchor_mismatch";
    case ErrorCode::kInvalidResult: return "invalid_result";
    case ErrorCode::kSlotUnassigned: return "slot_unassigned";
    case ErrorCode::kNoValidSite: return "no_valid_site";
    case ErrorCode::kFileNotFound: return "file_not_found";
    case ErrorCode::kBadHeader: return "bad_header";
  }
  return "unknown";
}

namespace {

constexpr std::array<const char *, 119> kElementSymbols = {
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

}  // namespace

std::string_view element_symbol(int z) {
  if (z < 1 || z > 118) return "*";
  return kElementSymbols[z];
}

int element_number(std::string_view symbol) {
  static const std::unordered_map<std::string_view, int> lookup = [] {
    std::unordered_map<std::string_view, int> m;
    for (int z = 1; z <= 118; ++z) m.emplace(kElementSymbols[z], z);
    return m;
  }();
  auto it = lookup.find(symbol);
  return it == lookup.end() ? 0 : it->second;
}

int Molecule::find_bond(int a, int b) const {
  for (const auto &[nbr, bi] : adj_[a]) {
    if (nbr == b) return bi;
  }
  return -1;
}

int Molecule::bond_order_x2(int a, int b) const {
  int bi = find_bond(a, b);
  return bi < 0 ? 0 : bonds_[bi].order_x2;
}

int Molecule::add_atom(const AtomSpec &spec, int implicit_h) {
  atoms_.push_back(Atom{spec, implicit_h, {}});
  adj_.emplace_back();
  return num_atoms() - 1;
}

int Molecule::add_bond(int a, int b, int order_x2) {
  if (a == b) throw_error(ErrorCode::kBadBond, "bond endpoints must differ");
  if (find_bond(a, b) >= 0) {
    throw_error(ErrorCode::kBadBond, "duplicate bond between atoms " +
                                         std::to_string(a) + " and " +
                                         std::to_string(b));
  }
  Bond bond;
  bond.a = a;
  bond.b = b;
  bond.order_x2 = order_x2;
  bonds_.push_back(bond);
  int bi = num_bonds() - 1;
  adj_[a].emplace_back(b, bi);
  adj_[b].emplace_back(a, bi);
  std::sort(adj_[a].begin(), adj_[a].end());
  std::sort(adj_[b].begin(), adj_[b].end());
  return bi;
}

void Molecule::remove_bond(int bond_index) {
  bonds_.erase(bonds_.begin() + bond_index);
  for (auto &lst : adj_) {
    std::erase_if(lst, [&](const auto &p) { return p.second == bond_index; });
    for (auto &p : lst) {
      if (p.second > bond_index) --p.second;
    }
  }
}

std::pair<std::vector<int>, int> component_labels(const Molecule &mol) {
  std::vector<int> label(mol.num_atoms(), -1);
  int count = 0;
  std::vector<int> stack;
  for (int start = 0; start < mol.num_atoms(); ++start) {
    if (label[start] >= 0) continue;
    stack.push_back(start);
    label[start] = count;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (const auto &[nbr, bi] : mol.neighbors(v)) {
        if (label[nbr] < 0) {
          label[nbr] = count;
          stack.push_back(nbr);
        }
      }
    }
    ++count;
  }
  return {std::move(label), count};
}

std::vector<Molecule> connected_components(const Molecule &mol) {
  auto [label, count] = component_labels(mol);
  std::vector<Molecule> parts(count);
  std::vector<int> local(mol.num_atoms(), -1);
  for (int i = 0; i < mol.num_atoms(); ++i) {
    local[i] = parts[label[i]].add_atom(mol.atom(i).spec, mol.atom(i).implicit_h);
  }
  for (const Bond &bond : mol.bonds()) {
    Molecule &part = parts[label[bond.a]];
    int bi = part.add_bond(local[bond.a], local[bond.b], bond.order_x2);
    Bond &copy = part.bond(bi);
    copy.stereo = bond.stereo;
    copy.dir = bond.dir;
    copy.stereo_ref_a = bond.stereo_ref_a < 0 ? -1 : local[bond.stereo_ref_a];
    copy.stereo_ref_b = bond.stereo_ref_b < 0 ? -1 : local[bond.stereo_ref_b];
  }
  for (int i = 0; i < mol.num_atoms(); ++i) {
    auto &order = parts[label[i]].atom(local[i]).chiral_order;
    order = mol.atom(i).chiral_order;
    for (int &entry : order) {
      if (entry >= 0) entry = local[entry];
    }
  }
  return parts;
}

AtomRanks refine_partition(const LabeledGraph &graph,
                           const std::vector<uint64_t> &initial_keys,
                           int max_rounds) {
  const int n = graph.num_nodes;
  AtomRanks out;
  out.rank.assign(n, 0);
  if (n == 0) return out;

  // Dense initial ranks in key order.
  {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int x, int y) {
      return initial_keys[x] < initial_keys[y];
    });
    int rank = -1;
    uint64_t prev = 0;
    for (int pos = 0; pos < n; ++pos) {
      int v = idx[pos];
      if (rank < 0 || initial_keys[v] != prev) {
        ++rank;
        prev = initial_keys[v];
      }
      out.rank[v] = rank;
    }
    out.num_classes = rank + 1;
  }

  using Signature = std::pair<int, std::vector<std::pair<int64_t, int>>>;
  std::vector<Signature> sig(n);
  std::vector<int> idx(n);
  for (int round = 0; round < max_rounds && out.num_classes < n; ++round) {
    for (int v = 0; v < n; ++v) {
      sig[v].first = out.rank[v];
      sig[v].second.clear();
      for (const auto &[lab, nbr] : graph.adj[v]) {
        sig[v].second.emplace_back(lab, out.rank[nbr]);
      }
      std::sort(sig[v].second.begin(), sig[v].second.end());
    }
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int x, int y) { return sig[x] < sig[y]; });
    std::vector<int> next(n);
    int rank = 0;
    for (int pos = 0; pos < n; ++pos) {
      if (pos > 0 && sig[idx[pos]] != sig[idx[pos - 1]]) ++rank;
      next[idx[pos]] = rank;
    }
    if (rank + 1 == out.num_classes) break;  // partition stopped refining
    out.rank = std::move(next);
    out.num_classes = rank + 1;
  }
  return out;
}

uint64_t atom_invariant_key(const Molecule &mol, int atom) {
  const Atom &a = mol.atom(atom);
  auto clamp = [](int v, int lo, int hi) { return std::clamp(v, lo, hi); };
  uint64_t key = 0;
  key = key << 8 | static_cast<uint64_t>(clamp(a.spec.element, 0, 255));
  key = key << 6 | static_cast<uint64_t>(clamp(a.spec.formal_charge, -31, 31) + 32);
  key = key << 1 | static_cast<uint64_t>(a.spec.aromatic ? 1 : 0);
  key = key << 5 | static_cast<uint64_t>(clamp(mol.degree(atom), 0, 31));
  key = key << 5 | static_cast<uint64_t>(clamp(a.implicit_h, 0, 31));
  key = key << 10 | static_cast<uint64_t>(clamp(a.spec.isotope, 0, 1023));
  return key;
}

namespace {

LabeledGraph molecule_graph(const Molecule &mol) {
  LabeledGraph g;
  g.num_nodes = mol.num_atoms();
  g.adj.resize(g.num_nodes);
  for (const Bond &bond : mol.bonds()) {
    g.adj[bond.a].emplace_back(bond.order_x2, bond.b);
    g.adj[bond.b].emplace_back(bond.order_x2, bond.a);
  }
  return g;
}

}  // namespace

AtomRanks canonical_ranks(const Molecule &mol) {
  const int n = mol.num_atoms();
  LabeledGraph graph = molecule_graph(mol);
  std::vector<uint64_t> keys(n);
  for (int i = 0; i < n; ++i) keys[i] = atom_invariant_key(mol, i);
  return refine_partition(graph, keys, n + 1);
}

AtomRanks individualized_ranks(const Molecule &mol) {
  const int n = mol.num_atoms();
  LabeledGraph graph = molecule_graph(mol);
  AtomRanks ranks = canonical_ranks(mol);
  // Individualize ties until the ranking is discrete. Tied atoms that
  // survive refinement are treated as interchangeable; for automorphic atoms
  // any pick yields the same canonical string.
  while (ranks.num_classes < n) {
    std::vector<int> count(ranks.num_classes, 0);
    for (int r : ranks.rank) ++count[r];
    int target = -1;
    for (int r = 0; r < ranks.num_classes; ++r) {
      if (count[r] > 1) {
        target = r;
        break;
      }
    }
    int chosen = -1;
    for (int i = 0; i < n && chosen < 0; ++i) {
      if (ranks.rank[i] == target) chosen = i;
    }
    std::vector<uint64_t> next(n);
    for (int i = 0; i < n; ++i) {
      next[i] = static_cast<uint64_t>(ranks.rank[i]) * 2 + 1;
    }
    next[chosen] -= 1;
    ranks = refine_partition(graph, next, n + 1);
  }
  return ranks;
}

bool molecules_isomorphic(const Molecule &a, const Molecule &b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds()) {
    return false;
  }
  WriteOptions opts;
  opts.canonical = true;
  opts.include_maps = false;
  return write_molecule(a, opts) == write_molecule(b, opts);
}

void map_correspondence(Reaction &rxn) {
  const Molecule &p = rxn.product;
  const Molecule &s = rxn.substrates;

  std::unordered_map<int, int> substrate_by_map;
  for (int i = 0; i < s.num_atoms(); ++i) {
    int map = s.atom(i).spec.atom_map;
    if (map == 0) continue;
    if (!substrate_by_map.emplace(map, i).second) {
      throw_error(ErrorCode::kDuplicateMapNumber,
                  "atom map " + std::to_string(map) + " repeats in substrates");
    }
  }

  rxn.product_to_substrate.assign(p.num_atoms(), -1);
  rxn.substrate_to_product.assign(s.num_atoms(), -1);
  std::unordered_map<int, int> seen_product_maps;
  for (int i = 0; i < p.num_atoms(); ++i) {
    int map = p.atom(i).spec.atom_map;
    if (map == 0) {
      throw_error(ErrorCode::kUnmappedProductAtom,
                  "product atom " + std::to_string(i) + " has no atom map");
    }
    if (!seen_product_maps.emplace(map, i).second) {
      throw_error(ErrorCode::kDuplicateMapNumber,
                  "atom map " + std::to_string(map) + " repeats in product");
    }
    auto it = substrate_by_map.find(map);
    if (it == substrate_by_map.end()) {
      throw_error(ErrorCode::kProductAtomMissingFromSubstrates,
                  "product atom map " + std::to_string(map) +
                      " has no substrate partner");
    }
    int j = it->second;
    if (p.atom(i).spec.element != s.atom(j).spec.element ||
        p.atom(i).spec.isotope != s.atom(j).spec.isotope) {
      throw_error(ErrorCode::kElementMismatch,
                  "mapped pair " + std::to_string(map) +
                      " changes element or isotope");
    }
    rxn.product_to_substrate[i] = j;
    rxn.substrate_to_product[j] = i;
  }
  rxn.validated = true;
}

Molecule permute_atoms(const Molecule &mol, const std::vector<int> &perm) {
  const int n = mol.num_atoms();
  std::vector<int> inverse(n, -1);
  for (int i = 0; i < n; ++i) inverse[perm[i]] = i;

  Molecule out;
  for (int i = 0; i < n; ++i) {
    const Atom &src = mol.atom(perm[i]);
    out.add_atom(src.spec, src.implicit_h);
    auto &order = out.atom(i).chiral_order;
    order = src.chiral_order;
    for (int &entry : order) {
      if (entry >= 0) entry = inverse[entry];
    }
  }
  for (const Bond &bond : mol.bonds()) {
    int bi = out.add_bond(inverse[bond.a], inverse[bond.b], bond.order_x2);
    Bond &copy = out.bond(bi);
    copy.stereo = bond.stereo;
    copy.stereo_ref_a = bond.stereo_ref_a < 0 ? -1 : inverse[bond.stereo_ref_a];
    copy.stereo_ref_b = bond.stereo_ref_b < 0 ? -1 : inverse[bond.stereo_ref_b];
    copy.dir = bond.dir;
  }
  return out;
}

int permutation_parity(const std::vector<int> &from,
                       const std::vector<int> &to) {
  if (from.size() != to.size()) return 0;
  const int n = static_cast<int>(from.size());
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    auto it = std::find(to.begin(), to.end(), from[i]);
    if (it == to.end()) return 0;
    pos[i] = static_cast<int>(it - to.begin());
  }
  int swaps = 0;
  std::vector<bool> seen(n, false);
  for (int i = 0; i < n; ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (int j = i; !seen[j]; j = pos[j]) {
      seen[j] = true;
      ++len;
    }
    swaps += len - 1;
  }
  return swaps % 2 == 0 ? 1 : -1;
}

Chirality chirality_in_order(const Atom &atom, const std::vector<int> &order) {
  if (atom.spec.chirality == Chirality::kNone) return Chirality::kNone;
  int parity = permutation_parity(atom.chiral_order, order);
  if (parity == 0) return Chirality::kNone;  // neighbor sets diverged
  if (parity > 0) return atom.spec.chirality;
  return atom.spec.chirality == Chirality::kCW ? Chirality::kCCW
                                               : Chirality::kCW;
}

}  // namespace moledit
