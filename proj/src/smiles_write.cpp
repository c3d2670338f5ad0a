//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "moledit/smiles.hpp"
#include "valence.hpp"

namespace moledit {

using internal::is_organic_subset;
using internal::organic_implicit_h;

namespace {

struct RingRef {
  int partner = -1;
  int bond = -1;
  int digit = -1;
  bool opens = false;
};

struct EmitPlan {
  std::vector<int> order;                  // emission order, atom indices
  std::vector<int> pos;                    // emission position per atom
  std::vector<int> parent;                 // -1 for component roots
  std::vector<int> parent_bond;
  std::vector<std::vector<int>> children;  // ordered child atoms
  std::vector<std::vector<RingRef>> rings; // digits at each atom, in order
  std::vector<BondDir> mark;               // regenerated dir per bond (a->b)
};

BondDir flip(BondDir d) {
  if (d == BondDir::kUp) return BondDir::kDown;
  if (d == BondDir::kDown) return BondDir::kUp;
  return BondDir::kNone;
}

BondStereo flip(BondStereo s) {
  if (s == BondStereo::kCis) return BondStereo::kTrans;
  if (s == BondStereo::kTrans) return BondStereo::kCis;
  return BondStereo::kNone;
}

class Writer {
public:
  Writer(const Molecule &mol, const WriteOptions &opts)
      : mol_(mol), opts_(opts) {}

  std::pair<std::string, std::vector<int>> run() {
    const int n = mol_.num_atoms();
    if (n == 0) return {"", {}};
    key_.resize(n);
    if (opts_.canonical) {
      key_ = individualized_ranks(mol_).rank;
    } else {
      std::iota(key_.begin(), key_.end(), 0);
    }
    bool any_stereo = false;
    for (int i = 0; i < n && !any_stereo; ++i) {
      any_stereo = mol_.atom(i).spec.chirality != Chirality::kNone;
    }
    for (int bi = 0; bi < mol_.num_bonds() && !any_stereo; ++bi) {
      any_stereo = mol_.bond(bi).stereo != BondStereo::kNone;
    }
    if (any_stereo) orbit_ = canonical_ranks(mol_).rank;
    build_tree();
    assign_ring_digits();
    assign_stereo_marks();

    // One string per component; canonical output orders components by their
    // emitted text so the result is permutation-invariant.
    struct Piece {
      std::string text;
      std::vector<int> atoms;
    };
    std::vector<Piece> pieces;
    for (int root : roots_) {
      Piece piece;
      size_t begin = emitted_.size();
      emit_atom(root, piece.text);
      piece.atoms.assign(emitted_.begin() + begin, emitted_.end());
      pieces.push_back(std::move(piece));
    }
    if (opts_.canonical) {
      std::stable_sort(pieces.begin(), pieces.end(),
                       [](const Piece &x, const Piece &y) { return x.text < y.text; });
    }
    std::string out;
    std::vector<int> order;
    for (size_t i = 0; i < pieces.size(); ++i) {
      if (i > 0) out += '.';
      out += pieces[i].text;
      order.insert(order.end(), pieces[i].atoms.begin(), pieces[i].atoms.end());
    }
    return {std::move(out), std::move(order)};
  }

private:
  // DFS from the lowest-key unvisited atom of each component, taking
  // neighbors in key order. plan_.order is the SMILES appearance order.
  void build_tree() {
    const int n = mol_.num_atoms();
    plan_.pos.assign(n, -1);
    plan_.parent.assign(n, -1);
    plan_.parent_bond.assign(n, -1);
    plan_.children.assign(n, {});
    plan_.rings.assign(n, {});
    plan_.mark.assign(mol_.num_bonds(), BondDir::kNone);
    bond_used_.assign(mol_.num_bonds(), false);

    std::vector<int> by_key(n);
    std::iota(by_key.begin(), by_key.end(), 0);
    std::sort(by_key.begin(), by_key.end(),
              [&](int x, int y) { return key_[x] < key_[y]; });

    for (int root : by_key) {
      if (plan_.pos[root] >= 0) continue;
      roots_.push_back(root);
      dfs(root);
    }
  }

  void dfs(int v) {
    plan_.pos[v] = static_cast<int>(plan_.order.size());
    plan_.order.push_back(v);
    std::vector<std::pair<int, int>> nbrs(mol_.neighbors(v).begin(),
                                          mol_.neighbors(v).end());
    std::sort(nbrs.begin(), nbrs.end(), [&](const auto &x, const auto &y) {
      return key_[x.first] < key_[y.first];
    });
    for (const auto &[nbr, bi] : nbrs) {
      if (bond_used_[bi]) continue;
      if (plan_.pos[nbr] >= 0) {
        bond_used_[bi] = true;
        ring_bonds_.push_back(bi);
        continue;
      }
      bond_used_[bi] = true;
      plan_.parent[nbr] = v;
      plan_.parent_bond[nbr] = bi;
      plan_.children[v].push_back(nbr);
      dfs(nbr);
    }
  }

  void assign_ring_digits() {
    // Opener = endpoint emitted first. Digits are handed out in opener
    // emission order and reused once closed.
    std::sort(ring_bonds_.begin(), ring_bonds_.end(), [&](int x, int y) {
      const Bond &bx = mol_.bond(x);
      const Bond &by = mol_.bond(y);
      int ox = std::min(plan_.pos[bx.a], plan_.pos[bx.b]);
      int oy = std::min(plan_.pos[by.a], plan_.pos[by.b]);
      if (ox != oy) return ox < oy;
      return std::max(plan_.pos[bx.a], plan_.pos[bx.b]) <
             std::max(plan_.pos[by.a], plan_.pos[by.b]);
    });
    std::vector<bool> taken(100, false);
    struct Open {
      int bond;
      int close_pos;
      int digit;
    };
    std::vector<Open> active;
    for (int bi : ring_bonds_) {
      const Bond &bond = mol_.bond(bi);
      int opener = plan_.pos[bond.a] < plan_.pos[bond.b] ? bond.a : bond.b;
      int closer = bond.other(opener);
      // free digits whose closer has been passed
      std::erase_if(active, [&](const Open &o) {
        if (o.close_pos < plan_.pos[opener]) {
          taken[o.digit] = false;
          return true;
        }
        return false;
      });
      int digit = 1;
      while (digit < 100 && taken[digit]) ++digit;
      if (digit >= 100) {
        throw_error(ErrorCode::kBadBond, "more than 99 open ring bonds");
      }
      taken[digit] = true;
      active.push_back({bi, plan_.pos[closer], digit});
      plan_.rings[opener].push_back({closer, bi, digit, true});
      plan_.rings[closer].push_back({opener, bi, digit, false});
    }
    // At each atom: closings first (by opener position), then openings (by
    // closer position); this is also the order used for chirality parity.
    for (auto &refs : plan_.rings) {
      std::stable_sort(refs.begin(), refs.end(),
                       [&](const RingRef &x, const RingRef &y) {
                         if (x.opens != y.opens) return !x.opens;
                         return plan_.pos[x.partner] < plan_.pos[y.partner];
                       });
    }
  }

  // Regenerate up/down marks from the stored cis/trans flags. Marks already
  // fixed by an earlier stereo bond are reused; a bond whose constraints
  // cannot be met is emitted without stereo.
  void assign_stereo_marks() {
    std::vector<int> stereo_bonds;
    for (int bi = 0; bi < mol_.num_bonds(); ++bi) {
      const Bond &bond = mol_.bond(bi);
      if (bond.order_x2 == kDoubleX2 && bond.stereo != BondStereo::kNone) {
        stereo_bonds.push_back(bi);
      }
    }
    std::sort(stereo_bonds.begin(), stereo_bonds.end(), [&](int x, int y) {
      const Bond &bx = mol_.bond(x);
      const Bond &by = mol_.bond(y);
      return std::min(plan_.pos[bx.a], plan_.pos[bx.b]) <
             std::min(plan_.pos[by.a], plan_.pos[by.b]);
    });
    for (int bi : stereo_bonds) {
      const Bond &bond = mol_.bond(bi);
      if (pseudo_stereo_end(bond.a, bond.b) || pseudo_stereo_end(bond.b, bond.a)) {
        continue;  // interchangeable substituents, cis/trans is meaningless
      }
      int mark_a = -1, mark_bond_a = -1, mark_b = -1, mark_bond_b = -1;
      if (!pick_mark_bond(bond.a, bond.b, mark_a, mark_bond_a) ||
          !pick_mark_bond(bond.b, bond.a, mark_b, mark_bond_b)) {
        continue;  // an endpoint has no single bond to carry the mark
      }
      if (!is_neighbor(bond.a, bond.stereo_ref_a) ||
          !is_neighbor(bond.b, bond.stereo_ref_b)) {
        continue;  // stale references, stereo meaningless
      }
      BondStereo rel = bond.stereo;
      if (mark_a != bond.stereo_ref_a) rel = flip(rel);
      if (mark_b != bond.stereo_ref_b) rel = flip(rel);

      bool a_fixed = plan_.mark[mark_bond_a] != BondDir::kNone;
      bool b_fixed = plan_.mark[mark_bond_b] != BondDir::kNone;
      bool need_equal = rel == BondStereo::kCis;
      bool up_a, up_b;
      if (a_fixed) {
        up_a = expressed_up(mark_bond_a, bond.a);
        up_b = need_equal == up_a;
        if (b_fixed && expressed_up(mark_bond_b, bond.b) != up_b) {
          continue;  // over-constrained, drop stereo on this bond
        }
      } else if (b_fixed) {
        up_b = expressed_up(mark_bond_b, bond.b);
        up_a = need_equal == up_b;
      } else if (plan_.pos[bond.a] <= plan_.pos[bond.b]) {
        // unconstrained: the earlier-emitted endpoint reads up, which keeps
        // the mark choice canonical under input permutations
        up_a = true;
        up_b = need_equal;
      } else {
        up_b = true;
        up_a = need_equal;
      }
      set_mark(mark_bond_a, bond.a, up_a);
      set_mark(mark_bond_b, bond.b, up_b);
    }
  }

  bool pseudo_stereo_end(int endpoint, int exclude) const {
    std::vector<int> others;
    for (const auto &[nbr, bi] : mol_.neighbors(endpoint)) {
      if (nbr != exclude) others.push_back(nbr);
    }
    for (size_t i = 0; i < others.size(); ++i) {
      for (size_t j = i + 1; j < others.size(); ++j) {
        if (orbit_[others[i]] == orbit_[others[j]]) return true;
      }
    }
    return false;
  }

  bool pick_mark_bond(int endpoint, int exclude, int &ref, int &ref_bond) {
    int best_pos = -1;
    for (const auto &[nbr, bi] : mol_.neighbors(endpoint)) {
      if (nbr == exclude || mol_.bond(bi).order_x2 != kSingleX2) continue;
      if (plan_.mark[bi] != BondDir::kNone) {
        ref = nbr;
        ref_bond = bi;
        return true;  // reuse the already-constrained bond
      }
      if (best_pos < 0 || plan_.pos[nbr] < best_pos) {
        best_pos = plan_.pos[nbr];
        ref = nbr;
        ref_bond = bi;
      }
    }
    return best_pos >= 0;
  }

  bool is_neighbor(int atom, int maybe) const {
    if (maybe < 0) return false;
    return mol_.find_bond(atom, maybe) >= 0;
  }

  bool expressed_up(int bond_index, int from) const {
    const Bond &bond = mol_.bond(bond_index);
    bool up = plan_.mark[bond_index] == BondDir::kUp;
    return bond.a == from ? up : !up;
  }

  void set_mark(int bond_index, int from, bool up) {
    const Bond &bond = mol_.bond(bond_index);
    bool stored_up = bond.a == from ? up : !up;
    plan_.mark[bond_index] = stored_up ? BondDir::kUp : BondDir::kDown;
  }

  std::string bond_text(int bond_index, int from, int to) const {
    const Bond &bond = mol_.bond(bond_index);
    switch (bond.order_x2) {
      case kDoubleX2: return "=";
      case kTripleX2: return "#";
      case kAromaticX2: return "";
      default: break;
    }
    if (plan_.mark[bond_index] != BondDir::kNone) {
      BondDir d = plan_.mark[bond_index];
      if (bond.a != from) d = flip(d);
      return d == BondDir::kUp ? "/" : "\\";
    }
    if (mol_.atom(from).spec.aromatic && mol_.atom(to).spec.aromatic) {
      return "-";  // keep a plain single bond from reading as aromatic
    }
    return "";
  }

  // Neighbor sequence a reader of the emitted text would accumulate; used to
  // recompute the chirality parity for the emission order.
  std::vector<int> emitted_sequence(int v, bool with_h) const {
    std::vector<int> seq;
    if (plan_.parent[v] >= 0) seq.push_back(plan_.parent[v]);
    if (with_h && mol_.atom(v).implicit_h > 0) seq.push_back(-1);
    for (const RingRef &ring : plan_.rings[v]) seq.push_back(ring.partner);
    for (int child : plan_.children[v]) seq.push_back(child);
    return seq;
  }

  // A tetrahedral mark whose neighbors are not all distinguishable is not a
  // real stereocenter; emitting it would make the output depend on which of
  // the interchangeable neighbors the traversal picks first.
  bool pseudo_chiral(int v) const {
    const auto &nbrs = mol_.neighbors(v);
    for (size_t i = 0; i < nbrs.size(); ++i) {
      for (size_t j = i + 1; j < nbrs.size(); ++j) {
        if (orbit_[nbrs[i].first] == orbit_[nbrs[j].first]) return true;
      }
    }
    return false;
  }

  std::string atom_text(int v) const {
    const Atom &atom = mol_.atom(v);
    const AtomSpec &spec = atom.spec;

    Chirality tag = Chirality::kNone;
    if (spec.chirality != Chirality::kNone && !pseudo_chiral(v)) {
      tag = chirality_in_order(atom, emitted_sequence(v, /*with_h=*/true));
    }

    bool organic = is_organic_subset(spec.element);
    bool lowercase_ok =
        !spec.aromatic || (organic && spec.element != 17 && spec.element != 35 &&
                           spec.element != 9 && spec.element != 53);
    int bond_sum = 0;
    for (const auto &[nbr, bi] : mol_.neighbors(v)) {
      bond_sum += mol_.bond(bi).order_x2;
    }
    bool plain_h_matches =
        organic && organic_implicit_h(spec.element, spec.aromatic, bond_sum, v,
                                      /*strict=*/false) == atom.implicit_h;
    bool bracket = spec.isotope != 0 || spec.formal_charge != 0 ||
                   (opts_.include_maps && spec.atom_map != 0) ||
                   tag != Chirality::kNone || !organic || !lowercase_ok ||
                   !plain_h_matches;

    std::string symbol(element_symbol(spec.element));
    if (spec.aromatic) {
      for (char &c : symbol) c = static_cast<char>(std::tolower(c));
    }
    if (!bracket) return symbol;

    std::string out = "[";
    if (spec.isotope != 0) out += std::to_string(spec.isotope);
    out += symbol;
    if (tag == Chirality::kCCW) out += "@";
    if (tag == Chirality::kCW) out += "@@";
    if (atom.implicit_h == 1) out += "H";
    if (atom.implicit_h > 1) out += "H" + std::to_string(atom.implicit_h);
    if (spec.formal_charge != 0) {
      out += spec.formal_charge > 0 ? "+" : "-";
      int mag = std::abs(spec.formal_charge);
      if (mag > 1) out += std::to_string(mag);
    }
    if (opts_.include_maps && spec.atom_map != 0) {
      out += ":" + std::to_string(spec.atom_map);
    }
    out += "]";
    return out;
  }

  void emit_atom(int v, std::string &out) {
    emitted_.push_back(v);
    out += atom_text(v);
    for (const RingRef &ring : plan_.rings[v]) {
      if (ring.opens) out += bond_text(ring.bond, v, ring.partner);
      if (ring.digit < 10) {
        out += static_cast<char>('0' + ring.digit);
      } else {
        out += "%" + std::to_string(ring.digit);
      }
    }
    const auto &children = plan_.children[v];
    for (size_t i = 0; i < children.size(); ++i) {
      int child = children[i];
      bool last = i + 1 == children.size();
      if (!last) out += "(";
      out += bond_text(plan_.parent_bond[child], v, child);
      emit_atom(child, out);
      if (!last) out += ")";
    }
  }

  const Molecule &mol_;
  const WriteOptions &opts_;
  std::vector<int> key_;
  std::vector<int> orbit_;  // refinement ranks; filled when stereo is present
  EmitPlan plan_;
  std::vector<bool> bond_used_;
  std::vector<int> ring_bonds_;
  std::vector<int> roots_;
  std::vector<int> emitted_;
};

}  // namespace

std::string write_molecule(const Molecule &mol, const WriteOptions &opts) {
  return Writer(mol, opts).run().first;
}

std::vector<int> canonical_emission_order(const Molecule &mol) {
  WriteOptions opts;
  opts.canonical = true;
  return Writer(mol, opts).run().second;
}

}  // namespace moledit
