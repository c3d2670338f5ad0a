//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moledit/template.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "editor.hpp"
#include "moledit/smiles.hpp"

namespace moledit {

std::string slot_text(const Slot &slot) {
  return (slot.added ? "a" : "c") + std::to_string(slot.index);
}

int CenterSignature::find_bond(int u, int v) const {
  for (size_t i = 0; i < bonds.size(); ++i) {
    if ((bonds[i].u == u && bonds[i].v == v) ||
        (bonds[i].u == v && bonds[i].v == u)) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

namespace {

// An action recorded during extraction; slots hold universe ids until the
// center set is known and they can be renumbered.
struct Recorded {
  EditAction action;
  int added_universe = -1;
};

class Workspace {
public:
  Workspace(const Reaction &rxn, std::vector<int> apos)
      : rxn_(rxn),
        uni_(rxn),
        apos_(std::move(apos)),
        editor_(rxn.product, internal::product_app_keys(rxn.product)) {
    w_of_universe_.assign(uni_.size(), -1);
    universe_of_w_.resize(rxn.product.num_atoms());
    for (int i = 0; i < uni_.num_product(); ++i) {
      w_of_universe_[i] = i;
      universe_of_w_[i] = i;
    }
  }

  const AtomUniverse &universe() const { return uni_; }
  const Molecule &working() const { return editor_.mol(); }
  bool in_working(int u) const { return w_of_universe_[u] >= 0; }

  // Atom-level action on universe atom u: AddAtom when u is a substrate-only
  // atom not yet in the working graph whose neighbor already is; otherwise
  // property deltas against the substrate partner.
  std::optional<EditAction> atom_action(int u) const {
    const Molecule &s = rxn_.substrates;
    int si = uni_.substrate_index(u);
    if (w_of_universe_[u] < 0) {
      int attach = -1;
      for (const auto &[nbr, bi] : s.neighbors(si)) {
        int v = uni_.universe_of_substrate(nbr);
        if (w_of_universe_[v] >= 0 && (attach < 0 || apos_[v] < apos_[attach])) {
          attach = v;
        }
      }
      if (attach < 0) return std::nullopt;
      AddAtomAction add;
      add.element = s.atom(si).spec.element;
      add.formal_charge = s.atom(si).spec.formal_charge;
      add.num_h = s.atom(si).implicit_h;
      add.aromatic = s.atom(si).spec.aromatic;
      add.bond_order_x2 = s.bond_order_x2(si, uni_.substrate_index(attach));
      add.attach = Slot{false, attach};
      return EditAction(add);
    }

    int wi = w_of_universe_[u];
    const Atom &wa = working().atom(wi);
    const Atom &sa = s.atom(si);
    EditAtomAction edit;
    edit.slot = Slot{false, u};
    edit.charge_delta = sa.spec.formal_charge - wa.spec.formal_charge;
    edit.h_delta = sa.implicit_h - wa.implicit_h;
    if (sa.spec.aromatic != wa.spec.aromatic) {
      edit.aromatic_change =
          sa.spec.aromatic ? AromaticChange::kSet : AromaticChange::kClear;
    }
    edit.chirality_change = chirality_change(wi, si);
    if (edit.charge_delta == 0 && edit.h_delta == 0 &&
        edit.aromatic_change == AromaticChange::kNone &&
        edit.chirality_change == ChiralityChange::kNone) {
      return std::nullopt;
    }
    return EditAction(edit);
  }

  // Bond-level action on the ordered universe pair (u, v).
  std::optional<EditAction> bond_action(int u, int v) const {
    if (u == v) return std::nullopt;
    int wu = w_of_universe_[u];
    int wv = w_of_universe_[v];
    if (wu < 0 || wv < 0) return std::nullopt;
    const Molecule &s = rxn_.substrates;
    int su = uni_.substrate_index(u);
    int sv = uni_.substrate_index(v);
    int wb = working().find_bond(wu, wv);
    int sb = s.find_bond(su, sv);
    int order_w = wb < 0 ? 0 : working().bond(wb).order_x2;
    int order_s = sb < 0 ? 0 : s.bond(sb).order_x2;

    BondStereo st_w =
        wb < 0 ? BondStereo::kNone : stereo_in_frame(working(), wb, cmp_frame_w());
    BondStereo st_s =
        sb < 0 ? BondStereo::kNone : stereo_in_frame(s, sb, cmp_frame_s());
    bool stereo_differs = st_w != st_s;
    if (stereo_differs && st_s != BondStereo::kNone &&
        (!neighborhood_settled(u) || !neighborhood_settled(v))) {
      stereo_differs = false;  // defer until both neighborhoods correspond
    }
    if (order_w == order_s && !stereo_differs) return std::nullopt;

    EditBondAction edit;
    edit.from = Slot{false, u};
    edit.to = Slot{false, v};
    edit.order_delta_x2 = order_s - order_w;
    edit.stereo_target =
        sb < 0 ? BondStereo::kNone : stereo_in_frame(s, sb, app_frame_s());
    edit.dir_target = BondDir::kNone;
    return EditAction(edit);
  }

  void apply(Recorded &rec) {
    if (auto *add = std::get_if<AddAtomAction>(&rec.action)) {
      int attach_w = w_of_universe_[add->attach.index];
      int wi = editor_.add_atom(*add, attach_w);
      int u = rec.added_universe;
      w_of_universe_[u] = wi;
      universe_of_w_.push_back(u);
    } else if (auto *edit = std::get_if<EditAtomAction>(&rec.action)) {
      editor_.edit_atom(w_of_universe_[edit->slot.index], *edit);
    } else {
      const auto &bond = std::get<EditBondAction>(rec.action);
      editor_.edit_bond(w_of_universe_[bond.from.index],
                        w_of_universe_[bond.to.index], bond);
    }
  }

  // Universe atoms that could host a bond action with u, in sweep order.
  std::vector<int> bond_partners(int u) const {
    std::vector<int> out;
    int wi = w_of_universe_[u];
    if (wi >= 0) {
      for (const auto &[nbr, bi] : working().neighbors(wi)) {
        out.push_back(universe_of_w_[nbr]);
      }
    }
    int si = uni_.substrate_index(u);
    for (const auto &[nbr, bi] : rxn_.substrates.neighbors(si)) {
      out.push_back(uni_.universe_of_substrate(nbr));
    }
    std::sort(out.begin(), out.end(),
              [&](int x, int y) { return apos_[x] < apos_[y]; });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

private:
  // Comparison frame: both graphs keyed by substrate index, so parities and
  // cis/trans flags can be compared across them.
  std::vector<int64_t> cmp_frame_w() const {
    std::vector<int64_t> f(working().num_atoms());
    for (int wi = 0; wi < working().num_atoms(); ++wi) {
      f[wi] = uni_.substrate_index(universe_of_w_[wi]);
    }
    return f;
  }
  std::vector<int64_t> cmp_frame_s() const {
    std::vector<int64_t> f(rxn_.substrates.num_atoms());
    std::iota(f.begin(), f.end(), 0);
    return f;
  }
  // Application frame over the substrate graph: each atom keyed by the
  // app key of its working-graph image (unplaced atoms sort last).
  std::vector<int64_t> app_frame_s() const {
    std::vector<int64_t> f(rxn_.substrates.num_atoms());
    for (int sj = 0; sj < rxn_.substrates.num_atoms(); ++sj) {
      int u = uni_.universe_of_substrate(sj);
      int wi = w_of_universe_[u];
      f[sj] = wi >= 0 ? editor_.app_key(wi) : std::numeric_limits<int64_t>::max();
    }
    return f;
  }

  // The working-graph neighborhood of u corresponds one-to-one with the
  // substrate neighborhood of its partner.
  bool neighborhood_settled(int u) const {
    int wi = w_of_universe_[u];
    int si = uni_.substrate_index(u);
    if (wi < 0) return false;
    if (working().degree(wi) != rxn_.substrates.degree(si)) return false;
    std::vector<int> from_w, from_s;
    for (const auto &[nbr, bi] : working().neighbors(wi)) {
      from_w.push_back(uni_.substrate_index(universe_of_w_[nbr]));
    }
    for (const auto &[nbr, bi] : rxn_.substrates.neighbors(si)) {
      from_s.push_back(nbr);
    }
    std::sort(from_w.begin(), from_w.end());
    std::sort(from_s.begin(), from_s.end());
    return from_w == from_s;
  }

  ChiralityChange chirality_change(int wi, int si) const {
    const Molecule &s = rxn_.substrates;
    Chirality tw = working().atom(wi).spec.chirality;
    Chirality ts = s.atom(si).spec.chirality;
    if (ts == Chirality::kNone && tw == Chirality::kNone) {
      return ChiralityChange::kNone;
    }
    if (ts == Chirality::kNone) return ChiralityChange::kToNone;
    int u = universe_of_w_[wi];
    if (!neighborhood_settled(u) ||
        working().atom(wi).implicit_h != s.atom(si).implicit_h) {
      return ChiralityChange::kNone;  // parities not comparable yet
    }
    Chirality cur = chirality_in_frame(working(), wi, cmp_frame_w());
    Chirality want = chirality_in_frame(s, si, cmp_frame_s());
    if (cur == want && cur != Chirality::kNone) return ChiralityChange::kNone;
    Chirality target = chirality_in_frame(s, si, app_frame_s());
    if (target == Chirality::kNone) return ChiralityChange::kNone;
    return target == Chirality::kCW ? ChiralityChange::kToCW
                                    : ChiralityChange::kToCCW;
  }

  const Reaction &rxn_;
  AtomUniverse uni_;
  std::vector<int> apos_;
  internal::GraphEditor editor_;
  std::vector<int> w_of_universe_;
  std::vector<int> universe_of_w_;
};

std::vector<int> positions_of(const CanonicalOrder &order, int size) {
  std::vector<int> apos(size, 0);
  for (size_t pos = 0; pos < order.order.size(); ++pos) {
    apos[order.order[pos]] = static_cast<int>(pos);
  }
  return apos;
}

std::vector<int> identity_order(int size) {
  std::vector<int> order(size);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

}  // namespace

std::optional<EditAction> diff_atom_action(const Reaction &rxn, int universe_atom) {
  AtomUniverse uni(rxn);
  Workspace ws(rxn, identity_order(uni.size()));
  return ws.atom_action(universe_atom);
}

std::optional<EditAction> diff_bond_action(const Reaction &rxn, int universe_a,
                                           int universe_b) {
  AtomUniverse uni(rxn);
  Workspace ws(rxn, identity_order(uni.size()));
  return ws.bond_action(universe_a, universe_b);
}

ExtractionResult extract_template(const Reaction &rxn, const CanonicalOrder &order) {
  if (!rxn.validated) {
    throw std::logic_error("extract_template requires a validated reaction");
  }
  AtomUniverse uni(rxn);
  if (static_cast<int>(order.order.size()) != uni.size()) {
    throw std::logic_error("canonical order does not span the atom universe");
  }
  Workspace ws(rxn, positions_of(order, uni.size()));

  std::vector<Recorded> recorded;
  std::vector<int> added_order;       // universe ids, in add order
  std::set<int> center;               // product universe ids
  auto note_center = [&](const Slot &slot) {
    if (uni.is_product(slot.index)) center.insert(slot.index);
  };

  const int max_sweeps = 2 * (uni.size() + rxn.substrates.num_bonds()) + 8;
  for (int sweep = 0;; ++sweep) {
    if (sweep > max_sweeps) {
      throw_error(ErrorCode::kNonTerminating, "edit sweep budget exhausted");
    }
    bool progress = false;
    for (int u : order.order) {
      if (auto action = ws.atom_action(u)) {
        Recorded rec{*action, -1};
        if (auto *add = std::get_if<AddAtomAction>(&rec.action)) {
          rec.added_universe = u;
          note_center(add->attach);
          added_order.push_back(u);
        } else {
          note_center(std::get<EditAtomAction>(rec.action).slot);
        }
        ws.apply(rec);
        recorded.push_back(std::move(rec));
        progress = true;
      }
      for (int v : ws.bond_partners(u)) {
        if (auto action = ws.bond_action(u, v)) {
          Recorded rec{*action, -1};
          const auto &bond = std::get<EditBondAction>(rec.action);
          note_center(bond.from);
          note_center(bond.to);
          ws.apply(rec);
          recorded.push_back(std::move(rec));
          progress = true;
        }
      }
    }
    if (!progress) break;
  }

  bool settled = molecules_isomorphic(ws.working(), rxn.substrates);
  if (recorded.empty()) {
    if (settled) {
      throw_error(ErrorCode::kEmptyCenter, "no edit distinguishes P from S");
    }
    throw_error(ErrorCode::kNonTerminating, "no applicable edit action");
  }
  if (!settled) {
    throw_error(ErrorCode::kNonTerminating,
                "working graph did not reach the substrates");
  }

  // Renumber universe ids into template slots: center atoms in canonical
  // order become c0.., added atoms a0.. in creation order.
  std::vector<int> apos = positions_of(order, uni.size());
  std::vector<int> center_sorted(center.begin(), center.end());
  std::sort(center_sorted.begin(), center_sorted.end(),
            [&](int x, int y) { return apos[x] < apos[y]; });
  std::vector<Slot> slot_of(uni.size(), Slot{false, -1});
  for (size_t k = 0; k < center_sorted.size(); ++k) {
    slot_of[center_sorted[k]] = Slot{false, static_cast<int>(k)};
  }
  for (size_t k = 0; k < added_order.size(); ++k) {
    slot_of[added_order[k]] = Slot{true, static_cast<int>(k)};
  }
  auto renumber = [&](Slot &slot) {
    slot = slot_of[slot.index];
    if (slot.index < 0) {
      throw std::logic_error("action references an atom outside the center");
    }
  };

  Template tmpl;
  tmpl.n_center = static_cast<int>(center_sorted.size());
  for (Recorded &rec : recorded) {
    std::visit(
        [&](auto &action) {
          using T = std::decay_t<decltype(action)>;
          if constexpr (std::is_same_v<T, AddAtomAction>) {
            renumber(action.attach);
          } else if constexpr (std::is_same_v<T, EditAtomAction>) {
            renumber(action.slot);
          } else {
            renumber(action.from);
            renumber(action.to);
          }
        },
        rec.action);
    tmpl.actions.push_back(std::move(rec.action));
  }

  const Molecule &p = rxn.product;
  for (int u : center_sorted) {
    SlotSignature sig;
    sig.element = p.atom(u).spec.element;
    sig.formal_charge = p.atom(u).spec.formal_charge;
    sig.aromatic = p.atom(u).spec.aromatic;
    sig.implicit_h = p.atom(u).implicit_h;
    tmpl.signature.slots.push_back(sig);
  }
  for (size_t x = 0; x < center_sorted.size(); ++x) {
    for (size_t y = x + 1; y < center_sorted.size(); ++y) {
      int order_x2 = p.bond_order_x2(center_sorted[x], center_sorted[y]);
      if (order_x2 != 0) {
        tmpl.signature.bonds.push_back(
            {static_cast<int>(x), static_cast<int>(y), order_x2});
      }
    }
  }
  tmpl.kind = (tmpl.n_center >= 2 && tmpl.signature.find_bond(0, 1) >= 0)
                  ? TemplateKind::kBond
                  : TemplateKind::kAtom;

  ExtractionResult result;
  result.key = encode_template(tmpl);
  result.center_atoms = center_sorted;  // product universe ids = indices
  result.tmpl = std::move(tmpl);
  return result;
}

// --- key encoding ----------------------------------------------------------

namespace {

std::string decimal_text(int x2) {
  std::string out;
  if (x2 < 0) {
    out += '-';
    x2 = -x2;
  }
  out += std::to_string(x2 / 2);
  out += (x2 % 2) != 0 ? ".5" : ".0";
  return out;
}

char aromatic_change_char(AromaticChange c) {
  switch (c) {
    case AromaticChange::kNone: return 'n';
    case AromaticChange::kSet: return 's';
    case AromaticChange::kClear: return 'c';
  }
  return 'n';
}

char chirality_change_char(ChiralityChange c) {
  switch (c) {
    case ChiralityChange::kNone: return 'n';
    case ChiralityChange::kToNone: return '0';
    case ChiralityChange::kToCW: return '+';
    case ChiralityChange::kToCCW: return '-';
  }
  return 'n';
}

char stereo_char(BondStereo s) {
  switch (s) {
    case BondStereo::kNone: return 'n';
    case BondStereo::kCis: return 'c';
    case BondStereo::kTrans: return 't';
  }
  return 'n';
}

char dir_char(BondDir d) {
  switch (d) {
    case BondDir::kNone: return 'n';
    case BondDir::kUp: return 'u';
    case BondDir::kDown: return 'd';
  }
  return 'n';
}

}  // namespace

std::string encode_template(const Template &t) {
  std::string out = std::to_string(t.n_center) + "|" +
                    (t.kind == TemplateKind::kAtom ? "atom" : "bond") + "|";
  for (size_t i = 0; i < t.actions.size(); ++i) {
    if (i > 0) out += ";";
    const EditAction &action = t.actions[i];
    if (const auto *add = std::get_if<AddAtomAction>(&action)) {
      out += "AA:el=" + std::to_string(add->element) +
             ",chg=" + std::to_string(add->formal_charge) +
             ",hs=" + std::to_string(add->num_h) +
             ",ar=" + (add->aromatic ? "1" : "0") +
             ",ord=" + decimal_text(add->bond_order_x2) + "@" +
             slot_text(add->attach);
    } else if (const auto *edit = std::get_if<EditAtomAction>(&action)) {
      out += "EA:dchg=" + std::to_string(edit->charge_delta) +
             ",dhs=" + std::to_string(edit->h_delta) + ",ar=";
      out += aromatic_change_char(edit->aromatic_change);
      out += ",chir=";
      out += chirality_change_char(edit->chirality_change);
      out += "@" + slot_text(edit->slot);
    } else {
      const auto &bond = std::get<EditBondAction>(action);
      out += "EB:dord=" + decimal_text(bond.order_delta_x2) + ",st=";
      out += stereo_char(bond.stereo_target);
      out += ",dir=";
      out += dir_char(bond.dir_target);
      out += "@" + slot_text(bond.from) + "," + slot_text(bond.to);
    }
  }
  return out;
}

namespace {

class KeyCursor {
public:
  explicit KeyCursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(std::string_view literal) {
    if (text_.substr(pos_, literal.size()) != literal) {
      fail("expected '" + std::string(literal) + "'");
    }
    pos_ += literal.size();
  }

  bool take(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int read_int() {
    bool negative = take('-');
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected digit");
    long value = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (text_[pos_++] - '0');
      if (value > 1000000) fail("number out of range");
    }
    return static_cast<int>(negative ? -value : value);
  }

  // one-decimal fixed number, doubled: "1.5" -> 3
  int read_decimal_x2() {
    bool negative = take('-');
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected digit");
    int whole = read_int();
    expect(".");
    char frac = peek();
    if (frac != '0' && frac != '5') fail("decimal must end in .0 or .5");
    ++pos_;
    int x2 = whole * 2 + (frac == '5' ? 1 : 0);
    return negative ? -x2 : x2;
  }

  char read_class(std::string_view allowed) {
    char c = peek();
    if (allowed.find(c) == std::string_view::npos) {
      fail("unexpected symbol '" + std::string(1, c) + "'");
    }
    ++pos_;
    return c;
  }

  [[noreturn]] void fail(const std::string &why) const {
    throw_error(ErrorCode::kMalformedKey,
                why + " at offset " + std::to_string(pos_) + " in '" +
                    std::string(text_) + "'");
  }

private:
  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

Template decode_template(std::string_view key) {
  KeyCursor cur(key);
  Template t;
  t.n_center = cur.read_int();
  if (t.n_center < 1) cur.fail("center count must be at least 1");
  cur.expect("|");
  if (cur.peek() == 'a') {
    cur.expect("atom");
    t.kind = TemplateKind::kAtom;
  } else {
    cur.expect("bond");
    t.kind = TemplateKind::kBond;
    if (t.n_center < 2) cur.fail("bond template needs two center atoms");
  }
  cur.expect("|");

  int adds_seen = 0;
  auto read_slot = [&](bool allow_added) {
    Slot slot;
    char kind = cur.read_class("ca");
    slot.added = kind == 'a';
    slot.index = cur.read_int();
    if (slot.added) {
      if (!allow_added || slot.index >= adds_seen) {
        cur.fail("added-atom slot referenced before creation");
      }
    } else if (slot.index >= t.n_center) {
      cur.fail("center slot out of range");
    }
    if (slot.index < 0) cur.fail("negative slot");
    return slot;
  };

  while (true) {
    char tag = cur.read_class("AE");
    if (tag == 'A') {
      cur.expect("A:el=");
      AddAtomAction add;
      add.element = cur.read_int();
      if (add.element < 1 || add.element > 118) cur.fail("bad element");
      cur.expect(",chg=");
      add.formal_charge = cur.read_int();
      cur.expect(",hs=");
      add.num_h = cur.read_int();
      if (add.num_h < 0) cur.fail("negative hydrogen count");
      cur.expect(",ar=");
      add.aromatic = cur.read_class("01") == '1';
      cur.expect(",ord=");
      add.bond_order_x2 = cur.read_decimal_x2();
      if (add.bond_order_x2 != kSingleX2 && add.bond_order_x2 != kAromaticX2 &&
          add.bond_order_x2 != kDoubleX2 && add.bond_order_x2 != kTripleX2) {
        cur.fail("bad attach bond order");
      }
      cur.expect("@");
      add.attach = read_slot(true);
      ++adds_seen;
      t.actions.emplace_back(add);
    } else {
      char which = cur.read_class("AB");
      if (which == 'A') {
        cur.expect(":dchg=");
        EditAtomAction edit;
        edit.charge_delta = cur.read_int();
        cur.expect(",dhs=");
        edit.h_delta = cur.read_int();
        cur.expect(",ar=");
        switch (cur.read_class("nsc")) {
          case 'n': edit.aromatic_change = AromaticChange::kNone; break;
          case 's': edit.aromatic_change = AromaticChange::kSet; break;
          case 'c': edit.aromatic_change = AromaticChange::kClear; break;
        }
        cur.expect(",chir=");
        switch (cur.read_class("n0+-")) {
          case 'n': edit.chirality_change = ChiralityChange::kNone; break;
          case '0': edit.chirality_change = ChiralityChange::kToNone; break;
          case '+': edit.chirality_change = ChiralityChange::kToCW; break;
          case '-': edit.chirality_change = ChiralityChange::kToCCW; break;
        }
        cur.expect("@");
        edit.slot = read_slot(true);
        t.actions.emplace_back(edit);
      } else {
        cur.expect(":dord=");
        EditBondAction bond;
        bond.order_delta_x2 = cur.read_decimal_x2();
        cur.expect(",st=");
        switch (cur.read_class("nct")) {
          case 'n': bond.stereo_target = BondStereo::kNone; break;
          case 'c': bond.stereo_target = BondStereo::kCis; break;
          case 't': bond.stereo_target = BondStereo::kTrans; break;
        }
        cur.expect(",dir=");
        switch (cur.read_class("nud")) {
          case 'n': bond.dir_target = BondDir::kNone; break;
          case 'u': bond.dir_target = BondDir::kUp; break;
          case 'd': bond.dir_target = BondDir::kDown; break;
        }
        cur.expect("@");
        bond.from = read_slot(true);
        cur.expect(",");
        bond.to = read_slot(true);
        if (bond.from == bond.to) cur.fail("bond slots must differ");
        t.actions.emplace_back(bond);
      }
    }
    if (cur.done()) break;
    cur.expect(";");
  }
  return t;
}

}  // namespace moledit
