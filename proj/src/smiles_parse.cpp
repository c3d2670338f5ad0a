//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "moledit/smiles.hpp"
#include "valence.hpp"

namespace moledit {

using internal::aromatic_capable;
using internal::organic_implicit_h;

namespace {

enum class BondToken { kNone, kSingle, kDouble, kTriple, kAromatic, kUp, kDown };

struct RingSlot {
  int atom = -1;
  BondToken token = BondToken::kNone;
  int seq_pos = -1;  // position reserved in the opening atom's neighbor seq
};

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Molecule run() {
    if (text_.empty()) throw_error(ErrorCode::kEmptyInput, "empty SMILES");
    while (pos_ < text_.size()) {
      step();
    }
    finish();
    return std::move(mol_);
  }

private:
  char peek() const { return text_[pos_]; }
  bool done() const { return pos_ >= text_.size(); }

  void step() {
    char c = text_[pos_];
    switch (c) {
      case '-': take_bond(BondToken::kSingle); break;
      case '=': take_bond(BondToken::kDouble); break;
      case '#': take_bond(BondToken::kTriple); break;
      case ':': take_bond(BondToken::kAromatic); break;
      case '/': take_bond(BondToken::kUp); break;
      case '\\': take_bond(BondToken::kDown); break;
      case '(':
        if (prev_ < 0) {
          throw_error(ErrorCode::kUnbalancedParens,
                      "branch with no preceding atom");
        }
        if (pending_ != BondToken::kNone) {
          throw_error(ErrorCode::kBadBond, "bond symbol before branch open");
        }
        stack_.push_back(prev_);
        ++pos_;
        break;
      case ')':
        if (stack_.empty()) {
          throw_error(ErrorCode::kUnbalancedParens, "unmatched ')'");
        }
        if (pending_ != BondToken::kNone) {
          throw_error(ErrorCode::kBadBond, "dangling bond before ')'");
        }
        prev_ = stack_.back();
        stack_.pop_back();
        ++pos_;
        break;
      case '.':
        if (pending_ != BondToken::kNone) {
          throw_error(ErrorCode::kBadBond, "bond symbol before '.'");
        }
        if (!stack_.empty()) {
          throw_error(ErrorCode::kUnbalancedParens, "'.' inside a branch");
        }
        prev_ = -1;
        ++pos_;
        break;
      case '%': {
        if (pos_ + 2 >= text_.size() || !std::isdigit(text_[pos_ + 1]) ||
            !std::isdigit(text_[pos_ + 2])) {
          throw_error(ErrorCode::kUnclosedRing, "malformed %nn ring closure");
        }
        int num = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
        pos_ += 3;
        ring_event(num);
        break;
      }
      case '[':
        bracket_atom();
        break;
      default:
        if (std::isdigit(c)) {
          ++pos_;
          ring_event(c - '0');
        } else if (std::isalpha(c)) {
          organic_atom();
        } else {
          throw_error(ErrorCode::kBadBracketAtom,
                      std::string("unexpected character '") + c + "'");
        }
    }
  }

  void take_bond(BondToken token) {
    if (prev_ < 0) throw_error(ErrorCode::kBadBond, "bond with no prior atom");
    if (pending_ != BondToken::kNone) {
      throw_error(ErrorCode::kBadBond, "two bond symbols in a row");
    }
    pending_ = token;
    ++pos_;
  }

  void organic_atom() {
    AtomSpec spec;
    std::string_view rest = text_.substr(pos_);
    if (rest.size() >= 2 &&
        (rest.substr(0, 2) == "Cl" || rest.substr(0, 2) == "Br")) {
      spec.element = element_number(rest.substr(0, 2));
      pos_ += 2;
    } else {
      char c = rest[0];
      bool lower = std::islower(static_cast<unsigned char>(c)) != 0;
      char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      constexpr std::string_view kAliphatic = "BCNOPSFI";
      constexpr std::string_view kAromatic = "BCNOPS";
      bool known = lower ? kAromatic.find(up) != std::string_view::npos
                         : kAliphatic.find(up) != std::string_view::npos;
      if (!known) {
        throw_error(ErrorCode::kBadBracketAtom,
                    std::string("unknown atom symbol '") + c + "'");
      }
      spec.aromatic = lower;
      spec.element = element_number(std::string_view(&up, 1));
      ++pos_;
    }
    new_atom(spec, /*bracket=*/false);
  }

  void bracket_atom() {
    size_t end = text_.find(']', pos_);
    if (end == std::string_view::npos) {
      throw_error(ErrorCode::kBadBracketAtom, "missing ']'");
    }
    std::string_view body = text_.substr(pos_ + 1, end - pos_ - 1);
    pos_ = end + 1;
    if (body.empty()) throw_error(ErrorCode::kBadBracketAtom, "empty brackets");

    AtomSpec spec;
    size_t i = 0;
    auto read_int = [&]() {
      int value = 0;
      while (i < body.size() && std::isdigit(body[i])) {
        value = value * 10 + (body[i] - '0');
        ++i;
      }
      return value;
    };
    if (i < body.size() && std::isdigit(body[i])) spec.isotope = read_int();

    if (i >= body.size()) throw_error(ErrorCode::kBadBracketAtom, "no symbol");
    if (std::isupper(body[i])) {
      size_t len = (i + 1 < body.size() && std::islower(body[i + 1]) &&
                    element_number(body.substr(i, 2)) != 0)
                       ? 2
                       : 1;
      spec.element = element_number(body.substr(i, len));
      i += len;
    } else if (std::islower(body[i])) {
      spec.aromatic = true;
      size_t len = 1;
      if (i + 1 < body.size() && (body.substr(i, 2) == "se" || body.substr(i, 2) == "as")) {
        len = 2;
      }
      std::string upper(body.substr(i, len));
      upper[0] = static_cast<char>(std::toupper(upper[0]));
      spec.element = element_number(upper);
      if (!aromatic_capable(spec.element)) {
        throw_error(ErrorCode::kBadBracketAtom,
                    "element cannot be aromatic: " + upper);
      }
      i += len;
    }
    if (spec.element == 0) {
      throw_error(ErrorCode::kBadBracketAtom,
                  "unknown element in [" + std::string(body) + "]");
    }

    if (i < body.size() && body[i] == '@') {
      ++i;
      if (i < body.size() && body[i] == '@') {
        spec.chirality = Chirality::kCW;
        ++i;
      } else {
        spec.chirality = Chirality::kCCW;
      }
    }

    spec.explicit_h = 0;
    if (i < body.size() && body[i] == 'H') {
      ++i;
      spec.explicit_h = 1;
      if (i < body.size() && std::isdigit(body[i])) spec.explicit_h = read_int();
    }

    if (i < body.size() && (body[i] == '+' || body[i] == '-')) {
      char sign = body[i];
      ++i;
      int magnitude = 1;
      if (i < body.size() && std::isdigit(body[i])) {
        magnitude = read_int();
      } else {
        while (i < body.size() && body[i] == sign) {
          ++magnitude;
          ++i;
        }
      }
      spec.formal_charge = sign == '+' ? magnitude : -magnitude;
    }

    if (i < body.size() && body[i] == ':') {
      ++i;
      if (i >= body.size() || !std::isdigit(body[i])) {
        throw_error(ErrorCode::kBadBracketAtom, "bad atom map");
      }
      spec.atom_map = read_int();
    }

    if (i != body.size()) {
      throw_error(ErrorCode::kBadBracketAtom,
                  "trailing characters in [" + std::string(body) + "]");
    }
    new_atom(spec, /*bracket=*/true);
  }

  void new_atom(const AtomSpec &spec, bool bracket) {
    int idx = mol_.add_atom(spec, bracket ? spec.explicit_h : 0);
    seq_.emplace_back();
    if (prev_ >= 0) {
      make_bond(prev_, idx, pending_);
      pending_ = BondToken::kNone;
      seq_[idx].push_back(prev_);
      seq_[prev_].push_back(idx);
    } else if (pending_ != BondToken::kNone) {
      throw_error(ErrorCode::kBadBond, "bond with no prior atom");
    }
    if (bracket && spec.explicit_h > 0) seq_[idx].push_back(-1);
    prev_ = idx;
  }

  void ring_event(int num) {
    if (prev_ < 0) {
      throw_error(ErrorCode::kUnclosedRing, "ring digit with no prior atom");
    }
    auto it = rings_.find(num);
    if (it == rings_.end()) {
      RingSlot slot;
      slot.atom = prev_;
      slot.token = pending_;
      slot.seq_pos = static_cast<int>(seq_[prev_].size());
      seq_[prev_].push_back(-2);  // placeholder until the ring closes
      rings_.emplace(num, slot);
      pending_ = BondToken::kNone;
      return;
    }
    RingSlot slot = it->second;
    rings_.erase(it);
    int open_atom = slot.atom;
    int close_atom = prev_;
    if (open_atom == close_atom) {
      throw_error(ErrorCode::kBadBond, "ring bond to the same atom");
    }
    BondToken token = resolve_ring_tokens(slot.token, pending_);
    pending_ = BondToken::kNone;
    if (mol_.find_bond(open_atom, close_atom) >= 0) {
      throw_error(ErrorCode::kBadBond, "ring closure duplicates a bond");
    }
    make_bond(open_atom, close_atom, token);
    seq_[open_atom][slot.seq_pos] = close_atom;
    seq_[close_atom].push_back(open_atom);
  }

  // Ring bond symbols may be given at either end; they must agree, with
  // up/down marks mirrored because the two ends read the bond in opposite
  // orientations.
  static BondToken resolve_ring_tokens(BondToken open, BondToken close) {
    auto flip = [](BondToken t) {
      if (t == BondToken::kUp) return BondToken::kDown;
      if (t == BondToken::kDown) return BondToken::kUp;
      return t;
    };
    if (close == BondToken::kNone) return open;
    if (open == BondToken::kNone) return flip(close);
    if (open != flip(close) && open != close) {
      throw_error(ErrorCode::kBadBond, "conflicting ring bond symbols");
    }
    if (open == BondToken::kUp || open == BondToken::kDown) {
      if (open != flip(close)) {
        throw_error(ErrorCode::kBadBond, "conflicting ring bond direction");
      }
    }
    return open;
  }

  void make_bond(int from, int to, BondToken token) {
    int order_x2 = kSingleX2;
    BondDir dir = BondDir::kNone;
    switch (token) {
      case BondToken::kNone:
        order_x2 = (mol_.atom(from).spec.aromatic && mol_.atom(to).spec.aromatic)
                       ? kAromaticX2
                       : kSingleX2;
        break;
      case BondToken::kSingle: order_x2 = kSingleX2; break;
      case BondToken::kDouble: order_x2 = kDoubleX2; break;
      case BondToken::kTriple: order_x2 = kTripleX2; break;
      case BondToken::kAromatic: order_x2 = kAromaticX2; break;
      case BondToken::kUp:
        order_x2 = kSingleX2;
        dir = BondDir::kUp;
        break;
      case BondToken::kDown:
        order_x2 = kSingleX2;
        dir = BondDir::kDown;
        break;
    }
    if (order_x2 == kAromaticX2 &&
        (!mol_.atom(from).spec.aromatic || !mol_.atom(to).spec.aromatic)) {
      throw_error(ErrorCode::kBadBond,
                  "aromatic bond between non-aromatic atoms");
    }
    int bi = mol_.add_bond(from, to, order_x2);
    mol_.bond(bi).dir = dir;  // dir is in from->to orientation = a->b
  }

  void finish() {
    if (pending_ != BondToken::kNone) {
      throw_error(ErrorCode::kBadBond, "dangling bond at end of input");
    }
    if (!stack_.empty()) {
      throw_error(ErrorCode::kUnbalancedParens, "unclosed '('");
    }
    if (!rings_.empty()) {
      throw_error(ErrorCode::kUnclosedRing,
                  "ring bond " + std::to_string(rings_.begin()->first) +
                      " never closed");
    }
    for (int i = 0; i < mol_.num_atoms(); ++i) {
      Atom &atom = mol_.atom(i);
      if (atom.spec.explicit_h < 0) {
        int sum = 0;
        for (const auto &[nbr, bi] : mol_.neighbors(i)) {
          sum += mol_.bond(bi).order_x2;
        }
        atom.implicit_h =
            organic_implicit_h(atom.spec.element, atom.spec.aromatic, sum, i);
      }
      if (atom.spec.chirality != Chirality::kNone) {
        atom.chiral_order = seq_[i];
      }
    }
    derive_bond_stereo();
  }

  // Expressed direction of a directional single bond, read from `from`
  // toward its neighbor: true = up.
  static bool expressed_up(const Bond &bond, int from) {
    bool up = bond.dir == BondDir::kUp;
    return bond.a == from ? up : !up;
  }

  // Derive cis/trans flags of double bonds from the parsed up/down marks.
  void derive_bond_stereo() {
    for (int bi = 0; bi < mol_.num_bonds(); ++bi) {
      Bond &bond = mol_.bond(bi);
      if (bond.order_x2 != kDoubleX2) continue;
      int ref_a = -1, ref_b = -1;
      bool up_a = false, up_b = false;
      if (!directional_ref(bond.a, bond.b, ref_a, up_a)) continue;
      if (!directional_ref(bond.b, bond.a, ref_b, up_b)) continue;
      bond.stereo = up_a == up_b ? BondStereo::kCis : BondStereo::kTrans;
      bond.stereo_ref_a = ref_a;
      bond.stereo_ref_b = ref_b;
    }
  }

  bool directional_ref(int endpoint, int exclude, int &ref, bool &up) {
    bool found = false;
    for (const auto &[nbr, bi] : mol_.neighbors(endpoint)) {
      const Bond &bond = mol_.bond(bi);
      if (nbr == exclude || bond.order_x2 != kSingleX2 ||
          bond.dir == BondDir::kNone) {
        continue;
      }
      bool this_up = expressed_up(bond, endpoint);
      if (!found) {
        ref = nbr;
        up = this_up;
        found = true;
      } else if (this_up == up) {
        throw_error(ErrorCode::kBadBond,
                    "conflicting directional bonds at atom " +
                        std::to_string(endpoint));
      }
    }
    return found;
  }

  std::string_view text_;
  size_t pos_ = 0;
  Molecule mol_;
  std::vector<std::vector<int>> seq_;  // chirality neighbor sequences
  std::vector<int> stack_;
  std::map<int, RingSlot> rings_;
  int prev_ = -1;
  BondToken pending_ = BondToken::kNone;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Molecule parse_molecule(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw_error(ErrorCode::kEmptyInput, "empty SMILES");
  return Parser(text).run();
}

ParsedReactionText split_reaction_text(std::string_view text) {
  text = trim(text);
  size_t first = text.find('>');
  size_t second = first == std::string_view::npos
                      ? std::string_view::npos
                      : text.find('>', first + 1);
  if (first == std::string_view::npos || second == std::string_view::npos ||
      text.find('>', second + 1) != std::string_view::npos) {
    throw_error(ErrorCode::kMissingSeparator,
                "reaction SMILES needs exactly two '>' separators");
  }
  ParsedReactionText parts;
  parts.reactant_part = std::string(text.substr(0, first));
  parts.reagent_part = std::string(text.substr(first + 1, second - first - 1));
  parts.product_part = std::string(text.substr(second + 1));
  return parts;
}

Reaction parse_reaction(std::string_view text) {
  ParsedReactionText parts = split_reaction_text(text);
  Reaction rxn;
  rxn.raw = std::string(trim(text));
  rxn.substrates = parse_molecule(parts.reactant_part);
  if (!trim(parts.reagent_part).empty()) {
    parse_molecule(parts.reagent_part);  // syntax check only, then discarded
  }
  rxn.product = parse_molecule(parts.product_part);
  return rxn;
}

}  // namespace moledit
