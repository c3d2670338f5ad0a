//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "moledit/template.hpp"

namespace moledit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string aromatic_change_text(AromaticChange c) {
  switch (c) {
    case AromaticChange::kNone: return "none";
    case AromaticChange::kSet: return "set";
    case AromaticChange::kClear: return "clear";
  }
  return "none";
}

std::string chirality_change_text(ChiralityChange c) {
  switch (c) {
    case ChiralityChange::kNone: return "none";
    case ChiralityChange::kToNone: return "to_none";
    case ChiralityChange::kToCW: return "to_cw";
    case ChiralityChange::kToCCW: return "to_ccw";
  }
  return "none";
}

std::string stereo_text(BondStereo s) {
  switch (s) {
    case BondStereo::kNone: return "none";
    case BondStereo::kCis: return "cis";
    case BondStereo::kTrans: return "trans";
  }
  return "none";
}

std::string dir_text(BondDir d) {
  switch (d) {
    case BondDir::kNone: return "none";
    case BondDir::kUp: return "up";
    case BondDir::kDown: return "down";
  }
  return "none";
}

ordered_json action_json(const EditAction &action) {
  ordered_json j;
  if (const auto *add = std::get_if<AddAtomAction>(&action)) {
    j["type"] = "add_atom";
    j["element"] = add->element;
    j["charge"] = add->formal_charge;
    j["hs"] = add->num_h;
    j["aromatic"] = add->aromatic;
    j["order"] = add->bond_order_x2 / 2.0;
    j["attach"] = slot_text(add->attach);
  } else if (const auto *edit = std::get_if<EditAtomAction>(&action)) {
    j["type"] = "edit_atom";
    j["charge_delta"] = edit->charge_delta;
    j["h_delta"] = edit->h_delta;
    j["aromatic"] = aromatic_change_text(edit->aromatic_change);
    j["chirality"] = chirality_change_text(edit->chirality_change);
    j["slot"] = slot_text(edit->slot);
  } else {
    const auto &bond = std::get<EditBondAction>(action);
    j["type"] = "edit_bond";
    j["order_delta"] = bond.order_delta_x2 / 2.0;
    j["stereo"] = stereo_text(bond.stereo_target);
    j["dir"] = dir_text(bond.dir_target);
    j["slots"] = {slot_text(bond.from), slot_text(bond.to)};
  }
  return j;
}

ordered_json signature_json(const CenterSignature &sig) {
  ordered_json slots = ordered_json::array();
  for (const SlotSignature &slot : sig.slots) {
    ordered_json j;
    j["element"] = slot.element;
    j["charge"] = slot.formal_charge;
    j["aromatic"] = slot.aromatic;
    j["hs"] = slot.implicit_h;
    slots.push_back(std::move(j));
  }
  ordered_json bonds = ordered_json::array();
  for (const auto &bond : sig.bonds) {
    bonds.push_back({bond.u, bond.v, bond.order_x2 / 2.0});
  }
  ordered_json j;
  j["slots"] = std::move(slots);
  j["bonds"] = std::move(bonds);
  return j;
}

CenterSignature signature_from_json(const nlohmann::json &j) {
  CenterSignature sig;
  for (const auto &slot : j.at("slots")) {
    SlotSignature s;
    s.element = slot.at("element").get<int>();
    s.formal_charge = slot.at("charge").get<int>();
    s.aromatic = slot.at("aromatic").get<bool>();
    s.implicit_h = slot.at("hs").get<int>();
    sig.slots.push_back(s);
  }
  for (const auto &bond : j.at("bonds")) {
    CenterSignature::SigBond b;
    b.u = bond.at(0).get<int>();
    b.v = bond.at(1).get<int>();
    b.order_x2 = static_cast<int>(bond.at(2).get<double>() * 2.0 + 0.5);
    sig.bonds.push_back(b);
  }
  return sig;
}

}  // namespace

void TemplateLibrary::add(const std::string &key, const Template &tmpl,
                          const std::string &example_id) {
  auto [it, inserted] = by_key_.try_emplace(key);
  TemplateEntry &entry = it->second;
  if (inserted) {
    entry.key = key;
    entry.tmpl = tmpl;
    entry.count = 1;
    entry.first_example = example_id;
  } else {
    ++entry.count;
  }
  sealed_ = false;
}

void TemplateLibrary::merge(const TemplateLibrary &other) {
  for (const auto &[key, theirs] : other.by_key_) {
    auto [it, inserted] = by_key_.try_emplace(key);
    TemplateEntry &entry = it->second;
    if (inserted) {
      entry = theirs;
      entry.id = -1;
    } else {
      entry.count += theirs.count;
      // keep the smaller example id so merging commutes
      if (theirs.first_example < entry.first_example) {
        entry.first_example = theirs.first_example;
        entry.tmpl = theirs.tmpl;
      }
    }
  }
  sealed_ = false;
}

void TemplateLibrary::seal() {
  order_.clear();
  int id = 0;
  for (auto &[key, entry] : by_key_) {
    entry.id = id++;
    order_.push_back(&entry);
  }
  sealed_ = true;
}

int64_t TemplateLibrary::total_count() const {
  int64_t total = 0;
  for (const auto &[key, entry] : by_key_) total += entry.count;
  return total;
}

const TemplateEntry *TemplateLibrary::find(std::string_view key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &it->second;
}

const TemplateEntry *TemplateLibrary::find_id(int id) const {
  if (id < 0 || id >= static_cast<int>(order_.size())) return nullptr;
  return order_[id];
}

void TemplateLibrary::write_jsonl(std::ostream &os) const {
  for (const TemplateEntry *entry : order_) {
    ordered_json j;
    j["id"] = entry->id;
    j["key"] = entry->key;
    j["n_center"] = entry->tmpl.n_center;
    j["kind"] = entry->tmpl.kind == TemplateKind::kAtom ? "atom" : "bond";
    ordered_json actions = ordered_json::array();
    for (const EditAction &action : entry->tmpl.actions) {
      actions.push_back(action_json(action));
    }
    j["actions"] = std::move(actions);
    j["signature"] = signature_json(entry->tmpl.signature);
    j["count"] = entry->count;
    j["example"] = entry->first_example;
    os << j.dump() << "\n";
  }
}

TemplateLibrary TemplateLibrary::read_jsonl(std::istream &is) {
  TemplateLibrary lib;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    std::string key = j.at("key").get<std::string>();
    // the key is authoritative; structured action fields are conveniences
    Template tmpl = decode_template(key);
    tmpl.signature = signature_from_json(j.at("signature"));
    auto [it, inserted] = lib.by_key_.try_emplace(key);
    TemplateEntry &entry = it->second;
    entry.key = key;
    entry.tmpl = std::move(tmpl);
    entry.count = j.at("count").get<int64_t>();
    entry.first_example = j.at("example").get<std::string>();
  }
  lib.seal();
  return lib;
}

TemplateLibrary library_build(
    const std::vector<std::pair<std::string, ExtractionResult>> &extractions) {
  TemplateLibrary lib;
  for (const auto &[example_id, result] : extractions) {
    lib.add(result.key, result.tmpl, example_id);
  }
  lib.seal();
  return lib;
}

TemplateLibrary library_merge(const TemplateLibrary &a, const TemplateLibrary &b) {
  TemplateLibrary lib;
  lib.merge(a);
  lib.merge(b);
  lib.seal();
  return lib;
}

}  // namespace moledit
