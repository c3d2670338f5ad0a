//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLEDIT_SRC_VALENCE_HPP_
#define MOLEDIT_SRC_VALENCE_HPP_

#include <string>
#include <vector>

#include "moledit/errors.hpp"
#include "moledit/molecule.hpp"

namespace moledit::internal {

inline bool is_organic_subset(int element) {
  switch (element) {
    case 5: case 6: case 7: case 8: case 9: case 15:
    case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

inline bool aromatic_capable(int element) {
  switch (element) {
    case 5: case 6: case 7: case 8: case 15: case 16: case 33: case 34:
      return true;
    default:
      return false;
  }
}

// Default valence sets: B=3, C=4, N=3, O=2, P=3/5, S=2/4/6, halogens=1.
inline const std::vector<int> &default_valences(int element) {
  static const std::vector<int> kNone = {};
  static const std::vector<int> kB = {3};
  static const std::vector<int> kC = {4};
  static const std::vector<int> kN = {3};
  static const std::vector<int> kO = {2};
  static const std::vector<int> kP = {3, 5};
  static const std::vector<int> kS = {2, 4, 6};
  static const std::vector<int> kHalogen = {1};
  switch (element) {
    case 5: return kB;
    case 6: return kC;
    case 7: return kN;
    case 8: return kO;
    case 15: return kP;
    case 16: return kS;
    case 9: case 17: case 35: case 53: return kHalogen;
    default: return kNone;
  }
}

// Implicit hydrogen count of an unbracketed atom. Aromatic atoms fill up to
// the lowest default valence only, with the half-integral bond sum floored
// (Daylight convention: aromatic C in benzene gets one hydrogen, a fused
// aromatic C gets none). Returns -1 instead of throwing when `strict` is
// false, which the writer uses to decide whether an atom needs brackets.
inline int organic_implicit_h(int element, bool aromatic, int order_x2_sum,
                              int atom_index, bool strict = true) {
  const std::vector<int> &valences = default_valences(element);
  int effective = order_x2_sum / 2;
  auto overflow = [&]() -> int {
    if (!strict) return -1;
    throw_error(ErrorCode::kValenceOverflow,
                "atom " + std::to_string(atom_index) + " (" +
                    std::string(element_symbol(element)) +
                    ") has bond order sum " +
                    std::to_string(order_x2_sum / 2.0) +
                    " beyond its default valences");
  };
  if (valences.empty()) return strict ? 0 : -1;
  if (aromatic) {
    // aromatic notation is trusted; ring membership may push the floored
    // bond sum past the table (furan O sees 3.0) without being an error
    return std::max(0, valences.front() - effective);
  }
  for (int v : valences) {
    if (effective <= v) return v - effective;
  }
  return overflow();
}

}  // namespace moledit::internal

#endif  // MOLEDIT_SRC_VALENCE_HPP_
