//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLEDIT_ERRORS_HPP_
#define MOLEDIT_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace moledit {

enum class ErrorCode {
  // SMILES / reaction parsing
  kEmptyInput,
  kUnclosedRing,
  kUnbalancedParens,
  kBadBracketAtom,
  kBadBond,
  kValenceOverflow,
  kMissingSeparator,
  // reaction validation
  kDuplicateMapNumber,
  kUnmappedProductAtom,
  kProductAtomMissingFromSubstrates,
  kElementMismatch,
  // extraction
  kEmptyCenter,
  kNonTerminating,
  // template keys
  kMalformedKey,
  // application
  kAnchorMismatch,
  kInvalidResult,
  kSlotUnassigned,
  kNoValidSite,
  // dataset
  kFileNotFound,
  kBadHeader,
};

// Stable snake_case name, used as skip-reason bucket keys in reports.
std::string_view error_code_name(ErrorCode code);

class MolError : public std::runtime_error {
public:
  MolError(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }

private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string &msg) {
  throw MolError(code, std::string(error_code_name(code)) + ": " + msg);
}

}  // namespace moledit

#endif  // MOLEDIT_ERRORS_HPP_
