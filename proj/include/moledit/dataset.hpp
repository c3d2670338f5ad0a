//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLEDIT_DATASET_HPP_
#define MOLEDIT_DATASET_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "moledit/template.hpp"
#include "moledit/wl.hpp"

namespace moledit {

std::string_view strategy_name(OrderStrategy strategy);
// Accepts wl | smiles | random | input; throws BadHeader-free invalid_argument.
OrderStrategy strategy_from_name(std::string_view name);

struct DatasetReaction {
  std::string id;
  std::string rxn_smiles;
  int reaction_class = 0;  // 0 = not provided
};

struct DatasetSplit {
  std::string name;
  std::vector<DatasetReaction> reactions;
  int64_t malformed_rows = 0;  // structurally broken lines, recorded not fatal
};

struct LoadOptions {
  char delimiter = '\t';
  int id_column = 0;
  int rxn_column = 1;
  int class_column = -1;  // -1 when the file has no class column
  bool header = true;
};

// Streams a delimited reaction file. Throws FileNotFound and BadHeader.
DatasetSplit load_split(const std::string &path, const LoadOptions &opts = {});

struct PerReactionResult {
  std::string id;
  bool ok = false;
  std::string key;
  Template tmpl;
  std::string skip_reason;        // error-code bucket when !ok
  std::vector<int> center_atoms;  // product indices in slot order
};

struct ExtractionRun {
  TemplateLibrary library;  // sealed
  std::vector<PerReactionResult> results;
  std::map<std::string, int64_t> skipped;
  double wall_time_s = 0.0;
};

// Parallel extraction with worker-count-independent output: results live in
// row order and the library is reduced sequentially from them.
ExtractionRun extract_all(const DatasetSplit &split, OrderStrategy strategy,
                          uint64_t seed, int jobs);

struct CoverageReport {
  int n_templates = 0;
  int64_t n_test = 0;
  int64_t n_extractable = 0;
  int64_t n_key_covered = 0;  // extracted key exists in the library
  int64_t n_covered = 0;      // and applying the library template regenerates S
  double key_coverage = 0.0;
  double coverage = 0.0;
  std::map<std::string, int64_t> skipped;
  std::string strategy;
  uint64_t seed = 0;
  double wall_time_s = 0.0;
};

// A test reaction is covered when its key (same ordering strategy) is in the
// library and the library's template applied at the extraction-derived
// anchor reproduces the substrates. Key-hit and applied-hit rates are both
// reported.
CoverageReport coverage(const TemplateLibrary &library, const DatasetSplit &test,
                        OrderStrategy strategy, uint64_t seed, int jobs);

std::string report_json(const CoverageReport &report);
void write_report(const CoverageReport &report, const std::string &path);

}  // namespace moledit

#endif  // MOLEDIT_DATASET_HPP_
