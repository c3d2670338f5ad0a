//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moledit/dataset.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "moledit/apply.hpp"
#include "moledit/smiles.hpp"

namespace moledit {

std::string_view strategy_name(OrderStrategy strategy) {
  switch (strategy) {
    case OrderStrategy::kWLCanonical: return "wl";
    case OrderStrategy::kCanonicalSmilesOrder: return "smiles";
    case OrderStrategy::kRandom: return "random";
    case OrderStrategy::kInputOrder: return "input";
  }
  return "wl";
}

OrderStrategy strategy_from_name(std::string_view name) {
  if (name == "wl") return OrderStrategy::kWLCanonical;
  if (name == "smiles") return OrderStrategy::kCanonicalSmilesOrder;
  if (name == "random") return OrderStrategy::kRandom;
  if (name == "input") return OrderStrategy::kInputOrder;
  throw std::invalid_argument("unknown ordering strategy: " + std::string(name));
}

namespace {

std::vector<std::string> split_line(const std::string &line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, delimiter)) fields.push_back(field);
  return fields;
}

}  // namespace

DatasetSplit load_split(const std::string &path, const LoadOptions &opts) {
  std::ifstream file(path);
  if (!file) {
    throw_error(ErrorCode::kFileNotFound, path);
  }
  DatasetSplit split;
  split.name = path;
  int needed = std::max(opts.id_column,
                        std::max(opts.rxn_column, opts.class_column)) + 1;

  std::string line;
  if (opts.header) {
    if (!std::getline(file, line)) {
      throw_error(ErrorCode::kBadHeader, "empty file: " + path);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(split_line(line, opts.delimiter).size()) < needed) {
      throw_error(ErrorCode::kBadHeader,
                  "header has fewer columns than configured: " + path);
    }
  }
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line, opts.delimiter);
    if (static_cast<int>(fields.size()) < needed) {
      ++split.malformed_rows;
      continue;
    }
    DatasetReaction rxn;
    rxn.id = fields[opts.id_column];
    rxn.rxn_smiles = fields[opts.rxn_column];
    if (opts.class_column >= 0) {
      try {
        rxn.reaction_class = std::stoi(fields[opts.class_column]);
      } catch (const std::exception &) {
        rxn.reaction_class = 0;
      }
    }
    split.reactions.push_back(std::move(rxn));
  }
  if (!opts.header && split.reactions.empty() && split.malformed_rows == 0) {
    throw_error(ErrorCode::kBadHeader, "empty file: " + path);
  }
  return split;
}

namespace {

PerReactionResult extract_one(const DatasetReaction &row, OrderStrategy strategy,
                              uint64_t seed) {
  PerReactionResult out;
  out.id = row.id;
  try {
    Reaction rxn = parse_reaction(row.rxn_smiles);
    map_correspondence(rxn);
    CanonicalOrder order = canonical_atom_order(rxn, strategy, seed);
    ExtractionResult extraction = extract_template(rxn, order);
    out.ok = true;
    out.key = std::move(extraction.key);
    out.center_atoms = std::move(extraction.center_atoms);
    out.tmpl = std::move(extraction.tmpl);
  } catch (const MolError &err) {
    out.skip_reason = std::string(err.code_name());
  }
  return out;
}

template <typename Fn>
void run_rows(int64_t n, int jobs, Fn &&fn) {
  if (jobs <= 1 || n <= 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::thread> workers;
  int count = std::min<int64_t>(jobs, n);
  workers.reserve(count);
  for (int t = 0; t < count; ++t) {
    workers.emplace_back([&] {
      for (int64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread &worker : workers) worker.join();
}

}  // namespace

ExtractionRun extract_all(const DatasetSplit &split, OrderStrategy strategy,
                          uint64_t seed, int jobs) {
  auto start = std::chrono::steady_clock::now();
  ExtractionRun run;
  run.results.resize(split.reactions.size());
  run_rows(static_cast<int64_t>(split.reactions.size()), jobs, [&](int64_t i) {
    run.results[i] = extract_one(split.reactions[i], strategy, seed);
  });

  // Sequential reduction in row order keeps the output independent of the
  // worker count; ids are reassigned by sorted key at seal time anyway.
  TemplateLibrary library;
  for (const PerReactionResult &result : run.results) {
    if (result.ok) {
      library.add(result.key, result.tmpl, result.id);
    } else {
      ++run.skipped[result.skip_reason];
    }
  }
  if (split.malformed_rows > 0) run.skipped["malformed_row"] += split.malformed_rows;
  library.seal();
  run.library = std::move(library);
  run.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return run;
}

CoverageReport coverage(const TemplateLibrary &library, const DatasetSplit &test,
                        OrderStrategy strategy, uint64_t seed, int jobs) {
  auto start = std::chrono::steady_clock::now();
  CoverageReport report;
  report.strategy = std::string(strategy_name(strategy));
  report.seed = seed;
  report.n_templates = library.size();
  report.n_test = static_cast<int64_t>(test.reactions.size());

  struct RowOutcome {
    bool extractable = false;
    bool key_hit = false;
    bool applied = false;
    std::string skip_reason;
  };
  std::vector<RowOutcome> outcomes(test.reactions.size());

  run_rows(static_cast<int64_t>(test.reactions.size()), jobs, [&](int64_t i) {
    RowOutcome &out = outcomes[i];
    try {
      Reaction rxn = parse_reaction(test.reactions[i].rxn_smiles);
      map_correspondence(rxn);
      CanonicalOrder order = canonical_atom_order(rxn, strategy, seed);
      ExtractionResult extraction = extract_template(rxn, order);
      out.extractable = true;
      const TemplateEntry *entry = library.find(extraction.key);
      if (entry == nullptr) return;
      out.key_hit = true;

      // The extraction already names the full slot assignment, so apply the
      // library template right there; templates whose key matches but whose
      // edits cannot run (or land elsewhere) stay uncovered.
      try {
        Molecule result =
            apply_template(rxn.product, entry->tmpl, extraction.center_atoms);
        if (molecules_isomorphic(result, rxn.substrates)) {
          out.applied = true;
          return;
        }
      } catch (const MolError &) {
        // fall through to signature-guided enumeration
      }
      Anchor anchor;
      if (entry->tmpl.kind == TemplateKind::kAtom) {
        anchor = AtomSite{extraction.center_atoms[0]};
      } else {
        anchor = BondSite{extraction.center_atoms[0], extraction.center_atoms[1]};
      }
      try {
        for (const SiteAssignment &assignment :
             match_sites(rxn.product, entry->tmpl, anchor)) {
          try {
            Molecule result = apply_template(rxn.product, entry->tmpl, assignment);
            if (molecules_isomorphic(result, rxn.substrates)) {
              out.applied = true;
              break;
            }
          } catch (const MolError &) {
            // incompatible assignment; try the next one
          }
        }
      } catch (const MolError &) {
        // anchor rejected by the stored signature: key hit without coverage
      }
    } catch (const MolError &err) {
      out.skip_reason = std::string(err.code_name());
    }
  });

  for (const RowOutcome &out : outcomes) {
    if (!out.skip_reason.empty()) {
      ++report.skipped[out.skip_reason];
      continue;
    }
    if (out.extractable) {
      ++report.n_extractable;
      if (out.key_hit) ++report.n_key_covered;
      if (out.applied) ++report.n_covered;
    }
  }
  if (test.malformed_rows > 0) report.skipped["malformed_row"] += test.malformed_rows;
  if (report.n_extractable > 0) {
    report.key_coverage = static_cast<double>(report.n_key_covered) /
                          static_cast<double>(report.n_extractable);
    report.coverage = static_cast<double>(report.n_covered) /
                      static_cast<double>(report.n_extractable);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

std::string report_json(const CoverageReport &report) {
  nlohmann::json j;  // plain json keeps keys sorted
  j["schema_version"] = 1;
  j["strategy"] = report.strategy;
  j["seed"] = report.seed;
  j["n_templates"] = report.n_templates;
  j["n_test"] = report.n_test;
  j["n_extractable"] = report.n_extractable;
  j["n_key_covered"] = report.n_key_covered;
  j["n_covered"] = report.n_covered;
  j["key_coverage"] = report.key_coverage;
  j["coverage"] = report.coverage;
  nlohmann::json skipped = nlohmann::json::object();
  for (const auto &[reason, count] : report.skipped) skipped[reason] = count;
  j["skipped"] = std::move(skipped);
  j["wall_time_s"] = report.wall_time_s;
  return j.dump(2) + "\n";
}

void write_report(const CoverageReport &report, const std::string &path) {
  std::ofstream file(path);
  if (!file) {
    throw_error(ErrorCode::kFileNotFound, "cannot write " + path);
  }
  file << report_json(report);
}

}  // namespace moledit
