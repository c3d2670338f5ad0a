//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "moledit/apply.hpp"
#include "moledit/dataset.hpp"
#include "moledit/smiles.hpp"
#include "moledit/template.hpp"

namespace {

using namespace moledit;

// Relative inputs fall back to $MOLEDIT_DATA_DIR when not found directly.
std::string resolve_input(const std::string &path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) return path;
  const char *base = std::getenv("MOLEDIT_DATA_DIR");
  if (base != nullptr && fs::path(path).is_relative()) {
    fs::path joined = fs::path(base) / path;
    if (fs::exists(joined)) return joined.string();
  }
  return path;
}

Anchor parse_anchor(const std::string &text, TemplateKind kind) {
  auto fail = [&] {
    throw_error(ErrorCode::kAnchorMismatch,
                "anchor must be atom:<idx> or bond:<i>,<j>, got '" + text + "'");
  };
  if (text.rfind("atom:", 0) == 0) {
    if (kind != TemplateKind::kAtom) {
      throw_error(ErrorCode::kAnchorMismatch, "template expects a bond anchor");
    }
    return AtomSite{std::stoi(text.substr(5))};
  }
  if (text.rfind("bond:", 0) == 0) {
    std::string rest = text.substr(5);
    size_t comma = rest.find(',');
    if (comma == std::string::npos) fail();
    if (kind != TemplateKind::kBond) {
      throw_error(ErrorCode::kAnchorMismatch, "template expects an atom anchor");
    }
    return BondSite{std::stoi(rest.substr(0, comma)),
                    std::stoi(rest.substr(comma + 1))};
  }
  fail();
  return AtomSite{};
}

LoadOptions make_load_options(const std::string &delim, int id_col, int rxn_col,
                              int class_col, bool no_header) {
  LoadOptions opts;
  if (delim == "tab" || delim == "\t") {
    opts.delimiter = '\t';
  } else if (delim == "comma" || delim == ",") {
    opts.delimiter = ',';
  } else if (delim.size() == 1) {
    opts.delimiter = delim[0];
  } else {
    throw std::invalid_argument("bad --delim value: " + delim);
  }
  opts.id_column = id_col;
  opts.rxn_column = rxn_col;
  opts.class_column = class_col;
  opts.header = !no_header;
  return opts;
}

int cmd_extract(const std::string &input, const std::string &strategy,
                uint64_t seed, const std::string &out_path, int jobs,
                const LoadOptions &load_opts) {
  DatasetSplit split = load_split(resolve_input(input), load_opts);
  std::cerr << "loaded " << split.reactions.size() << " reactions ("
            << split.malformed_rows << " malformed rows)\n";
  ExtractionRun run = extract_all(split, strategy_from_name(strategy), seed, jobs);
  std::ofstream out(out_path);
  if (!out) {
    throw_error(ErrorCode::kFileNotFound, "cannot write " + out_path);
  }
  run.library.write_jsonl(out);
  std::cerr << "extracted " << run.library.size() << " unique templates from "
            << split.reactions.size() << " reactions in " << run.wall_time_s
            << " s\n";
  for (const auto &[reason, count] : run.skipped) {
    std::cerr << "  skipped[" << reason << "] = " << count << "\n";
  }
  return 0;
}

int cmd_coverage(const std::string &library_path, const std::string &test_path,
                 const std::string &report_path, const std::string &strategy,
                 uint64_t seed, int jobs, const LoadOptions &load_opts) {
  std::ifstream lib_file(resolve_input(library_path));
  if (!lib_file) {
    throw_error(ErrorCode::kFileNotFound, library_path);
  }
  TemplateLibrary library = TemplateLibrary::read_jsonl(lib_file);
  DatasetSplit test = load_split(resolve_input(test_path), load_opts);
  CoverageReport report =
      coverage(library, test, strategy_from_name(strategy), seed, jobs);
  write_report(report, report_path);
  std::cerr << "key coverage " << report.n_key_covered << "/"
            << report.n_extractable << ", applied coverage " << report.n_covered
            << "/" << report.n_extractable << "\n";
  std::cout << report_json(report);
  return 0;
}

int cmd_apply(const std::string &product_smiles, const std::string &template_arg,
              const std::string &anchor_text, double p,
              const std::string &library_path) {
  Template tmpl;
  if (template_arg.find('|') != std::string::npos) {
    tmpl = decode_template(template_arg);
  } else {
    if (library_path.empty()) {
      throw_error(ErrorCode::kMalformedKey,
                  "numeric template id needs --library to resolve it");
    }
    std::ifstream lib_file(resolve_input(library_path));
    if (!lib_file) {
      throw_error(ErrorCode::kFileNotFound, library_path);
    }
    TemplateLibrary library = TemplateLibrary::read_jsonl(lib_file);
    const TemplateEntry *entry = library.find_id(std::stoi(template_arg));
    if (entry == nullptr) {
      throw_error(ErrorCode::kMalformedKey, "no template with id " + template_arg);
    }
    tmpl = entry->tmpl;
  }
  Molecule product = parse_molecule(product_smiles);
  Anchor anchor = parse_anchor(anchor_text, tmpl.kind);
  WriteOptions opts;
  opts.canonical = true;
  opts.include_maps = false;
  for (const RankedPrediction &pred : rank_applications(product, tmpl, anchor, p)) {
    std::printf("%s\t%.6g\n", write_molecule(pred.substrates, opts).c_str(),
                pred.score);
  }
  return 0;
}

int cmd_canon_order(const std::string &reaction_smiles, const std::string &strategy,
                    uint64_t seed) {
  Reaction rxn = parse_reaction(reaction_smiles);
  map_correspondence(rxn);
  CanonicalOrder order =
      canonical_atom_order(rxn, strategy_from_name(strategy), seed);
  AtomUniverse uni(rxn);
  bool first = true;
  for (int u : order.order) {
    if (!first) std::cout << " ";
    std::cout << uni.atom_map(rxn, u);
    first = false;
  }
  std::cout << "\n";
  return 0;
}

int cmd_stats(const std::string &library_path) {
  std::ifstream lib_file(resolve_input(library_path));
  if (!lib_file) {
    throw_error(ErrorCode::kFileNotFound, library_path);
  }
  TemplateLibrary library = TemplateLibrary::read_jsonl(lib_file);
  int64_t atom_templates = 0;
  int64_t bond_templates = 0;
  for (const TemplateEntry *entry : library.entries()) {
    (entry->tmpl.kind == TemplateKind::kAtom ? atom_templates : bond_templates)++;
  }
  std::cout << "templates: " << library.size() << "\n";
  std::cout << "occurrences: " << library.total_count() << "\n";
  std::cout << "atom templates: " << atom_templates << "\n";
  std::cout << "bond templates: " << bond_templates << "\n";
  std::vector<const TemplateEntry *> top(library.entries());
  std::sort(top.begin(), top.end(), [](const TemplateEntry *x, const TemplateEntry *y) {
    if (x->count != y->count) return x->count > y->count;
    return x->key < y->key;
  });
  std::cout << "top templates:\n";
  for (size_t i = 0; i < top.size() && i < 10; ++i) {
    std::cout << "  " << top[i]->count << "x  id=" << top[i]->id << "  "
              << top[i]->key << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Molecule-edit retrosynthesis templates: extraction, "
               "canonical ordering, application, and dataset statistics"};
  app.require_subcommand(1);

  std::string input, out_path, library_path, test_path, report_path;
  std::string strategy = "wl";
  std::string delim = "tab";
  std::string product_smiles, template_arg, anchor_text, reaction_smiles;
  uint64_t seed = 0;
  double p = 1.0;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  int id_col = 0, rxn_col = 1, class_col = -1;
  bool no_header = false;

  auto add_table_flags = [&](CLI::App *cmd) {
    cmd->add_option("--delim", delim, "column delimiter: tab or comma");
    cmd->add_option("--id-col", id_col, "id column index");
    cmd->add_option("--rxn-col", rxn_col, "reaction SMILES column index");
    cmd->add_option("--class-col", class_col, "reaction class column index (-1: none)");
    cmd->add_flag("--no-header", no_header, "file has no header line");
  };

  CLI::App *extract = app.add_subcommand("extract", "extract a template library");
  extract->add_option("--input", input, "reaction file")->required();
  extract->add_option("--strategy", strategy, "wl|smiles|random|input")
      ->check(CLI::IsMember({"wl", "smiles", "random", "input"}));
  extract->add_option("--seed", seed, "seed for the random strategy");
  extract->add_option("--out", out_path, "output library JSONL")->required();
  extract->add_option("--jobs", jobs, "worker count");
  add_table_flags(extract);

  CLI::App *cover = app.add_subcommand("coverage", "score a library against a test split");
  cover->add_option("--library", library_path, "library JSONL")->required();
  cover->add_option("--test", test_path, "test reaction file")->required();
  cover->add_option("--report", report_path, "report JSON path")->required();
  cover->add_option("--strategy", strategy, "wl|smiles|random|input")
      ->check(CLI::IsMember({"wl", "smiles", "random", "input"}));
  cover->add_option("--seed", seed, "seed for the random strategy");
  cover->add_option("--jobs", jobs, "worker count");
  add_table_flags(cover);

  CLI::App *apply_cmd = app.add_subcommand("apply", "apply a template to a product");
  apply_cmd->add_option("--product", product_smiles, "product SMILES")->required();
  apply_cmd->add_option("--template", template_arg, "template key or id")->required();
  apply_cmd->add_option("--anchor", anchor_text, "atom:<idx> or bond:<i>,<j>")->required();
  apply_cmd->add_option("--p", p, "model probability to split across sites");
  apply_cmd->add_option("--library", library_path, "library JSONL for id lookup");

  CLI::App *canon = app.add_subcommand("canon-order", "print the canonical atom order");
  canon->add_option("--reaction", reaction_smiles, "atom-mapped reaction SMILES")->required();
  canon->add_option("--strategy", strategy, "wl|smiles|random|input")
      ->check(CLI::IsMember({"wl", "smiles", "random", "input"}));
  canon->add_option("--seed", seed, "seed for the random strategy");

  CLI::App *stats = app.add_subcommand("stats", "summarize a library");
  stats->add_option("--library", library_path, "library JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    if (extract->parsed()) {
      return cmd_extract(input, strategy, seed, out_path, jobs,
                         make_load_options(delim, id_col, rxn_col, class_col,
                                           no_header));
    }
    if (cover->parsed()) {
      return cmd_coverage(library_path, test_path, report_path, strategy, seed,
                          jobs,
                          make_load_options(delim, id_col, rxn_col, class_col,
                                            no_header));
    }
    if (apply_cmd->parsed()) {
      return cmd_apply(product_smiles, template_arg, anchor_text, p, library_path);
    }
    if (canon->parsed()) {
      return cmd_canon_order(reaction_smiles, strategy, seed);
    }
    if (stats->parsed()) {
      return cmd_stats(library_path);
    }
  } catch (const MolError &err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception &err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
