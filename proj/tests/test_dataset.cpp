//
// Project moledit - Copyright 2026 The moledit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moledit/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "testutil.hpp"

namespace moledit {
namespace {

namespace fs = std::filesystem;

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string &name, const std::string &content) {
    path = fs::temp_directory_path() / ("moledit_test_" + name);
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

std::string jsonl_of(const TemplateLibrary &lib) {
  std::ostringstream out;
  lib.write_jsonl(out);
  return out.str();
}

TEST_CASE("load_split reads the bundled fixture") {
  LoadOptions opts;
  opts.class_column = 2;
  DatasetSplit split = load_split(test::data_path("fixture_reactions.tsv"), opts);
  CHECK(split.reactions.size() == 200);
  CHECK(split.malformed_rows == 0);
  CHECK(split.reactions[0].id == "fx0000");
  CHECK(split.reactions[0].reaction_class >= 1);
  CHECK(split.reactions[0].rxn_smiles.find(">>") != std::string::npos);
}

TEST_CASE("load_split error handling") {
  try {
    load_split("/nonexistent/file.tsv", {});
    FAIL("expected FileNotFound");
  } catch (const MolError &err) {
    CHECK(err.code() == ErrorCode::kFileNotFound);
  }

  TempFile empty("empty.tsv", "");
  try {
    load_split(empty.path.string(), {});
    FAIL("expected BadHeader");
  } catch (const MolError &err) {
    CHECK(err.code() == ErrorCode::kBadHeader);
  }

  TempFile thin_header("thin.tsv", "id\nrow\n");
  try {
    load_split(thin_header.path.string(), {});
    FAIL("expected BadHeader");
  } catch (const MolError &err) {
    CHECK(err.code() == ErrorCode::kBadHeader);
  }

  TempFile with_bad_row("rows.tsv",
                        "id\trxn\nok\tC>>C\nonly_one_column\nok2\tCC>>CC\n");
  DatasetSplit split = load_split(with_bad_row.path.string(), {});
  CHECK(split.reactions.size() == 2);
  CHECK(split.malformed_rows == 1);
}

TEST_CASE("extract_all buckets failures by reason") {
  TempFile file("mixed.tsv",
                "id\trxn\n"
                "good\t[CH3:1][C:2](=[O:3])Cl.[OH:4][CH3:5]>>"
                "[CH3:1][C:2](=[O:3])[O:4][CH3:5]\n"
                "broken\tC1CC>>C\n"
                "ident\t[CH4:1]>>[CH4:1]\n"
                "unmapped\tCC>>CC\n");
  DatasetSplit split = load_split(file.path.string(), {});
  ExtractionRun run = extract_all(split, OrderStrategy::kWLCanonical, 0, 1);
  CHECK(run.library.size() == 1);
  CHECK(run.results[0].ok);
  CHECK(run.skipped.at("unclosed_ring") == 1);
  CHECK(run.skipped.at("empty_center") == 1);
  CHECK(run.skipped.at("unmapped_product_atom") == 1);
  int64_t skipped_total = 0;
  for (const auto &[reason, count] : run.skipped) skipped_total += count;
  CHECK(skipped_total + run.library.total_count() ==
        static_cast<int64_t>(split.reactions.size()));
}

TEST_CASE("pipeline output is independent of worker count") {
  LoadOptions opts;
  opts.class_column = 2;
  DatasetSplit split = load_split(test::data_path("fixture_reactions.tsv"), opts);
  ExtractionRun serial = extract_all(split, OrderStrategy::kWLCanonical, 0, 1);
  ExtractionRun wide = extract_all(split, OrderStrategy::kWLCanonical, 0, 8);
  CHECK(jsonl_of(serial.library) == jsonl_of(wide.library));
  CHECK(serial.skipped == wide.skipped);
}

TEST_CASE("self coverage of the fixture is total") {
  LoadOptions opts;
  opts.class_column = 2;
  DatasetSplit split = load_split(test::data_path("fixture_reactions.tsv"), opts);
  ExtractionRun run = extract_all(split, OrderStrategy::kWLCanonical, 0, 4);
  CoverageReport report =
      coverage(run.library, split, OrderStrategy::kWLCanonical, 0, 4);
  CHECK(report.n_test == 200);
  CHECK(report.n_extractable == 200);
  CHECK(report.n_key_covered == 200);
  CHECK(report.n_covered == 200);
  CHECK(report.coverage == 1.0);
  CHECK(report.key_coverage == 1.0);
}

TEST_CASE("empty library covers nothing") {
  TempFile file("tiny.tsv",
                "id\trxn\n"
                "good\t[CH3:1][C:2](=[O:3])Cl.[OH:4][CH3:5]>>"
                "[CH3:1][C:2](=[O:3])[O:4][CH3:5]\n");
  DatasetSplit split = load_split(file.path.string(), {});
  TemplateLibrary empty;
  empty.seal();
  CoverageReport report =
      coverage(empty, split, OrderStrategy::kWLCanonical, 0, 1);
  CHECK(report.n_covered == 0);
  CHECK(report.coverage == 0.0);
  CHECK(report.n_extractable == 1);
}

TEST_CASE("more training data never lowers coverage") {
  LoadOptions opts;
  opts.class_column = 2;
  DatasetSplit full = load_split(test::data_path("fixture_reactions.tsv"), opts);
  DatasetSplit half = full;
  half.reactions.resize(100);
  ExtractionRun small = extract_all(half, OrderStrategy::kWLCanonical, 0, 4);
  ExtractionRun big = extract_all(full, OrderStrategy::kWLCanonical, 0, 4);
  CoverageReport from_half =
      coverage(small.library, full, OrderStrategy::kWLCanonical, 0, 4);
  CoverageReport from_full =
      coverage(big.library, full, OrderStrategy::kWLCanonical, 0, 4);
  CHECK(from_half.n_covered <= from_full.n_covered);
  CHECK(from_half.n_key_covered <= from_full.n_key_covered);
}

TEST_CASE("report serialization is stable and complete") {
  CoverageReport report;
  report.strategy = "wl";
  report.n_templates = 3;
  report.n_test = 10;
  report.n_extractable = 8;
  report.n_key_covered = 7;
  report.n_covered = 6;
  report.key_coverage = 7.0 / 8.0;
  report.coverage = 6.0 / 8.0;
  report.skipped["parse_error"] = 1;
  report.skipped["empty_center"] = 1;
  report.wall_time_s = 0.25;
  std::string once = report_json(report);
  std::string twice = report_json(report);
  CHECK(once == twice);
  CHECK(once.find("\"schema_version\": 1") != std::string::npos);
  CHECK(once.find("\"parse_error\": 1") != std::string::npos);
  CHECK(once.find("\"empty_center\": 1") != std::string::npos);

  TempFile target("report.json", "");
  write_report(report, target.path.string());
  std::ifstream in(target.path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  CHECK(buffer.str() == once);
}

TEST_CASE("canonical ordering shrinks the library") {
  LoadOptions opts;
  opts.class_column = 2;
  DatasetSplit split = load_split(test::data_path("fixture_reactions.tsv"), opts);
  int wl = extract_all(split, OrderStrategy::kWLCanonical, 0, 4).library.size();
  int smi = extract_all(split, OrderStrategy::kCanonicalSmilesOrder, 0, 4)
                .library.size();
  int rnd = extract_all(split, OrderStrategy::kRandom, 7, 4).library.size();
  CHECK(wl <= smi);
  CHECK(smi <= rnd);
  CHECK(wl < rnd);
}

TEST_CASE("strategy names round trip") {
  for (OrderStrategy s :
       {OrderStrategy::kWLCanonical, OrderStrategy::kCanonicalSmilesOrder,
        OrderStrategy::kRandom, OrderStrategy::kInputOrder}) {
    CHECK(strategy_from_name(strategy_name(s)) == s);
  }
  CHECK_THROWS_AS(strategy_from_name("bogus"), std::invalid_argument);
}

}  // namespace
}  // namespace moledit
