#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gradekit/aggregation/aggregation.hpp"

namespace gradekit::report {

/// Provenance of a run, embedded in every ledger and report.
struct RunManifest {
  std::string tool_version;
  std::string corpus_path;  // as given on the command line
  std::string backend_kind;  // "http" or "replay"; empty for stats-only runs
  std::string backend_id;
  std::string model_id;
  double temperature = 0.0;
  std::vector<std::string> templates;
  std::vector<int> conditions;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::string icc_variant;
  std::string levene_center;
  std::string even_median;
  std::string condition3_shell;  // which template shell wraps the AI rubric
  std::string timestamp;  // latest completion retrieval time among the inputs
};

struct LedgerRow {
  aggregation::GradeRecord record;
  std::string question_id;
  int condition = 0;  // 1..3
  double normalized = 0.0;
  std::string retrieved_at;
  std::string rationale;
};

struct LedgerFailure {
  std::string submission_id;
  int condition = 0;
  std::string error;
};

/// Output of one `grade` run: one row per (submission, condition) that graded.
struct Ledger {
  RunManifest manifest;
  std::vector<LedgerRow> rows;
  std::vector<LedgerFailure> failures;
};

std::string ledger_to_json(const Ledger& ledger);
/// ParseError with line/column for malformed documents.
Ledger ledger_from_json(const std::string& text, const std::string& name = "ledger");
Ledger read_ledger(const std::filesystem::path& path);

}  // namespace gradekit::report
