#include "gradekit/report/ledger.hpp"

#include "common/io.hpp"
#include "common/json_util.hpp"
#include "report/manifest_json.hpp"
#include "gradekit/error.hpp"

namespace gradekit::report {
namespace {

using detail::Json;
using detail::OrderedJson;

aggregation::Provenance parse_provenance(const std::string& text, const std::string& where) {
  if (text == "instructor") return aggregation::Provenance::Instructor;
  if (text == "peer") return aggregation::Provenance::Peer;
  if (text == "llm") return aggregation::Provenance::Llm;
  throw ParseError(where + ": unknown provenance '" + text + "'");
}

std::vector<std::string> string_list(const Json& obj, const char* key, const std::string& where) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  const Json& arr = obj.at(key);
  if (!arr.is_array()) throw ParseError(where + ": '" + key + "' must be an array");
  for (const Json& v : arr) {
    if (!v.is_string()) throw ParseError(where + ": '" + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

OrderedJson manifest_to_json(const RunManifest& m) {
  OrderedJson j;
  j["tool_version"] = m.tool_version;
  j["corpus_path"] = m.corpus_path;
  j["backend_kind"] = m.backend_kind;
  j["backend_id"] = m.backend_id;
  j["model_id"] = m.model_id;
  j["temperature"] = m.temperature;
  j["templates"] = m.templates;
  j["conditions"] = m.conditions;
  j["seed"] = m.seed;
  j["iterations"] = m.iterations;
  j["icc_variant"] = m.icc_variant;
  j["levene_center"] = m.levene_center;
  j["even_median"] = m.even_median;
  j["condition3_shell"] = m.condition3_shell;
  j["timestamp"] = m.timestamp;
  return j;
}

RunManifest manifest_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": manifest must be an object");
  RunManifest m;
  m.tool_version = detail::optional_string_field(j, "tool_version", where);
  m.corpus_path = detail::optional_string_field(j, "corpus_path", where);
  m.backend_kind = detail::optional_string_field(j, "backend_kind", where);
  m.backend_id = detail::optional_string_field(j, "backend_id", where);
  m.model_id = detail::optional_string_field(j, "model_id", where);
  if (j.contains("temperature")) m.temperature = detail::number_field(j, "temperature", where);
  m.templates = string_list(j, "templates", where);
  if (j.contains("conditions")) {
    for (const Json& c : j.at("conditions")) {
      if (!c.is_number_integer()) throw ParseError(where + ": conditions must be integers");
      m.conditions.push_back(c.get<int>());
    }
  }
  if (j.contains("seed")) m.seed = static_cast<std::uint64_t>(detail::integer_field(j, "seed", where));
  if (j.contains("iterations")) m.iterations = static_cast<std::size_t>(detail::integer_field(j, "iterations", where));
  m.icc_variant = detail::optional_string_field(j, "icc_variant", where);
  m.levene_center = detail::optional_string_field(j, "levene_center", where);
  m.even_median = detail::optional_string_field(j, "even_median", where);
  m.condition3_shell = detail::optional_string_field(j, "condition3_shell", where);
  m.timestamp = detail::optional_string_field(j, "timestamp", where);
  return m;
}

std::string ledger_to_json(const Ledger& ledger) {
  OrderedJson doc;
  doc["manifest"] = manifest_to_json(ledger.manifest);
  OrderedJson rows = OrderedJson::array();
  for (const LedgerRow& row : ledger.rows) {
    OrderedJson r;
    r["submission_id"] = row.record.submission_id;
    r["question_id"] = row.question_id;
    r["condition"] = row.condition;
    r["rater_id"] = row.record.rater_id;
    r["provenance"] = aggregation::to_string(row.record.provenance);
    r["awarded"] = row.record.awarded;
    r["max"] = row.record.max;
    r["normalized"] = row.normalized;
    r["flags"] = row.record.flags;
    r["prompt_hash"] = row.record.prompt_hash;
    r["retrieved_at"] = row.retrieved_at;
    r["rationale"] = row.rationale;
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  OrderedJson failures = OrderedJson::array();
  for (const LedgerFailure& f : ledger.failures) {
    OrderedJson r;
    r["submission_id"] = f.submission_id;
    r["condition"] = f.condition;
    r["error"] = f.error;
    failures.push_back(std::move(r));
  }
  doc["failures"] = std::move(failures);
  return doc.dump(2) + "\n";
}

Ledger ledger_from_json(const std::string& text, const std::string& name) {
  const Json doc = detail::parse_json(text, name);
  if (!doc.is_object()) throw ParseError(name + ": top level must be an object");
  Ledger ledger;
  ledger.manifest = manifest_from_json(detail::field(doc, "manifest", name), name + ".manifest");
  const Json& rows = detail::field(doc, "rows", name);
  if (!rows.is_array()) throw ParseError(name + ": 'rows' must be an array");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Json& r = rows[i];
    const std::string where = name + ".rows[" + std::to_string(i) + "]";
    if (!r.is_object()) throw ParseError(where + ": must be an object");
    LedgerRow row;
    row.record.submission_id = detail::string_field(r, "submission_id", where);
    row.record.rater_id = detail::string_field(r, "rater_id", where);
    row.record.provenance = parse_provenance(detail::string_field(r, "provenance", where), where);
    row.record.awarded = detail::number_field(r, "awarded", where);
    row.record.max = static_cast<int>(detail::integer_field(r, "max", where));
    row.record.flags = string_list(r, "flags", where);
    row.record.prompt_hash = detail::optional_string_field(r, "prompt_hash", where);
    row.question_id = detail::string_field(r, "question_id", where);
    row.condition = static_cast<int>(detail::integer_field(r, "condition", where));
    row.normalized = detail::number_field(r, "normalized", where);
    row.retrieved_at = detail::optional_string_field(r, "retrieved_at", where);
    row.rationale = detail::optional_string_field(r, "rationale", where);
    ledger.rows.push_back(std::move(row));
  }
  if (doc.contains("failures")) {
    const Json& failures = doc.at("failures");
    if (!failures.is_array()) throw ParseError(name + ": 'failures' must be an array");
    for (std::size_t i = 0; i < failures.size(); ++i) {
      const std::string where = name + ".failures[" + std::to_string(i) + "]";
      LedgerFailure f;
      f.submission_id = detail::string_field(failures[i], "submission_id", where);
      f.condition = static_cast<int>(detail::integer_field(failures[i], "condition", where));
      f.error = detail::string_field(failures[i], "error", where);
      ledger.failures.push_back(std::move(f));
    }
  }
  return ledger;
}

Ledger read_ledger(const std::filesystem::path& path) {
  return ledger_from_json(detail::read_text_file(path), path.filename().string());
}

}  // namespace gradekit::report
