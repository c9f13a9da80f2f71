#include <doctest.h>

#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradekit/aggregation/aggregation.hpp"
#include "gradekit/corpus/corpus.hpp"
#include "gradekit/error.hpp"
#include "gradekit/report/ledger.hpp"
#include "gradekit/report/stat_report.hpp"
#include "support/test_data.hpp"

namespace agg = gradekit::aggregation;
namespace corpus = gradekit::corpus;
namespace rep = gradekit::report;
using nlohmann::json;

namespace {

const corpus::Corpus& fixture() {
  static const corpus::Corpus c = corpus::load_corpus(testdata::fixture_corpus());
  return c;
}

// Every rater gives the same points; items vary.
agg::GradeMatrix identical_columns(std::size_t raters) {
  agg::GradeMatrix m;
  for (std::size_t r = 0; r < raters; ++r) m.rater_ids.push_back(r == 0 ? "instructor" : "r" + std::to_string(r));
  std::mt19937 rng(5);
  for (int i = 0; i < 40; ++i) {
    const std::string q = i < 20 ? "q1" : "q2";
    m.item_ids.push_back(q + "-s" + std::to_string(i));
    m.course_of_item.push_back("c");
    m.question_of_item.push_back(q);
    m.max_points.push_back(10);
    const double pts = static_cast<double>(rng() % 11);
    for (std::size_t r = 0; r < raters; ++r) {
      m.points.push_back(pts);
      m.values.push_back(pts * 10.0);
    }
  }
  return m;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

agg::GradeMatrix golden_matrix() {
  const auto ledger = rep::read_ledger(testdata::source_dir() / "tests/golden/ledger.json");
  auto records = agg::instructor_records(fixture());
  const auto peers = agg::peer_records(fixture());
  records.insert(records.end(), peers.begin(), peers.end());
  for (const auto& row : ledger.rows) records.push_back(row.record);
  return agg::build_grade_matrix(records, fixture());
}

rep::StatsOptions quick(unsigned threads = 1) {
  rep::StatsOptions o;
  o.iterations = 500;
  o.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("format_p") {
  CHECK(rep::format_p(0.0) == "~0.00");
  CHECK(rep::format_p(0.004999) == "~0.00");
  CHECK(rep::format_p(0.005) == "0.01");
  CHECK(rep::format_p(0.4321) == "0.43");
  CHECK(rep::format_p(1.0) == "1.00");
}

TEST_CASE("identical columns give a flat post-hoc table") {
  const auto m = identical_columns(4);
  const auto report = rep::compute_stat_report(m, nullptr, quick(), {});
  CHECK(report.baseline == "instructor");
  CHECK_FALSE(report.omnibus_significant);
  const auto csvs = rep::render_report_csvs(rep::stat_report_to_json(report));
  const auto table1 = lines(csvs.at("table1_posthoc.csv"));
  REQUIRE(table1.size() == 5);
  CHECK(table1[0] == "rater,instructor,r1,r2,r3");
  for (std::size_t i = 1; i < table1.size(); ++i) {
    CHECK(table1[i].find('*') == std::string::npos);
    CHECK(table1[i].substr(table1[i].find(',')) == ",1.00,1.00,1.00,1.00");
  }
  for (const auto& icc : report.icc) {
    CHECK(icc.value == 1.0);
  }
  for (const auto& s : report.differences) {
    for (const auto& d : s.summaries) CHECK(d.mean_pct == 0.0);
  }
}

TEST_CASE("fixture report shape") {
  const auto m = golden_matrix();
  REQUIRE(m.rows() == 120);
  REQUIRE(m.cols() == 5);

  const auto report = rep::compute_stat_report(m, &fixture(), quick(), {});
  const auto csvs = rep::render_report_csvs(rep::stat_report_to_json(report));
  CHECK(csvs.size() == 7);

  // Every rater's histogram holds every item exactly once.
  for (const auto& h : report.histogram) {
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == 120);
    CHECK(h.edges.size() == 11);
  }
  CHECK(lines(csvs.at("fig1_hist.csv")).size() == 1 + 5 * 10);
  CHECK(lines(csvs.at("table2_means.csv")).size() == 1 + 12 * 5);
  CHECK(lines(csvs.at("table3_pvalues.csv")).size() == 1 + 12 * 4);
  CHECK(report.per_question.size() == 60);
  CHECK(report.icc.size() == 6);
  CHECK(report.normality.size() == 6);
  CHECK(report.normality.back().label == "pooled");

  for (const auto& q : report.per_question) {
    CHECK(q.mean_pct == doctest::Approx(100.0 * q.points.mean / q.max_points).epsilon(1e-12));
  }
}

TEST_CASE("report is identical across thread counts") {
  const auto m = golden_matrix();
  const auto one = rep::stat_report_to_json(rep::compute_stat_report(m, &fixture(), quick(1), {}));
  const auto four = rep::stat_report_to_json(rep::compute_stat_report(m, &fixture(), quick(4), {}));
  CHECK(one == four);
  auto other_seed = quick(1);
  other_seed.seed += 1;
  CHECK(rep::stat_report_to_json(rep::compute_stat_report(m, &fixture(), other_seed, {})) != one);
}

TEST_CASE("ledger round trips byte for byte") {
  const auto path = testdata::source_dir() / "tests/golden/ledger.json";
  const auto ledger = rep::read_ledger(path);
  CHECK(ledger.rows.size() == 360);
  CHECK(ledger.failures.empty());
  CHECK(ledger.manifest.conditions == std::vector<int>{1, 2, 3});
  CHECK(rep::ledger_to_json(ledger) == testdata::read_file(path));

  std::size_t repaired = 0;
  for (const auto& row : ledger.rows) {
    for (const auto& f : row.record.flags) repaired += f == "max_mismatch_repaired";
  }
  CHECK(repaired == 2);

  CHECK_THROWS_AS(rep::ledger_from_json("{\"manifest\": 3}"), gradekit::Error);
  CHECK_THROWS_AS(rep::ledger_from_json("[1,"), gradekit::ParseError);
}

TEST_CASE("rendering rejects malformed machine output") {
  CHECK_THROWS_AS(rep::render_report_csvs("not json"), gradekit::ParseError);
  CHECK_THROWS_AS(rep::render_report_csvs("{}"), gradekit::ParseError);
  const auto golden = testdata::read_file(testdata::source_dir() / "tests/golden/stats/stat_report.json");
  json j = json::parse(golden);
  j.erase("posthoc");
  CHECK_THROWS_AS(rep::render_report_csvs(j.dump()), gradekit::ParseError);
}

TEST_CASE("golden CSVs re-render from the golden machine output") {
  const auto dir = testdata::source_dir() / "tests/golden/stats";
  const auto csvs = rep::render_report_csvs(testdata::read_file(dir / "stat_report.json"));
  for (const auto& [name, text] : csvs) {
    CAPTURE(name);
    CHECK(text == testdata::read_file(dir / name));
  }
}
