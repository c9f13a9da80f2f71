#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gradekit/aggregation/aggregation.hpp"
#include "gradekit/corpus/corpus.hpp"
#include "gradekit/report/ledger.hpp"
#include "gradekit/statkit/bootstrap.hpp"
#include "gradekit/statkit/hypothesis.hpp"
#include "gradekit/statkit/icc.hpp"

namespace gradekit::report {

struct StatsOptions {
  std::uint64_t seed = 20240501;
  std::size_t iterations = 10000;
  statkit::IccVariant icc_variant = statkit::IccVariant::Icc2_1;
  statkit::LeveneCenter levene_center = statkit::LeveneCenter::Median;
  double alpha = 0.05;
  unsigned threads = 1;
};

struct NamedTest {
  std::string label;
  statkit::TestResult result;
};

/// table2_means.csv cell: bootstrap mean and sd of raw points for one question and rater.
struct QuestionEstimate {
  std::string course_id;
  std::string question_id;
  std::string rater_id;
  int max_points = 0;
  statkit::BootstrapEstimate points;
  double mean_pct = 0.0;
};

/// table3_pvalues.csv cell: paired bootstrap p-value of a rater against the baseline.
struct QuestionPValue {
  std::string course_id;
  std::string question_id;
  std::string rater_id;
  statkit::TestResult result;
};

/// table4_rms.csv row: RMS gap between the baseline and one rater for one course.
struct RmsRow {
  std::string course_id;
  std::string rater_id;
  std::vector<std::pair<std::string, double>> per_question_points;
  std::vector<std::pair<std::string, double>> per_question_fraction;
  double mean_points = 0.0;
  double mean_fraction = 0.0;
};

/// fig3_dispersion.csv row: a question's mean score with its average
/// deviation. For the baseline the deviation is the MAD across submissions;
/// for the peer median it is the mean over submissions of each peer set's MAD.
struct DispersionRow {
  std::string course_id;
  std::string question_id;
  std::string rater_id;
  double mean_pct = 0.0;
  double mad_pct = 0.0;
};

/// fig1_hist.csv data: counts of normalized grades in ten bins over [0, 100].
struct Histogram {
  std::string rater_id;
  std::vector<double> edges;  // 11 edges
  std::vector<std::size_t> counts;
};

struct StatReport {
  RunManifest manifest;
  std::vector<std::string> rater_ids;
  std::size_t items = 0;
  std::vector<std::string> warnings;
  double alpha = 0.05;
  std::string baseline;  // rater the difference views are taken against
  std::vector<NamedTest> normality;  // per rater, then pooled
  NamedTest variance;                // Levene across rater columns
  statkit::TestResult friedman;
  bool omnibus_significant = false;
  statkit::PosthocMatrix posthoc;
  std::vector<QuestionEstimate> per_question;
  std::vector<QuestionPValue> diff_pvalues;
  std::vector<RmsRow> rms;
  std::vector<statkit::IccResult> icc;
  std::string icc_primary;
  std::vector<aggregation::DifferenceSeries> differences;
  std::vector<DispersionRow> dispersion;
  std::vector<Histogram> histogram;
};

/// Runs the whole pipeline over a complete matrix: normality and variance
/// pretests, Friedman, Conover post-hoc (always, with the omnibus gate
/// recorded), bootstrap tables, RMS, all ICC variants, instructor
/// difference series, dispersion and histograms. `corpus` supplies the raw
/// peer scores for the dispersion view; it may be null. The baseline is
/// "instructor" when present, else the first rater. A DomainError from any
/// analysis is rethrown with the analysis named.
StatReport compute_stat_report(const aggregation::GradeMatrix& matrix, const corpus::Corpus* corpus,
                               const StatsOptions& options, RunManifest manifest);

/// Machine-readable form; numbers keep full precision.
std::string stat_report_to_json(const StatReport& report);

/// CSV views keyed by file name (table1_posthoc.csv ... fig3_dispersion.csv),
/// rendered from the machine form. ParseError on malformed input.
std::map<std::string, std::string> render_report_csvs(const std::string& stat_report_json);

/// "0.43", "~0.00" below 0.005, "1.00".
std::string format_p(double p);

}  // namespace gradekit::report
