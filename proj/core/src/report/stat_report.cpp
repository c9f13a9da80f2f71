#include "gradekit/report/stat_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "common/json_util.hpp"
#include "gradekit/error.hpp"
#include "gradekit/statkit/descriptive.hpp"
#include "gradekit/statkit/random.hpp"
#include "report/manifest_json.hpp"

namespace gradekit::report {
namespace {

using detail::Json;
using detail::OrderedJson;
using statkit::TestResult;

template <typename F>
auto named(const std::string& analysis, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw DomainError(analysis + ": " + e.what());
  }
}

std::string levene_name(statkit::LeveneCenter c) {
  return c == statkit::LeveneCenter::Median ? "median" : "mean";
}

struct QuestionGroup {
  std::string course_id;
  std::string question_id;
  int max_points = 0;
  std::vector<std::size_t> rows;
};

std::vector<QuestionGroup> group_by_question(const aggregation::GradeMatrix& m) {
  std::vector<QuestionGroup> groups;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (groups.empty() || groups.back().question_id != m.question_of_item[r]) {
      groups.push_back({m.course_of_item[r], m.question_of_item[r], m.max_points[r], {}});
    }
    groups.back().rows.push_back(r);
  }
  return groups;
}

std::vector<double> pick(const std::vector<double>& column, const std::vector<std::size_t>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(column[r]);
  return out;
}

OrderedJson test_json(const TestResult& t) {
  OrderedJson j;
  j["statistic"] = t.statistic;
  j["df"] = t.df;
  j["p_value"] = t.p_value;
  j["method"] = t.method;
  OrderedJson details = OrderedJson::object();
  for (const auto& [k, v] : t.details) details[k] = v;
  j["details"] = std::move(details);
  return j;
}

void require_finite(const OrderedJson& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw DomainError("stat report: non-finite value at " + path);
  }
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) require_finite(it.value(), path + "." + it.key());
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) require_finite(j[i], path + "[" + std::to_string(i) + "]");
  }
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string integer_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.0f", v);
  return buf;
}

double num(const Json& obj, const char* key, const std::string& where) { return detail::number_field(obj, key, where); }

const Json& array_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = detail::field(obj, key, where);
  if (!v.is_array()) throw ParseError(where + ": '" + key + "' must be an array");
  return v;
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

}  // namespace

std::string format_p(double p) {
  if (p < 0.005) return "~0.00";
  return fixed2(p);
}

StatReport compute_stat_report(const aggregation::GradeMatrix& matrix, const corpus::Corpus* corpus,
                               const StatsOptions& options, RunManifest manifest) {
  if (options.iterations < 1) throw DomainError("stats: iterations must be >= 1");
  if (matrix.rows() < 2 || matrix.cols() < 2) throw DomainError("stats: need at least 2 items and 2 raters");

  StatReport rep;
  manifest.seed = options.seed;
  manifest.iterations = options.iterations;
  manifest.icc_variant = statkit::to_string(options.icc_variant);
  manifest.levene_center = levene_name(options.levene_center);
  rep.manifest = std::move(manifest);
  rep.rater_ids = matrix.rater_ids;
  rep.items = matrix.rows();
  rep.warnings = matrix.warnings;
  rep.alpha = options.alpha;

  const std::size_t k = matrix.cols();
  const auto has = [&](const std::string& r) {
    return std::find(matrix.rater_ids.begin(), matrix.rater_ids.end(), r) != matrix.rater_ids.end();
  };
  rep.baseline = has(aggregation::kInstructor) ? aggregation::kInstructor : matrix.rater_ids.front();
  const std::size_t base = matrix.rater_index(rep.baseline);
  std::vector<std::string> others;
  for (const std::string& r : matrix.rater_ids) {
    if (r != rep.baseline) others.push_back(r);
  }

  std::vector<std::vector<double>> pct(k);
  std::vector<std::vector<double>> pts(k);
  for (std::size_t c = 0; c < k; ++c) {
    pct[c] = matrix.column(c);
    pts[c] = matrix.point_column(c);
  }

  // Pretests.
  for (std::size_t c = 0; c < k; ++c) {
    const std::string& r = matrix.rater_ids[c];
    rep.normality.push_back({r, named("shapiro_wilk(" + r + ")", [&] { return statkit::shapiro_wilk(pct[c]); })});
  }
  rep.normality.push_back({"pooled", named("shapiro_wilk(pooled)", [&] { return statkit::shapiro_wilk(matrix.values); })});
  rep.variance = {"levene", named("levene", [&] { return statkit::levene(pct, options.levene_center); })};

  // Omnibus and post-hoc; the post-hoc runs whatever the omnibus says.
  rep.friedman = named("friedman", [&] { return statkit::friedman(matrix.view()); });
  rep.omnibus_significant = rep.friedman.p_value < options.alpha;
  rep.posthoc = named("conover_posthoc", [&] { return statkit::conover_posthoc(matrix.view(), matrix.rater_ids); });

  // Per-question bootstrap tables on raw points.
  const std::vector<QuestionGroup> groups = group_by_question(matrix);
  for (const QuestionGroup& g : groups) {
    for (std::size_t c = 0; c < k; ++c) {
      const std::string& r = matrix.rater_ids[c];
      const std::vector<double> x = pick(pts[c], g.rows);
      const std::uint64_t seed = statkit::derive_stream_seed(options.seed, "mean/" + g.question_id + "/" + r);
      QuestionEstimate e;
      e.course_id = g.course_id;
      e.question_id = g.question_id;
      e.rater_id = r;
      e.max_points = g.max_points;
      e.points = named("bootstrap_mean_sd(" + g.question_id + ", " + r + ")",
                       [&] { return statkit::bootstrap_mean_sd(x, options.iterations, seed, options.threads); });
      e.mean_pct = 100.0 * e.points.mean / g.max_points;
      rep.per_question.push_back(std::move(e));
    }
  }
  for (const QuestionGroup& g : groups) {
    if (g.rows.size() < 2) {
      rep.warnings.push_back("no bootstrap p-values for " + g.question_id + ": fewer than 2 items");
      continue;
    }
    const std::vector<double> y = pick(pts[base], g.rows);
    for (const std::string& r : others) {
      const std::vector<double> x = pick(pts[matrix.rater_index(r)], g.rows);
      const std::uint64_t seed = statkit::derive_stream_seed(options.seed, "diff/" + g.question_id + "/" + r);
      QuestionPValue qp;
      qp.course_id = g.course_id;
      qp.question_id = g.question_id;
      qp.rater_id = r;
      qp.result = named("bootstrap_diff_pvalue(" + g.question_id + ", " + r + ")", [&] {
        return statkit::bootstrap_diff_pvalue(y, x, options.iterations, seed, options.threads);
      });
      rep.diff_pvalues.push_back(std::move(qp));
    }
  }

  // RMS per course, both scales.
  std::vector<std::string> courses;
  for (const std::string& c : matrix.course_of_item) {
    if (std::find(courses.begin(), courses.end(), c) == courses.end()) courses.push_back(c);
  }
  for (const std::string& course : courses) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      if (matrix.course_of_item[r] == course) rows.push_back(r);
    }
    const std::vector<std::string> qids = [&] {
      std::vector<std::string> out;
      for (std::size_t r : rows) out.push_back(matrix.question_of_item[r]);
      return out;
    }();
    const std::vector<double> base_pts = pick(pts[base], rows);
    const std::vector<double> base_frac = [&] {
      std::vector<double> out = pick(pct[base], rows);
      for (double& v : out) v /= 100.0;
      return out;
    }();
    for (const std::string& r : others) {
      const std::size_t c = matrix.rater_index(r);
      std::vector<double> frac = pick(pct[c], rows);
      for (double& v : frac) v /= 100.0;
      const statkit::RmsSummary sp = statkit::rms_difference(base_pts, pick(pts[c], rows), qids);
      const statkit::RmsSummary sf = statkit::rms_difference(base_frac, frac, qids);
      rep.rms.push_back({course, r, sp.per_group, sf.per_group, sp.mean, sf.mean});
    }
  }

  // Reliability.
  for (statkit::IccVariant v : statkit::kAllIccVariants) {
    rep.icc.push_back(named("icc " + statkit::to_string(v), [&] { return statkit::icc(matrix.view(), v); }));
  }
  rep.icc_primary = statkit::to_string(options.icc_variant);

  rep.differences = aggregation::difference_series(matrix, rep.baseline, others);

  // Dispersion: baseline and peer median.
  const bool peers = has(aggregation::kPeerMedian);
  for (const QuestionGroup& g : groups) {
    const std::vector<double> b = pick(pct[base], g.rows);
    rep.dispersion.push_back({g.course_id, g.question_id, rep.baseline, statkit::mean(b),
                              statkit::mean_absolute_deviation(b)});
    if (!peers) continue;
    const std::vector<double> p = pick(pct[matrix.rater_index(aggregation::kPeerMedian)], g.rows);
    double mad_sum = 0.0;
    for (std::size_t r : g.rows) {
      const corpus::PeerScoreSet* set = corpus ? corpus->find_peer_scores(matrix.item_ids[r]) : nullptr;
      if (set && !set->scores.empty()) {
        mad_sum += 100.0 * statkit::mean_absolute_deviation(set->scores) / g.max_points;
      }
    }
    rep.dispersion.push_back({g.course_id, g.question_id, aggregation::kPeerMedian, statkit::mean(p),
                              mad_sum / static_cast<double>(g.rows.size())});
  }

  for (std::size_t c = 0; c < k; ++c) {
    Histogram h;
    h.rater_id = matrix.rater_ids[c];
    for (int e = 0; e <= 10; ++e) h.edges.push_back(10.0 * e);
    h.counts.assign(10, 0);
    for (double v : pct[c]) {
      const auto bin = static_cast<std::size_t>(std::clamp(std::floor(v / 10.0), 0.0, 9.0));
      ++h.counts[bin];
    }
    rep.histogram.push_back(std::move(h));
  }
  return rep;
}

std::string stat_report_to_json(const StatReport& rep) {
  OrderedJson doc;
  doc["manifest"] = manifest_to_json(rep.manifest);
  doc["alpha"] = rep.alpha;
  doc["baseline"] = rep.baseline;
  doc["matrix"] = {{"items", rep.items}, {"raters", rep.rater_ids}};
  doc["warnings"] = rep.warnings;

  OrderedJson normality = OrderedJson::array();
  for (const NamedTest& t : rep.normality) {
    OrderedJson j = test_json(t.result);
    j["label"] = t.label;
    normality.push_back(std::move(j));
  }
  doc["pretests"]["normality"] = std::move(normality);
  doc["pretests"]["variance"] = test_json(rep.variance.result);

  doc["omnibus"] = test_json(rep.friedman);
  doc["omnibus"]["significant"] = rep.omnibus_significant;

  OrderedJson posthoc;
  posthoc["labels"] = rep.posthoc.labels;
  posthoc["df"] = rep.posthoc.df;
  posthoc["comparisons"] = rep.posthoc.comparisons;
  OrderedJson p = OrderedJson::array();
  OrderedJson t = OrderedJson::array();
  for (std::size_t i = 0; i < rep.posthoc.k; ++i) {
    OrderedJson prow = OrderedJson::array();
    OrderedJson trow = OrderedJson::array();
    for (std::size_t j = 0; j < rep.posthoc.k; ++j) {
      prow.push_back(rep.posthoc.p[i * rep.posthoc.k + j]);
      trow.push_back(rep.posthoc.statistic[i * rep.posthoc.k + j]);
    }
    p.push_back(std::move(prow));
    t.push_back(std::move(trow));
  }
  posthoc["p"] = std::move(p);
  posthoc["statistic"] = std::move(t);
  doc["posthoc"] = std::move(posthoc);

  OrderedJson per_question = OrderedJson::array();
  for (const QuestionEstimate& e : rep.per_question) {
    per_question.push_back({{"course_id", e.course_id},
                            {"question_id", e.question_id},
                            {"rater_id", e.rater_id},
                            {"max_points", e.max_points},
                            {"mean", e.points.mean},
                            {"sd", e.points.sd},
                            {"mean_pct", e.mean_pct},
                            {"iterations", e.points.iterations},
                            {"seed", e.points.seed}});
  }
  doc["per_question"] = std::move(per_question);

  OrderedJson pvalues = OrderedJson::array();
  for (const QuestionPValue& q : rep.diff_pvalues) {
    OrderedJson j;
    j["course_id"] = q.course_id;
    j["question_id"] = q.question_id;
    j["rater_id"] = q.rater_id;
    j["baseline"] = rep.baseline;
    j["test"] = test_json(q.result);
    pvalues.push_back(std::move(j));
  }
  doc["diff_pvalues"] = std::move(pvalues);

  OrderedJson rms = OrderedJson::array();
  for (const RmsRow& r : rep.rms) {
    OrderedJson j;
    j["course_id"] = r.course_id;
    j["rater_id"] = r.rater_id;
    OrderedJson per = OrderedJson::array();
    for (std::size_t i = 0; i < r.per_question_points.size(); ++i) {
      per.push_back({{"question_id", r.per_question_points[i].first},
                     {"points", r.per_question_points[i].second},
                     {"fraction", r.per_question_fraction[i].second}});
    }
    j["per_question"] = std::move(per);
    j["mean_points"] = r.mean_points;
    j["mean_fraction"] = r.mean_fraction;
    rms.push_back(std::move(j));
  }
  doc["rms"] = std::move(rms);

  OrderedJson icc = OrderedJson::array();
  for (const statkit::IccResult& r : rep.icc) {
    OrderedJson j;
    j["variant"] = statkit::to_string(r.variant);
    j["value"] = r.value;
    j["ci_low"] = r.ci_low;
    j["ci_high"] = r.ci_high;
    j["level"] = r.level;
    j["anova"] = {{"ms_rows", r.anova.ms_rows},   {"ms_cols", r.anova.ms_cols},   {"ms_error", r.anova.ms_error},
                  {"ms_within", r.anova.ms_within}, {"df_rows", r.anova.df_rows},   {"df_cols", r.anova.df_cols},
                  {"df_error", r.anova.df_error},   {"df_within", r.anova.df_within}};
    const auto deg = r.details.find("degenerate");
    j["degenerate"] = deg != r.details.end() && deg->second != 0.0;
    icc.push_back(std::move(j));
  }
  doc["icc"] = {{"primary", rep.icc_primary}, {"results", std::move(icc)}};

  OrderedJson diffs = OrderedJson::array();
  for (const aggregation::DifferenceSeries& s : rep.differences) {
    OrderedJson j;
    j["course_id"] = s.course_id;
    j["baseline"] = s.baseline;
    j["item_ids"] = s.item_ids;
    OrderedJson series = OrderedJson::array();
    for (std::size_t o = 0; o < s.others.size(); ++o) {
      const aggregation::DifferenceSummary& sum = s.summaries[o];
      series.push_back({{"other", s.others[o]},
                        {"differences_pct", s.differences[o]},
                        {"mean_pct", sum.mean_pct},
                        {"sd_pct", sum.sd_pct},
                        {"mean_fraction", sum.mean_fraction},
                        {"sd_fraction", sum.sd_fraction}});
    }
    j["series"] = std::move(series);
    diffs.push_back(std::move(j));
  }
  doc["differences"] = std::move(diffs);

  OrderedJson dispersion = OrderedJson::array();
  for (const DispersionRow& d : rep.dispersion) {
    dispersion.push_back({{"course_id", d.course_id},
                          {"question_id", d.question_id},
                          {"rater_id", d.rater_id},
                          {"mean_pct", d.mean_pct},
                          {"mad_pct", d.mad_pct}});
  }
  doc["dispersion"] = std::move(dispersion);

  OrderedJson histogram = OrderedJson::array();
  for (const Histogram& h : rep.histogram) {
    histogram.push_back({{"rater_id", h.rater_id}, {"edges", h.edges}, {"counts", h.counts}});
  }
  doc["histogram"] = std::move(histogram);

  require_finite(doc, "report");
  return doc.dump(2) + "\n";
}

namespace {

std::map<std::string, std::string> render_csvs(const std::string& stat_report_json) {
  const std::string name = "stat report";
  const Json doc = detail::parse_json(stat_report_json, name);
  if (!doc.is_object()) throw ParseError(name + ": top level must be an object");
  const double alpha = num(doc, "alpha", name);
  std::map<std::string, std::string> out;

  {
    const Json& ph = detail::field(doc, "posthoc", name);
    const Json& labels = array_field(ph, "labels", "posthoc");
    const Json& p = array_field(ph, "p", "posthoc");
    if (p.size() != labels.size()) throw ParseError("posthoc: p matrix does not match labels");
    std::vector<std::string> header{"rater"};
    for (const Json& l : labels) header.push_back(l.get<std::string>());
    std::string csv = join_row(header);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!p[i].is_array() || p[i].size() != labels.size()) throw ParseError("posthoc: p matrix is not square");
      std::vector<std::string> row{labels[i].get<std::string>()};
      for (std::size_t j = 0; j < labels.size(); ++j) {
        const double v = p[i][j].get<double>();
        row.push_back(format_p(v) + (i != j && v < alpha ? "*" : ""));
      }
      csv += join_row(row);
    }
    out["table1_posthoc.csv"] = std::move(csv);
  }

  {
    std::string csv = join_row({"course_id", "question_id", "rater_id", "max_points", "mean_points", "sd_points", "mean_pct"});
    for (const Json& e : array_field(doc, "per_question", name)) {
      const std::string w = "per_question";
      csv += join_row({detail::string_field(e, "course_id", w), detail::string_field(e, "question_id", w),
                       detail::string_field(e, "rater_id", w), integer_text(num(e, "max_points", w)),
                       fixed2(num(e, "mean", w)), fixed2(num(e, "sd", w)), fixed2(num(e, "mean_pct", w))});
    }
    out["table2_means.csv"] = std::move(csv);
  }

  {
    const std::string baseline = detail::string_field(doc, "baseline", name);
    std::string csv = join_row({"course_id", "question_id", "baseline", "rater_id", "mean_difference_points", "p_value"});
    for (const Json& q : array_field(doc, "diff_pvalues", name)) {
      const std::string w = "diff_pvalues";
      const Json& t = detail::field(q, "test", w);
      csv += join_row({detail::string_field(q, "course_id", w), detail::string_field(q, "question_id", w), baseline,
                       detail::string_field(q, "rater_id", w), fixed2(num(t, "statistic", w)),
                       format_p(num(t, "p_value", w))});
    }
    out["table3_pvalues.csv"] = std::move(csv);
  }

  {
    std::string csv = join_row({"course_id", "rater_id", "question_id", "rms_points", "rms_fraction"});
    for (const Json& r : array_field(doc, "rms", name)) {
      const std::string w = "rms";
      const std::string course = detail::string_field(r, "course_id", w);
      const std::string rater = detail::string_field(r, "rater_id", w);
      for (const Json& q : array_field(r, "per_question", w)) {
        csv += join_row({course, rater, detail::string_field(q, "question_id", w), fixed2(num(q, "points", w)),
                         fixed2(num(q, "fraction", w))});
      }
      csv += join_row({course, rater, "mean", fixed2(num(r, "mean_points", w)), fixed2(num(r, "mean_fraction", w))});
    }
    out["table4_rms.csv"] = std::move(csv);
  }

  {
    std::string csv = join_row({"rater_id", "bin_low", "bin_high", "count"});
    for (const Json& h : array_field(doc, "histogram", name)) {
      const std::string w = "histogram";
      const std::string rater = detail::string_field(h, "rater_id", w);
      const Json& edges = array_field(h, "edges", w);
      const Json& counts = array_field(h, "counts", w);
      if (edges.size() != counts.size() + 1) throw ParseError("histogram: edges must number counts + 1");
      for (std::size_t b = 0; b < counts.size(); ++b) {
        csv += join_row({rater, integer_text(edges[b].get<double>()), integer_text(edges[b + 1].get<double>()),
                         std::to_string(counts[b].get<std::size_t>())});
      }
    }
    out["fig1_hist.csv"] = std::move(csv);
  }

  {
    std::string csv = join_row({"row_type", "course_id", "item_id", "comparison", "difference_pct", "difference_fraction"});
    for (const Json& s : array_field(doc, "differences", name)) {
      const std::string w = "differences";
      const std::string course = detail::string_field(s, "course_id", w);
      const std::string baseline = detail::string_field(s, "baseline", w);
      const Json& items = array_field(s, "item_ids", w);
      for (const Json& series : array_field(s, "series", w)) {
        const std::string cmp = baseline + "-" + detail::string_field(series, "other", w);
        const Json& d = array_field(series, "differences_pct", w);
        if (d.size() != items.size()) throw ParseError("differences: series length does not match items");
        for (std::size_t i = 0; i < items.size(); ++i) {
          const double v = d[i].get<double>();
          csv += join_row({"item", course, items[i].get<std::string>(), cmp, fixed2(v), fixed2(v / 100.0)});
        }
        csv += join_row({"mean", course, "", cmp, fixed2(num(series, "mean_pct", w)), fixed2(num(series, "mean_fraction", w))});
        csv += join_row({"sd", course, "", cmp, fixed2(num(series, "sd_pct", w)), fixed2(num(series, "sd_fraction", w))});
      }
    }
    out["fig2_diffs.csv"] = std::move(csv);
  }

  {
    std::string csv = join_row({"course_id", "question_id", "rater_id", "mean_pct", "mad_pct"});
    for (const Json& d : array_field(doc, "dispersion", name)) {
      const std::string w = "dispersion";
      csv += join_row({detail::string_field(d, "course_id", w), detail::string_field(d, "question_id", w),
                       detail::string_field(d, "rater_id", w), fixed2(num(d, "mean_pct", w)),
                       fixed2(num(d, "mad_pct", w))});
    }
    out["fig3_dispersion.csv"] = std::move(csv);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> render_report_csvs(const std::string& stat_report_json) {
  try {
    return render_csvs(stat_report_json);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("stat report: ") + e.what());
  }
}

}  // namespace gradekit::report
