// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/cli.hpp"
#include "gradekit/aggregation/aggregation.hpp"
#include "gradekit/corpus/corpus.hpp"
#include "gradekit/error.hpp"
#include "gradekit/grader/grader.hpp"
#include "gradekit/report/stat_report.hpp"
#include "gradekit/statkit/bootstrap.hpp"
#include "gradekit/statkit/distributions.hpp"
#include "gradekit/statkit/hypothesis.hpp"
#include "gradekit/statkit/icc.hpp"
#include "gradekit/statkit/random.hpp"
#include "gradekit/statkit/special.hpp"
#include "oracles/shapiro_wilk_reference.hpp"
#include "support/test_data.hpp"

namespace fs = std::filesystem;
namespace agg = gradekit::aggregation;
namespace corpus = gradekit::corpus;
namespace gr = gradekit::grader;
namespace rep = gradekit::report;
namespace sk = gradekit::statkit;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Detail text for the report line; a check fails by returning false.
struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

// ---- 1 ----
Outcome friedman_exact() {
  Outcome o;
  const auto start = Clock::now();
  const auto rows = testdata::read_csv(testdata::data_path("friedman_grid.csv"));
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::size_t n = std::stoul(rows[i][0]);
    const std::size_t k = std::stoul(rows[i][1]);
    if (k != 3 || n > 6) continue;
    sk::Matrix m(n, k);
    std::istringstream values(rows[i][2]);
    for (double& v : m.values) values >> v;
    const double err = std::fabs(sk::friedman(m.view()).p_value - num(rows[i][3]));
    worst = std::max(worst, err);
    o.require(err <= 1e-9, "grid row " + std::to_string(i) + " off by " + fmt("%.3g", err));
    ++checked;
  }
  const double t = seconds_since(start);
  o.require(checked >= 100, "only " + std::to_string(checked) + " k=3 grid rows");
  o.require(t < 30.0, "took " + fmt("%.2f", t) + " s");
  if (o.pass) o.detail = std::to_string(checked) + " matrices, worst " + fmt("%.2g", worst) + ", " + fmt("%.2f", t) + " s";
  return o;
}

// ---- 2 ----
Outcome special_functions() {
  Outcome o;
  const auto start = Clock::now();
  const auto rows = testdata::read_csv(testdata::data_path("special_functions.csv"));
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double got = 0.0;
    if (r[0] == "inc_gamma") {
      got = sk::reg_inc_gamma(num(r[1]), num(r[2]));
    } else if (r[0] == "inc_beta") {
      got = sk::reg_inc_beta(num(r[1]), num(r[2]), num(r[3]));
    } else if (r[0] == "chi2_sf") {
      got = sk::chi2_sf(num(r[1]), num(r[2]));
    } else if (r[0] == "t_sf") {
      got = sk::t_sf(num(r[1]), num(r[2]));
    } else if (r[0] == "f_sf") {
      got = sk::f_sf(num(r[1]), num(r[2]), num(r[3]));
    } else {
      o.require(false, "unknown kind " + r[0]);
      continue;
    }
    const double err = std::fabs(got - num(r[4]));
    worst = std::max(worst, err);
    o.require(err <= 1e-12, r[0] + " row " + std::to_string(i) + " off by " + fmt("%.3g", err));
    ++checked;
  }
  o.require(checked >= 500, "only " + std::to_string(checked) + " oracle points");

  double worst_reflection = 0.0;
  for (double a : {0.2, 0.5, 1.0, 2.5, 7.0, 30.0, 150.0}) {
    for (double b : {0.2, 0.5, 1.0, 2.5, 7.0, 30.0, 150.0}) {
      for (double x : {0.0, 0x1p-20, 0x1p-7, 0.203125, 0.5, 0.734375, 0.9921875, 1.0 - 0x1p-20, 1.0}) {
        const double err = std::fabs(sk::reg_inc_beta(a, b, x) - (1.0 - sk::reg_inc_beta(b, a, 1.0 - x)));
        worst_reflection = std::max(worst_reflection, err);
      }
    }
  }
  o.require(worst_reflection <= 1e-12, "reflection off by " + fmt("%.3g", worst_reflection));
  const double t = seconds_since(start);
  o.require(t < 10.0, "took " + fmt("%.2f", t) + " s");
  if (o.pass) {
    o.detail = std::to_string(checked) + " points, worst " + fmt("%.2g", worst) + ", reflection " +
               fmt("%.2g", worst_reflection);
  }
  return o;
}

// ---- 3 ----
Outcome shapiro_wilk() {
  Outcome o;
  double worst = 0.0;
  for (const auto& c : oracles::shapiro_wilk_cases()) {
    const auto r = sk::shapiro_wilk(c.sample);
    const double err = std::max(std::fabs(r.statistic - c.w), std::fabs(r.p_value - c.p));
    worst = std::max(worst, err);
    o.require(err <= 1e-3, std::string(c.name) + " off by " + fmt("%.3g", err));
  }
  bool raised = false;
  try {
    const std::vector<double> flat = {5.0, 5.0, 5.0, 5.0, 5.0};
    sk::shapiro_wilk(flat);
  } catch (const gradekit::DomainError&) {
    raised = true;
  }
  o.require(raised, "zero-variance sample did not raise DomainError");
  if (o.pass) {
    o.detail = std::to_string(oracles::shapiro_wilk_cases().size()) + " references, worst " + fmt("%.2g", worst);
  }
  return o;
}

// ---- 4 ----
Outcome bootstrap() {
  Outcome o;
  const std::vector<double> x = {6.0, 7.5, 9.0, 4.0, 8.0, 10.0, 5.5, 7.0, 9.5, 3.0};
  double m = 0.0;
  for (double v : x) m += v;
  m /= 10.0;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double plugin = std::sqrt(ss / 10.0) / std::sqrt(10.0);
  double worst = 0.0;
  for (std::uint64_t seed : {1ULL, 42ULL, 20240501ULL, 987654321ULL, 0xdeadbeefULL}) {
    const auto a = sk::bootstrap_mean_sd(x, 10000, seed, 1);
    const double rel = std::fabs(a.sd / plugin - 1.0);
    worst = std::max(worst, rel);
    o.require(rel < 0.05, "seed " + std::to_string(seed) + " sd off by " + fmt("%.3f", rel));
    for (unsigned threads : {1u, 2u, 4u, 8u}) {
      const auto b = sk::bootstrap_mean_sd(x, 10000, seed, threads);
      o.require(b.sd == a.sd && b.mean == a.mean,
                "seed " + std::to_string(seed) + " differs with " + std::to_string(threads) + " threads");
    }
  }
  if (o.pass) o.detail = "worst relative sd error " + fmt("%.4f", worst);
  return o;
}

// ---- 5 ----
Outcome icc() {
  Outcome o;
  sk::Matrix same(6, 4);
  const double rows[] = {3.5, 9.0, 1.25, 7.0, 7.0, 0.1};
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 4; ++c) same.at(r, c) = rows[r];
  }
  o.require(sk::icc(same.view(), sk::IccVariant::Icc2_1).value == 1.0, "identical columns did not give 1");

  sk::Matrix worked(4, 3);
  worked.values = {7, 8, 9, 4, 5, 5, 6, 6, 8, 2, 3, 4};
  const std::pair<sk::IccVariant, double> want[] = {
      {sk::IccVariant::Icc1_1, 490.0 / 589.0}, {sk::IccVariant::Icc2_1, 172.0 / 205.0},
      {sk::IccVariant::Icc3_1, 172.0 / 179.0}, {sk::IccVariant::Icc1_k, 490.0 / 523.0},
      {sk::IccVariant::Icc2_k, 172.0 / 183.0}, {sk::IccVariant::Icc3_k, 516.0 / 523.0},
  };
  for (const auto& [v, value] : want) {
    const double err = std::fabs(sk::icc(worked.view(), v).value - value);
    o.require(err <= 1e-9, sk::to_string(v) + " worksheet off by " + fmt("%.3g", err));
  }

  sk::Xoshiro256 rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(60);
    const std::size_t k = 2 + rng.uniform_index(4);
    const double rater_sd = rng.uniform01() * 3.0;
    const double noise_sd = 0.2 + rng.uniform01() * 4.0;
    sk::Matrix m(n, k);
    std::vector<double> bias(k);
    for (double& b : bias) b = rater_sd * rng.normal();
    for (std::size_t r = 0; r < n; ++r) {
      const double item = 10.0 * rng.normal();
      for (std::size_t c = 0; c < k; ++c) m.at(r, c) = item + bias[c] + noise_sd * rng.normal();
    }
    const auto res = sk::icc(m.view(), sk::IccVariant::Icc2_1);
    o.require(res.ci_low <= res.value && res.value <= res.ci_high,
              "interval misses the estimate on random matrix " + std::to_string(trial));
  }
  if (o.pass) o.detail = "identity, worksheet and 100 random intervals";
  return o;
}

// 120 items over 12 questions; peer +8, llm_p1 +6, llm_p2/llm_p3 within a few points.
agg::GradeMatrix synthetic_matrix() {
  agg::GradeMatrix m;
  m.rater_ids = agg::default_rater_ids();
  sk::Xoshiro256 rng(20240501);
  const int maxes[] = {6, 9, 9, 9, 9, 10, 10, 10, 4, 4, 4, 4};
  const char* courses[] = {"ets", "ets", "ets", "ets", "ets", "abio", "abio", "abio", "hpa", "hpa", "hpa", "hpa"};
  for (int q = 0; q < 12; ++q) {
    for (int s = 0; s < 10; ++s) {
      const std::string qid = std::string(courses[q]) + "-q" + std::to_string(q + 1);
      m.item_ids.push_back(qid + "-s" + std::to_string(s + 1));
      m.question_of_item.push_back(qid);
      m.course_of_item.push_back(courses[q]);
      m.max_points.push_back(maxes[q]);
      const double base = std::clamp(70.0 + 10.0 * rng.normal(), 20.0, 90.0);
      const double row[] = {base, base + 8.0, base + 6.0, base + 1.5 * rng.normal(), base + 1.5 * rng.normal()};
      for (double v : row) {
        const double pct = std::clamp(v, 0.0, 100.0);
        m.values.push_back(pct);
        m.points.push_back(pct * maxes[q] / 100.0);
      }
    }
  }
  return m;
}

// ---- 6 ----
Outcome table1_pattern() {
  Outcome o;
  const auto m = synthetic_matrix();
  rep::StatsOptions opts;
  opts.iterations = 1000;
  const auto report = rep::compute_stat_report(m, nullptr, opts, {});
  const auto& ph = report.posthoc;
  const auto col = [&](const std::string& id) { return m.rater_index(id); };
  const std::size_t inst = col("instructor");
  const double p_peer = ph.at(inst, col("peer_median"));
  const double p1 = ph.at(inst, col("llm_p1"));
  const double p2 = ph.at(inst, col("llm_p2"));
  const double p3 = ph.at(inst, col("llm_p3"));
  o.require(report.omnibus_significant, "omnibus test not significant");
  o.require(p_peer < 0.05, "instructor vs peer_median p = " + fmt("%.4f", p_peer));
  o.require(p1 < 0.05, "instructor vs llm_p1 p = " + fmt("%.4f", p1));
  o.require(p2 >= 0.05, "instructor vs llm_p2 p = " + fmt("%.4f", p2));
  o.require(p3 >= 0.05, "instructor vs llm_p3 p = " + fmt("%.4f", p3));
  if (o.pass) {
    o.detail = "p(peer)=" + rep::format_p(p_peer) + " p(p1)=" + rep::format_p(p1) + " p(p2)=" + rep::format_p(p2) +
               " p(p3)=" + rep::format_p(p3);
  }
  return o;
}

int run_cli(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = gradekit::cli::run(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

bool same_tree(const fs::path& golden, const fs::path& produced, std::string& why) {
  for (const auto& entry : fs::directory_iterator(golden)) {
    if (!entry.is_regular_file()) continue;
    const fs::path other = produced / entry.path().filename();
    if (!fs::exists(other) || testdata::read_file(other) != testdata::read_file(entry.path())) {
      why = "differs: " + entry.path().filename().string();
      return false;
    }
  }
  return true;
}

// ---- 7 ----
Outcome golden_run() {
  Outcome o;
  const fs::path saved = fs::current_path();
  fs::current_path(testdata::source_dir());
  testdata::TempDir dir("acceptance-golden");
  const std::string ledger = (dir.path() / "ledger.json").string();
  const std::string stats = (dir.path() / "stats").string();
  const std::string report = (dir.path() / "report").string();
  const auto start = Clock::now();
  std::string err;
  const int g = run_cli({"grade", "--corpus", "tests/fixtures/corpus", "--condition", "1,2,3", "--backend", "replay",
                         "--cache-dir", "tests/fixtures/cache", "--out", ledger},
                        &err);
  o.require(g == 0, "grade exited " + std::to_string(g) + ": " + err.substr(0, 200));
  if (o.pass) {
    const int s = run_cli({"stats", "--corpus", "tests/fixtures/corpus", "--ledger", ledger, "--seed", "20240501",
                           "--iterations", "10000", "--out", stats},
                          &err);
    o.require(s == 0, "stats exited " + std::to_string(s) + ": " + err.substr(0, 200));
  }
  if (o.pass) {
    const int r = run_cli({"report", "--in", stats + "/stat_report.json", "--out", report}, &err);
    o.require(r == 0, "report exited " + std::to_string(r) + ": " + err.substr(0, 200));
  }
  const double t = seconds_since(start);
  if (o.pass) {
    std::string why;
    o.require(testdata::read_file(ledger) == testdata::read_file("tests/golden/ledger.json"), "ledger.json differs");
    o.require(same_tree("tests/golden/stats", stats, why), "stats " + why);
    o.require(same_tree("tests/golden/report", report, why), "report " + why);
    o.require(t < 20.0, "took " + fmt("%.2f", t) + " s");
  }
  fs::current_path(saved);
  if (o.pass) o.detail = "byte-identical, " + fmt("%.2f", t) + " s, replay only";
  return o;
}

// ---- 8 ----
Outcome parser_corpus() {
  Outcome o;
  std::size_t parsed = 0;
  std::size_t total = 0;
  const json curated = json::parse(testdata::read_file(testdata::data_path("completion_corpus.json")));
  for (const auto& c : curated["cases"]) {
    ++total;
    try {
      const auto g = gr::extract_grade(c["text"].get<std::string>(), c["max"].get<int>());
      const bool ok = std::fabs(g.awarded - c["awarded"].get<double>()) <= 1e-12 &&
                      g.flags.names() == c["flags"].get<std::vector<std::string>>();
      o.require(ok, "curated case \"" + c["name"].get<std::string>() + "\" parsed wrong");
      parsed += ok;
    } catch (const std::exception& e) {
      o.require(false, "curated case \"" + c["name"].get<std::string>() + "\": " + e.what());
    }
  }
  const json fixture = json::parse(testdata::read_file(testdata::fixture_dir() / "completions.json"));
  for (const auto& c : fixture["grading"]) {
    ++total;
    try {
      const auto g = gr::extract_grade(c["completion"].get<std::string>(), c["expected_max"].get<int>());
      const bool ok = std::fabs(g.awarded - c["expected_awarded"].get<double>()) <= 1e-12;
      o.require(ok, c["submission_id"].get<std::string>() + " parsed wrong");
      parsed += ok;
    } catch (const std::exception& e) {
      o.require(false, c["submission_id"].get<std::string>() + ": " + e.what());
    }
  }

  const corpus::Corpus cor = corpus::load_corpus(testdata::fixture_corpus());
  for (const auto& entry : fixture["rubric_generation"]) {
    const std::string course = entry["course_id"];
    if (course != "hpa" && course != "abio") continue;
    const auto sections = gr::split_rubric_sections(entry["completion"].get<std::string>());
    const auto qs = cor.questions_of(course);
    o.require(sections.size() == qs.size(), course + " rubric sections: " + std::to_string(sections.size()));
    for (std::size_t i = 0; i < qs.size() && o.pass; ++i) {
      try {
        const auto r = gr::parse_ai_rubric(sections.at(static_cast<int>(i) + 1), *qs[i]);
        if (course == "hpa") {
          bool four_ones = r.criteria.size() == 4;
          for (const auto& crit : r.criteria) four_ones = four_ones && crit.max_points() == 1;
          o.require(four_ones, qs[i]->id + " is not 4 criteria of 1 point");
        } else if (i == 0) {
          o.require(r.criteria.size() == 5 && corpus::question_max_points(r) == 10, "abio-q1 rubric does not sum to 10");
        }
      } catch (const std::exception& e) {
        o.require(false, qs[i]->id + ": " + e.what());
      }
    }
  }
  if (o.pass) o.detail = std::to_string(parsed) + "/" + std::to_string(total) + " completions; HPA 4x1 and ABIO rubrics";
  return o;
}

// ---- 9 ----
Outcome aggregation() {
  Outcome o;
  const auto oracle = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  };
  const corpus::Corpus c = corpus::load_corpus(testdata::fixture_corpus());
  std::size_t checked = 0;
  for (const auto& s : c.peer_scores) {
    const double max = c.question(c.submission(s.submission_id).question_id).max_points;
    const double want = oracle(s.scores) * (s.reviewer_participated ? 1.0 : 0.8);
    o.require(agg::peer_final_grade(s, max) == want, s.submission_id + " peer median differs from oracle");
    ++checked;
  }
  std::mt19937 rng(3);
  for (int i = 0; i < 5000; ++i) {
    corpus::PeerScoreSet s{"x", {}, true};
    const std::size_t n = 1 + rng() % 8;
    for (std::size_t j = 0; j < n; ++j) s.scores.push_back(static_cast<double>(rng() % 11));
    o.require(agg::peer_final_grade(s, 10) == oracle(s.scores), "random peer set differs from oracle");
    ++checked;
  }
  const double scaled = agg::peer_final_grade({"x", {4, 4, 4}, false}, 4);
  o.require(scaled == 3.2, "non-participation gave " + fmt("%.17g", scaled));
  if (o.pass) o.detail = std::to_string(checked) + " peer sets match the oracle; 4 -> 3.2";
  return o;
}

// ---- 10 ----
Outcome performance() {
  Outcome o;
  const auto m = synthetic_matrix();
  rep::StatsOptions opts;
  opts.iterations = 10000;
  const auto start = Clock::now();
  const auto report = rep::compute_stat_report(m, nullptr, opts, {});
  const auto csvs = rep::render_report_csvs(rep::stat_report_to_json(report));
  const double t = seconds_since(start);
  o.require(report.per_question.size() == 60, "expected 60 bootstrap cells");
  o.require(csvs.size() == 7, "expected 7 CSV views");
  o.require(t < 5.0, "took " + fmt("%.2f", t) + " s");
  if (o.pass) o.detail = "120x5, 12 questions, 10000 iterations in " + fmt("%.2f", t) + " s";
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"friedman-exact", friedman_exact}, {"special-functions", special_functions},
      {"shapiro-wilk", shapiro_wilk},     {"bootstrap", bootstrap},
      {"icc", icc},                       {"table1-pattern", table1_pattern},
      {"golden-run", golden_run},         {"parser-corpus", parser_corpus},
      {"aggregation", aggregation},       {"performance", performance},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
