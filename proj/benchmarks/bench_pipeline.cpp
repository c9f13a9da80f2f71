#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "gradekit/aggregation/aggregation.hpp"
#include "gradekit/grader/grader.hpp"
#include "gradekit/prompting/prompting.hpp"
#include "gradekit/report/stat_report.hpp"
#include "gradekit/statkit/random.hpp"

namespace agg = gradekit::aggregation;
namespace rep = gradekit::report;

namespace {

agg::GradeMatrix synthetic(std::size_t items) {
  agg::GradeMatrix m;
  m.rater_ids = agg::default_rater_ids();
  gradekit::statkit::Xoshiro256 rng(9);
  for (std::size_t i = 0; i < items; ++i) {
    const std::string q = "q" + std::to_string(i % 12 + 1);
    m.item_ids.push_back(q + "-s" + std::to_string(i));
    m.question_of_item.push_back(q);
    m.course_of_item.push_back(i % 12 < 5 ? "a" : "b");
    m.max_points.push_back(10);
    const double base = 60.0 + 10.0 * rng.normal();
    for (double shift : {0.0, 8.0, 6.0, 0.5, -0.5}) {
      const double v = std::min(100.0, std::max(0.0, base + shift + 2.0 * rng.normal()));
      m.values.push_back(v);
      m.points.push_back(v / 10.0);
    }
  }
  return m;
}

void BM_StatReport(benchmark::State& state) {
  const auto m = synthetic(120);
  rep::StatsOptions opts;
  opts.iterations = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const auto report = rep::compute_stat_report(m, nullptr, opts, {});
    benchmark::DoNotOptimize(rep::render_report_csvs(rep::stat_report_to_json(report)));
  }
}
BENCHMARK(BM_StatReport)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ExtractGrade(benchmark::State& state) {
  const std::string text =
      "The student addresses part 1 well.\n\nPart 2 is missing the second wavelength region, so one point is "
      "deducted.\n\nGrade: 8/9";
  for (auto _ : state) benchmark::DoNotOptimize(gradekit::grader::extract_grade(text, 9));
}
BENCHMARK(BM_ExtractGrade);

void BM_ContentHash(benchmark::State& state) {
  const std::string text(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) benchmark::DoNotOptimize(gradekit::prompting::content_hash({}, text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_ContentHash)->Arg(4096);

}  // namespace
