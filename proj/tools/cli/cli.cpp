#include "cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "gradekit/aggregation/aggregation.hpp"
#include "gradekit/corpus/corpus.hpp"
#include "gradekit/error.hpp"
#include "gradekit/grader/grader.hpp"
#include "gradekit/prompting/prompting.hpp"
#include "gradekit/report/ledger.hpp"
#include "gradekit/report/stat_report.hpp"
#include "gradekit/statkit/icc.hpp"
#include "gradekit/version.hpp"

namespace gradekit::cli {
namespace {

namespace fs = std::filesystem;
using prompting::PromptCondition;

// Bad input the user can fix by changing the command line.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct BackendOptions {
  std::string kind = "replay";
  std::string model = "gpt-4";
  double temperature = 0.0;
  std::string endpoint = grader::BackendConfig{}.endpoint;
  std::string credential_env = "OPENAI_API_KEY";
  std::string cache_dir;
  int max_retries = 4;
  long timeout_ms = 60000;
  long backoff_ms = 1000;
};

void add_backend_options(CLI::App* cmd, BackendOptions& b) {
  cmd->add_option("--backend", b.kind, "Completion source")->check(CLI::IsMember({"http", "replay"}))->capture_default_str();
  cmd->add_option("--model", b.model, "Model identifier")->capture_default_str();
  cmd->add_option("--temperature", b.temperature, "Sampling temperature")->capture_default_str();
  cmd->add_option("--endpoint", b.endpoint, "Chat-completions URL for the http backend")->capture_default_str();
  cmd->add_option("--credential-env", b.credential_env, "Environment variable holding the API key")->capture_default_str();
  cmd->add_option("--cache-dir", b.cache_dir, "Directory of the completion cache")->required();
  cmd->add_option("--max-retries", b.max_retries, "Retries per request")->capture_default_str();
  cmd->add_option("--timeout-ms", b.timeout_ms, "Per-request timeout")->capture_default_str();
  cmd->add_option("--backoff-ms", b.backoff_ms, "First retry delay, doubled per retry")->capture_default_str();
}

grader::BackendConfig backend_config(const BackendOptions& b) {
  grader::BackendConfig c;
  c.kind = b.kind == "http" ? grader::BackendKind::HttpChat : grader::BackendKind::Replay;
  c.model_id = b.model;
  c.temperature = b.temperature;
  c.endpoint = b.endpoint;
  c.credential_env = b.credential_env;
  c.cache_dir = b.cache_dir;
  c.max_retries = b.max_retries;
  c.timeout = std::chrono::milliseconds(b.timeout_ms);
  c.initial_backoff = std::chrono::milliseconds(b.backoff_ms);
  c.validate();
  return c;
}

void require_dir(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) throw UsageError(std::string(what) + " " + path + " is not a directory");
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << bytes;
  f.close();
  if (!f) throw Error("cannot write " + path.string());
}

// Submissions in course, question, submission-id order.
std::vector<std::pair<const corpus::Submission*, const corpus::Question*>> ordered_submissions(
    const corpus::Corpus& c) {
  std::vector<std::pair<const corpus::Submission*, const corpus::Question*>> out;
  for (const corpus::Course& course : c.courses) {
    for (const corpus::Question* q : c.questions_of(course.id)) {
      std::vector<const corpus::Submission*> subs = c.submissions_of(q->id);
      std::sort(subs.begin(), subs.end(), [](auto* a, auto* b) { return a->id < b->id; });
      for (const corpus::Submission* s : subs) out.emplace_back(s, q);
    }
  }
  return out;
}

// Runs f(i) for i in [0, n) on up to `jobs` threads.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F f) {
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
    });
  }
}

// ---- validate ----------------------------------------------------------

int cmd_validate(const std::string& corpus_path, std::ostream& out, std::ostream& err) {
  require_dir(corpus_path, "corpus");
  const corpus::Corpus c = corpus::read_corpus_bundle(corpus_path);
  std::size_t errors = 0;
  for (const corpus::Finding& f : corpus::check_corpus(c)) {
    const bool is_error = f.severity == corpus::Severity::Error;
    errors += is_error;
    (is_error ? err : out) << (is_error ? "error: " : "warning: ") << f.subject << ": " << f.message << "\n";
  }
  if (errors > 0) {
    err << errors << " integrity error" << (errors == 1 ? "" : "s") << "\n";
    return kExitFailure;
  }
  std::size_t instructor = 0;
  std::size_t generated = 0;
  for (const auto& r : c.rubrics) (r.origin == corpus::RubricOrigin::Instructor ? instructor : generated)++;
  out << c.questions.size() << " questions, " << instructor << " rubrics";
  if (generated > 0) out << " (+" << generated << " ai_generated)";
  out << " OK\n";
  return kExitOk;
}

// ---- genrubric ---------------------------------------------------------

struct GenrubricOptions {
  std::string corpus;
  std::string templates = "templates";
  std::vector<std::string> courses;
  bool force = false;
  BackendOptions backend;
};

// Generates AI rubrics for the chosen courses and rewrites ai_rubrics.json.
// Returns the number of per-question failures.
std::size_t generate_rubrics(const corpus::Corpus& c, const std::vector<std::string>& course_ids,
                             const prompting::TemplateSet& templates, grader::Dispatcher& dispatcher,
                             const fs::path& corpus_dir, std::ostream& out, std::ostream& err) {
  std::vector<corpus::Rubric> kept;
  std::set<std::string> replaced;
  for (const std::string& id : course_ids) {
    for (const corpus::Question* q : c.questions_of(id)) replaced.insert(q->id);
  }
  for (const corpus::Rubric& r : c.rubrics) {
    if (r.origin == corpus::RubricOrigin::AiGenerated && !replaced.count(r.question_id)) kept.push_back(r);
  }

  std::size_t failures = 0;
  std::size_t made = 0;
  for (const std::string& id : course_ids) {
    const corpus::Course& course = c.course(id);
    const std::vector<const corpus::Question*> questions = c.questions_of(id);
    std::vector<const corpus::ModelAnswer*> answers;
    for (const corpus::Question* q : questions) answers.push_back(&c.model_answer(q->id));
    const prompting::PromptArtifact prompt =
        prompting::build_rubric_prompt(course, questions, answers, templates.rubric_generation, dispatcher.config().key());
    grader::RawResponse raw;
    try {
      raw = dispatcher.dispatch(prompt);
    } catch (const Error& e) {
      err << "error: " << id << ": " << e.what() << "\n";
      failures += questions.size();
      continue;
    }
    const std::map<int, std::string> sections = grader::split_rubric_sections(raw.text);
    for (std::size_t i = 0; i < questions.size(); ++i) {
      const corpus::Question& q = *questions[i];
      const auto it = sections.find(static_cast<int>(i + 1));
      if (it == sections.end()) {
        err << "error: " << q.id << ": completion has no rubric for Question " << (i + 1) << "\n";
        ++failures;
        continue;
      }
      try {
        kept.push_back(grader::parse_ai_rubric(it->second, q));
        ++made;
      } catch (const Error& e) {
        err << "error: " << q.id << ": " << e.what() << "\n";
        ++failures;
      }
    }
  }

  // Keep the document in corpus question order.
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < c.questions.size(); ++i) position[c.questions[i].id] = i;
  std::stable_sort(kept.begin(), kept.end(), [&](const corpus::Rubric& a, const corpus::Rubric& b) {
    return position[a.question_id] < position[b.question_id];
  });
  write_file(corpus_dir / "ai_rubrics.json", corpus::rubrics_to_json(kept));
  out << "generated " << made << " rubric" << (made == 1 ? "" : "s");
  if (failures) out << ", " << failures << " failed";
  out << "\n";
  return failures;
}

int cmd_genrubric(const GenrubricOptions& o, std::ostream& out, std::ostream& err) {
  require_dir(o.corpus, "corpus");
  const corpus::Corpus c = corpus::load_corpus(o.corpus);
  std::vector<std::string> courses = o.courses;
  if (courses.empty()) {
    for (const corpus::Course& course : c.courses) courses.push_back(course.id);
  }
  for (const std::string& id : courses) {
    if (!c.find_course(id)) throw UsageError("unknown course " + id);
    if (o.force) continue;
    for (const corpus::Question* q : c.questions_of(id)) {
      if (c.find_rubric(q->id, corpus::RubricOrigin::AiGenerated)) {
        err << "error: " << q->id << " already has an AI-generated rubric; pass --force to regenerate\n";
        return kExitFailure;
      }
    }
  }
  const prompting::TemplateSet templates = prompting::load_template_set(o.templates);
  const grader::BackendConfig config = backend_config(o.backend);
  grader::ResponseCache cache(config.cache_dir);
  grader::Dispatcher dispatcher(config, cache);
  const std::size_t failures = generate_rubrics(c, courses, templates, dispatcher, o.corpus, out, err);
  return failures ? kExitFailure : kExitOk;
}

// ---- grade -------------------------------------------------------------

struct GradeOptions {
  std::string corpus;
  std::string templates = "templates";
  std::vector<std::string> conditions;
  std::string out;
  unsigned jobs = 4;
  bool auto_genrubric = false;
  BackendOptions backend;
};

int cmd_grade(const GradeOptions& o, std::ostream& out, std::ostream& err) {
  require_dir(o.corpus, "corpus");
  std::vector<PromptCondition> conditions;
  for (const std::string& text : o.conditions) {
    const auto c = prompting::parse_condition(text);
    if (!c) throw UsageError("unknown condition '" + text + "'");
    if (std::find(conditions.begin(), conditions.end(), *c) == conditions.end()) conditions.push_back(*c);
  }
  std::sort(conditions.begin(), conditions.end());

  corpus::Corpus c = corpus::load_corpus(o.corpus);
  const prompting::TemplateSet templates = prompting::load_template_set(o.templates);
  const grader::BackendConfig config = backend_config(o.backend);
  grader::ResponseCache cache(config.cache_dir);
  grader::Dispatcher dispatcher(config, cache);

  if (std::find(conditions.begin(), conditions.end(), PromptCondition::AiRubricPlusAnswer) != conditions.end()) {
    std::vector<std::string> missing;
    for (const corpus::Course& course : c.courses) {
      for (const corpus::Question* q : c.questions_of(course.id)) {
        if (!c.find_rubric(q->id, corpus::RubricOrigin::AiGenerated)) {
          missing.push_back(course.id);
          break;
        }
      }
    }
    if (!missing.empty()) {
      if (!o.auto_genrubric) {
        err << "error: condition 3 needs AI-generated rubrics for course " << missing.front()
            << "; run genrubric first or pass --auto-genrubric\n";
        return kExitFailure;
      }
      if (generate_rubrics(c, missing, templates, dispatcher, o.corpus, out, err) > 0) return kExitFailure;
      c = corpus::load_corpus(o.corpus);
    }
  }

  const auto items = ordered_submissions(c);
  struct Task {
    PromptCondition condition;
    const corpus::Submission* submission;
    const corpus::Question* question;
  };
  std::vector<Task> tasks;
  for (PromptCondition cond : conditions) {
    for (const auto& [s, q] : items) tasks.push_back({cond, s, q});
  }

  std::vector<std::optional<grader::GradeResult>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  parallel_for(tasks.size(), o.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    try {
      results[i] = grader::grade_submission(*t.submission, *t.question, t.condition, c, templates, dispatcher);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  report::Ledger ledger;
  report::RunManifest& m = ledger.manifest;
  m.tool_version = gradekit::version();
  m.corpus_path = o.corpus;
  m.backend_kind = o.backend.kind;
  m.backend_id = config.backend_id;
  m.model_id = config.model_id;
  m.temperature = config.temperature;
  for (PromptCondition cond : conditions) {
    m.conditions.push_back(prompting::condition_number(cond));
    m.templates.push_back(templates.for_condition(cond).name);
  }
  if (std::find(conditions.begin(), conditions.end(), PromptCondition::AiRubricPlusAnswer) != conditions.end()) {
    m.condition3_shell = templates.ai_rubric.name;
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!results[i]) {
      ledger.failures.push_back({tasks[i].submission->id, prompting::condition_number(tasks[i].condition), errors[i]});
      err << "error: " << errors[i] << "\n";
      continue;
    }
    const grader::GradeResult& g = *results[i];
    report::LedgerRow row;
    row.record.submission_id = g.submission_id;
    row.record.rater_id = aggregation::rater_id(g.condition);
    row.record.provenance = aggregation::Provenance::Llm;
    row.record.awarded = g.awarded;
    row.record.max = g.max;
    row.record.flags = g.flags.names();
    row.record.prompt_hash = g.raw.prompt_hash;
    row.question_id = g.question_id;
    row.condition = prompting::condition_number(g.condition);
    row.normalized = corpus::normalize_score(g.awarded, g.max);
    row.retrieved_at = g.raw.retrieved_at;
    row.rationale = g.rationale;
    m.timestamp = std::max(m.timestamp, row.retrieved_at);
    ledger.rows.push_back(std::move(row));
  }
  write_file(o.out, report::ledger_to_json(ledger));
  out << "graded " << ledger.rows.size() << " of " << tasks.size();
  if (!ledger.failures.empty()) out << ", " << ledger.failures.size() << " failed";
  out << "\n";
  return ledger.failures.empty() ? kExitOk : kExitFailure;
}

// ---- stats -------------------------------------------------------------

struct StatsCliOptions {
  std::string corpus;
  std::vector<std::string> ledgers;
  std::vector<std::string> raters;
  std::uint64_t seed = report::StatsOptions{}.seed;
  std::size_t iterations = 10000;
  std::string icc_variant = "ICC(2,1)";
  std::string levene_center = "median";
  std::string even_median = "mean_of_middle";
  unsigned threads = 1;
  std::string out;
};

void write_csvs(const std::string& json, const fs::path& dir) {
  for (const auto& [name, csv] : report::render_report_csvs(json)) write_file(dir / name, csv);
}

int cmd_stats(const StatsCliOptions& o, std::ostream& out, std::ostream& err) {
  require_dir(o.corpus, "corpus");
  report::StatsOptions opts;
  opts.seed = o.seed;
  opts.iterations = o.iterations;
  opts.threads = o.threads;
  const auto variant = statkit::parse_icc_variant(o.icc_variant);
  if (!variant) throw UsageError("unknown ICC variant '" + o.icc_variant + "'");
  opts.icc_variant = *variant;
  opts.levene_center = o.levene_center == "mean" ? statkit::LeveneCenter::Mean : statkit::LeveneCenter::Median;
  const auto even = aggregation::parse_even_median(o.even_median);
  if (!even) throw UsageError("unknown even-median rule '" + o.even_median + "'");

  const corpus::Corpus c = corpus::load_corpus(o.corpus);
  std::vector<aggregation::GradeRecord> records = aggregation::instructor_records(c);
  for (aggregation::GradeRecord& r : aggregation::peer_records(c, *even)) records.push_back(std::move(r));

  report::RunManifest m;
  m.tool_version = gradekit::version();
  m.corpus_path = o.corpus;
  m.even_median = aggregation::to_string(*even);
  std::set<int> conditions;
  for (const std::string& path : o.ledgers) {
    const report::Ledger ledger = report::read_ledger(path);
    const report::RunManifest& lm = ledger.manifest;
    if (m.backend_kind.empty()) {
      m.backend_kind = lm.backend_kind;
      m.backend_id = lm.backend_id;
      m.model_id = lm.model_id;
      m.temperature = lm.temperature;
    } else if (m.model_id != lm.model_id || m.temperature != lm.temperature || m.backend_id != lm.backend_id) {
      err << "warning: " << path << " was graded with a different backend configuration\n";
    }
    for (const std::string& t : lm.templates) {
      if (std::find(m.templates.begin(), m.templates.end(), t) == m.templates.end()) m.templates.push_back(t);
    }
    conditions.insert(lm.conditions.begin(), lm.conditions.end());
    if (!lm.condition3_shell.empty()) m.condition3_shell = lm.condition3_shell;
    m.timestamp = std::max(m.timestamp, lm.timestamp);
    for (const report::LedgerRow& row : ledger.rows) records.push_back(row.record);
  }
  m.conditions.assign(conditions.begin(), conditions.end());

  for (const std::string& r : o.raters) {
    const bool covered = std::any_of(records.begin(), records.end(), [&](const auto& rec) { return rec.rater_id == r; });
    if (!covered) throw PreconditionError("no grades for rater " + r + "; pass the ledger that covers it");
  }
  const aggregation::GradeMatrix matrix = aggregation::build_grade_matrix(records, c, o.raters);
  for (const std::string& w : matrix.warnings) err << "warning: " << w << "\n";

  const report::StatReport rep = report::compute_stat_report(matrix, &c, opts, m);
  const std::string json = report::stat_report_to_json(rep);
  write_file(fs::path(o.out) / "stat_report.json", json);
  write_csvs(json, o.out);
  out << "stats over " << matrix.rows() << " items x " << matrix.cols() << " raters; Friedman p = "
      << report::format_p(rep.friedman.p_value) << "\n";
  return kExitOk;
}

// ---- report ------------------------------------------------------------

int cmd_report(const std::string& in, const std::string& format, const std::string& out_dir, std::ostream& out) {
  std::error_code ec;
  if (!fs::is_regular_file(in, ec)) throw UsageError("stat report " + in + " does not exist");
  if (format != "csv") throw UsageError("unsupported format '" + format + "'");
  std::ifstream f(in, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  const auto csvs = report::render_report_csvs(buf.str());
  for (const auto& [name, csv] : csvs) write_file(fs::path(out_dir) / name, csv);
  out << "wrote " << csvs.size() << " files to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grade short answers with LLM prompts and compare raters statistically", "gradekit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gradekit::version()));

  std::string validate_corpus;
  CLI::App* validate = app.add_subcommand("validate", "Check a corpus bundle for integrity errors");
  validate->add_option("--corpus", validate_corpus, "Corpus bundle directory")->required();

  GenrubricOptions gen;
  CLI::App* genrubric = app.add_subcommand("genrubric", "Ask the model for per-question rubrics");
  genrubric->add_option("--corpus", gen.corpus, "Corpus bundle directory")->required();
  genrubric->add_option("--templates", gen.templates, "Prompt template directory")->capture_default_str();
  genrubric->add_option("--course", gen.courses, "Course to generate for (repeatable; default all)");
  genrubric->add_flag("--force", gen.force, "Replace existing AI-generated rubrics");
  add_backend_options(genrubric, gen.backend);

  GradeOptions grade;
  CLI::App* grade_cmd = app.add_subcommand("grade", "Grade every submission under the given conditions");
  grade_cmd->add_option("--corpus", grade.corpus, "Corpus bundle directory")->required();
  grade_cmd->add_option("--templates", grade.templates, "Prompt template directory")->capture_default_str();
  grade_cmd->add_option("--condition", grade.conditions, "Prompt condition 1, 2 or 3 (repeatable or comma-separated)")
      ->required()
      ->delimiter(',');
  grade_cmd->add_option("--out", grade.out, "Ledger file to write")->required();
  grade_cmd->add_option("--jobs", grade.jobs, "Concurrent dispatches")->check(CLI::PositiveNumber)->capture_default_str();
  grade_cmd->add_flag("--auto-genrubric", grade.auto_genrubric, "Generate missing AI rubrics before condition 3");
  add_backend_options(grade_cmd, grade.backend);

  StatsCliOptions stats;
  CLI::App* stats_cmd = app.add_subcommand("stats", "Compare instructor, peer and model grades");
  stats_cmd->add_option("--corpus", stats.corpus, "Corpus bundle directory")->required();
  stats_cmd->add_option("--ledger", stats.ledgers, "Ledger written by grade (repeatable)");
  stats_cmd->add_option("--raters", stats.raters, "Rater columns, e.g. instructor,peer_median,llm_p1")->delimiter(',');
  stats_cmd->add_option("--seed", stats.seed, "Bootstrap seed")->capture_default_str();
  stats_cmd->add_option("--iterations", stats.iterations, "Bootstrap iterations")->check(CLI::PositiveNumber)->capture_default_str();
  stats_cmd->add_option("--icc-variant", stats.icc_variant, "Headline ICC form")->capture_default_str();
  stats_cmd->add_option("--levene-center", stats.levene_center, "Levene centering")
      ->check(CLI::IsMember({"median", "mean"}))
      ->capture_default_str();
  stats_cmd->add_option("--even-median", stats.even_median, "Median of an even peer count")
      ->check(CLI::IsMember({"mean_of_middle", "lower", "upper"}))
      ->capture_default_str();
  stats_cmd->add_option("--threads", stats.threads, "Bootstrap worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  stats_cmd->add_option("--out", stats.out, "Output directory")->required();

  std::string report_in;
  std::string report_format = "csv";
  std::string report_out;
  CLI::App* report_cmd = app.add_subcommand("report", "Render a stat report as CSV tables");
  report_cmd->add_option("--in", report_in, "stat_report.json written by stats")->required();
  report_cmd->add_option("--format", report_format, "Output format")->capture_default_str();
  report_cmd->add_option("--out", report_out, "Output directory")->required();

  std::vector<std::string> argv_storage{"gradekit"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(validate_corpus, out, err);
    if (*genrubric) return cmd_genrubric(gen, out, err);
    if (*grade_cmd) return cmd_grade(grade, out, err);
    if (*stats_cmd) return cmd_stats(stats, out, err);
    if (*report_cmd) return cmd_report(report_in, report_format, report_out, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace gradekit::cli
