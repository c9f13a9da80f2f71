#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <regex>

#include "gradekit/grader/grader.hpp"

namespace gradekit::grader {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_number(std::string token) {
  token.erase(std::remove_if(token.begin(), token.end(), [](unsigned char c) { return std::isspace(c); }),
              token.end());
  return std::strtod(token.c_str(), nullptr);
}

// Optional emphasis/whitespace, then "A / B".
const std::regex& fraction_pattern() {
  static const std::regex re(R"(^[\s*_]*(-?\s*\d+(?:\.\d+)?)\s*/\s*(\d+(?:\.\d+)?))");
  return re;
}

struct Located {
  std::size_t begin;
  std::size_t end;
  std::string numerator;
  std::string denominator;
};

std::optional<Located> fraction_at(std::string_view text, std::size_t offset, std::size_t span_begin) {
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(text.begin() + static_cast<std::ptrdiff_t>(offset), text.end(), m, fraction_pattern(),
                         std::regex_constants::match_continuous)) {
    return std::nullopt;
  }
  return Located{span_begin, offset + static_cast<std::size_t>(m.length(0)), m[1].str(), m[2].str()};
}

std::size_t last_marker(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower.rfind("grade:");
}

}  // namespace

std::vector<std::string> GradeFlags::names() const {
  std::vector<std::string> out;
  if (max_mismatch_repaired) out.emplace_back("max_mismatch_repaired");
  if (non_integer_awarded) out.emplace_back("non_integer_awarded");
  return out;
}

ExtractedGrade extract_grade(std::string_view text, int expected_max) {
  if (expected_max < 1) throw DomainError("extract_grade: expected maximum must be at least 1");
  if (trim(text).empty()) throw ParseError("no parsable grade: completion is empty");

  std::optional<Located> found;
  if (const std::size_t marker = last_marker(text); marker != std::string_view::npos) {
    found = fraction_at(text, marker + 6, marker);
  }
  if (!found) found = fraction_at(text, 0, 0);
  if (!found) throw ParseError("no parsable grade: no A/B fraction at the start or after the last \"Grade:\"");

  ExtractedGrade g;
  g.raw_numerator = parse_number(found->numerator);
  g.raw_denominator = parse_number(found->denominator);
  if (g.raw_denominator == 0.0) throw DomainError("grade " + found->numerator + "/0 has a zero denominator");
  if (g.raw_numerator < 0.0) throw DomainError("grade " + found->numerator + "/" + found->denominator + " is negative");
  if (g.raw_numerator > g.raw_denominator) {
    throw DomainError("grade " + found->numerator + "/" + found->denominator + " exceeds the maximum");
  }

  g.max = expected_max;
  if (g.raw_denominator != static_cast<double>(expected_max)) {
    g.awarded = static_cast<double>(expected_max) * g.raw_numerator / g.raw_denominator;
    g.flags.max_mismatch_repaired = true;
  } else {
    g.awarded = g.raw_numerator;
  }
  g.flags.non_integer_awarded = g.awarded != std::floor(g.awarded);

  std::string rest(text.substr(0, found->begin));
  rest.append(text.substr(found->end));
  g.rationale = trim(rest);
  return g;
}

corpus::Rubric parse_ai_rubric(std::string_view text, const corpus::Question& question) {
  static const std::regex item(R"(^\s*[-*]\s+(.+?)\s*\((\d+)\s+points?\)\s*:\s*(.*?)\s*$)");
  corpus::Rubric rubric;
  rubric.question_id = question.id;
  rubric.origin = corpus::RubricOrigin::AiGenerated;

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string line(text.substr(start, stop - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, item)) {
      const int points = std::atoi(m[2].str().c_str());
      if (points < 1) throw ParseError("ai rubric for " + question.id + ": criterion \"" + m[1].str() + "\" is worth 0 points");
      corpus::RubricCriterion crit;
      crit.label = trim(m[1].str());
      crit.description = m[3].str();
      crit.levels = {{points, crit.description}, {0, ""}};
      rubric.criteria.push_back(std::move(crit));
    }
    start = stop + 1;
  }
  if (rubric.criteria.empty()) {
    throw ParseError("ai rubric for " + question.id + ": no \"- label (N points): description\" lines found");
  }
  const int sum = corpus::question_max_points(rubric);
  if (sum != question.max_points) {
    throw IntegrityError("ai rubric for " + question.id + ": criteria sum " + std::to_string(sum) +
                         " != max_points " + std::to_string(question.max_points));
  }
  return rubric;
}

std::map<int, std::string> split_rubric_sections(std::string_view text) {
  static const std::regex heading(R"(^\s*[#*]*\s*Rubric for (?:[A-Za-z]+ )?Question (\d+)\s*:?[*]*\s*$)");
  std::map<int, std::string> sections;
  int current = 0;
  std::string body;
  auto flush = [&] {
    if (current > 0 && sections.count(current) == 0) sections[current] = trim(body);
    body.clear();
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string line(text.substr(start, stop - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, heading)) {
      flush();
      current = std::atoi(m[1].str().c_str());
    } else if (current > 0) {
      body += line;
      body += '\n';
    }
    start = stop + 1;
  }
  flush();
  return sections;
}

prompting::PromptArtifact grading_prompt(const corpus::Submission& submission, const corpus::Question& question,
                                         prompting::PromptCondition condition, const corpus::Corpus& corpus,
                                         const prompting::TemplateSet& templates, const prompting::DispatchKey& key) {
  const corpus::Rubric* rubric = nullptr;
  if (condition == prompting::PromptCondition::AnswerPlusRubric) {
    rubric = &corpus.rubric(question.id, corpus::RubricOrigin::Instructor);
  } else if (condition == prompting::PromptCondition::AiRubricPlusAnswer) {
    rubric = corpus.find_rubric(question.id, corpus::RubricOrigin::AiGenerated);
    if (rubric == nullptr) {
      throw PreconditionError("no ai_generated rubric for " + question.id + "; run genrubric first");
    }
  }
  return prompting::build_grading_prompt(condition, question, corpus.model_answer(question.id), rubric, submission,
                                         templates.for_condition(condition), key,
                                         corpus.find_course(question.course_id));
}

GradeResult grade_submission(const corpus::Submission& submission, const corpus::Question& question,
                             prompting::PromptCondition condition, const corpus::Corpus& corpus,
                             const prompting::TemplateSet& templates, Dispatcher& dispatcher) {
  try {
    const auto artifact = grading_prompt(submission, question, condition, corpus, templates, dispatcher.config().key());
    GradeResult result;
    result.raw = dispatcher.dispatch(artifact);
    const auto grade = extract_grade(result.raw.text, question.max_points);
    result.submission_id = submission.id;
    result.question_id = question.id;
    result.condition = condition;
    result.awarded = grade.awarded;
    result.max = grade.max;
    result.rationale = grade.rationale;
    result.flags = grade.flags;
    return result;
  } catch (const GradingError&) {
    throw;
  } catch (const std::exception& e) {
    throw GradingError(submission.id, condition, e.what());
  }
}

}  // namespace gradekit::grader
