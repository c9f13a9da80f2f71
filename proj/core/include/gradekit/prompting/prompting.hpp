#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradekit/corpus/corpus.hpp"

namespace gradekit::prompting {

enum class PromptCondition { AnswerOnly = 1, AnswerPlusRubric = 2, AiRubricPlusAnswer = 3 };

inline constexpr std::array<PromptCondition, 3> kAllConditions = {
    PromptCondition::AnswerOnly, PromptCondition::AnswerPlusRubric, PromptCondition::AiRubricPlusAnswer};

/// "answer_only", "answer_plus_rubric", "ai_rubric_plus_answer".
std::string to_string(PromptCondition c);
/// 1, 2 or 3.
int condition_number(PromptCondition c);
/// Accepts "1".."3" or the to_string spelling.
std::optional<PromptCondition> parse_condition(std::string_view text);

/// Names a {{placeholder}} may use.
inline constexpr std::array<std::string_view, 8> kPlaceholders = {
    "question", "model_answer", "rubric", "student_answer", "max_points", "course_title", "audience_note",
    "score_breakdown"};

enum class TemplateRole { AnswerOnly, WithRubric, RubricGeneration };

struct PromptTemplate {
  std::string name;
  std::string body;
};

/// Placeholder names in body order, duplicates kept. TemplateError on an
/// unknown name or an unterminated "{{".
std::vector<std::string> placeholders(const PromptTemplate& tmpl);

/// Checks the placeholders a role needs (and, for AnswerOnly, that no rubric
/// slot exists) plus the trailing "Grade:" cue of grading templates.
void validate_template(const PromptTemplate& tmpl, TemplateRole role);

/// Single-pass substitution; bound text is inserted as-is and never rescanned.
/// TemplateError names a missing binding or unknown placeholder.
std::string render(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings);

/// Reads a template file; the name is the file stem. One trailing newline
/// (the file terminator) is dropped.
PromptTemplate load_template(const std::filesystem::path& path);

struct TemplateSet {
  PromptTemplate answer_only;
  PromptTemplate with_rubric;
  PromptTemplate ai_rubric;
  PromptTemplate rubric_generation;

  const PromptTemplate& for_condition(PromptCondition c) const;
};

inline constexpr const char* kAnswerOnlyTemplate = "grade_answer_only.tmpl";
inline constexpr const char* kWithRubricTemplate = "grade_instructor_rubric.tmpl";
inline constexpr const char* kAiRubricTemplate = "grade_ai_rubric.tmpl";
inline constexpr const char* kRubricGenerationTemplate = "rubric_generation.tmpl";

/// Loads and validates the four bundled template files from `dir`.
TemplateSet load_template_set(const std::filesystem::path& dir);

/// Everything besides the prompt text that determines a completion.
struct DispatchKey {
  std::string backend_id = "chat-completions";
  std::string model_id = "gpt-4";
  double temperature = 0.0;
};

/// Lower-case hex SHA-256 over a versioned, NUL-separated encoding of the key
/// fields and the text.
std::string content_hash(const DispatchKey& key, std::string_view text);

struct PromptArtifact {
  std::optional<PromptCondition> condition;  // empty for rubric generation
  std::string template_name;
  std::string text;
  std::string content_hash;

  bool is_rubric_generation() const { return !condition.has_value(); }
};

/// Rubric block in prose: the criterion description (or label), then one
/// "N points: descriptor" line per level, blank lines between.
std::string render_rubric_prose(const corpus::Rubric& rubric);

/// Rubric block as "- label (N points): description" list items, the form
/// AI-generated rubrics come back in.
std::string render_rubric_list(const corpus::Rubric& rubric);

/// Pick prose for instructor rubrics and list form for AI-generated ones.
std::string render_rubric(const corpus::Rubric& rubric);

PromptArtifact build_grading_prompt(PromptCondition condition, const corpus::Question& question,
                                    const corpus::ModelAnswer& answer, const corpus::Rubric* rubric,
                                    const corpus::Submission& submission, const PromptTemplate& tmpl,
                                    const DispatchKey& key, const corpus::Course* course = nullptr);

/// "the score for Question 1 is 10, the score for Question 2 is 10, and the
/// score for Question 3 is 10".
std::string score_breakdown(std::span<const corpus::Question* const> questions);

/// Numbered "Question i: / Answer i: / Full Score: N/N" blocks.
std::string question_answer_block(std::span<const corpus::Question* const> questions,
                                  std::span<const corpus::ModelAnswer* const> answers);

PromptArtifact build_rubric_prompt(const corpus::Course& course, std::span<const corpus::Question* const> questions,
                                   std::span<const corpus::ModelAnswer* const> answers, const PromptTemplate& tmpl,
                                   const DispatchKey& key);

}  // namespace gradekit::prompting
