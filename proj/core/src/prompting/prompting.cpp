#include "gradekit/prompting/prompting.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <set>

#include "common/io.hpp"
#include "gradekit/error.hpp"

namespace gradekit::prompting {

using corpus::Rubric;
using corpus::RubricOrigin;

std::string to_string(PromptCondition c) {
  switch (c) {
    case PromptCondition::AnswerOnly: return "answer_only";
    case PromptCondition::AnswerPlusRubric: return "answer_plus_rubric";
    case PromptCondition::AiRubricPlusAnswer: return "ai_rubric_plus_answer";
  }
  return "unknown";
}

int condition_number(PromptCondition c) { return static_cast<int>(c); }

std::optional<PromptCondition> parse_condition(std::string_view text) {
  for (PromptCondition c : kAllConditions) {
    if (text == to_string(c) || text == std::to_string(condition_number(c))) return c;
  }
  return std::nullopt;
}

namespace {

bool allowed(std::string_view name) {
  return std::find(kPlaceholders.begin(), kPlaceholders.end(), name) != kPlaceholders.end();
}

struct Token {
  std::size_t begin;  // offset of "{{"
  std::size_t end;    // one past "}}"
  std::string name;
};

std::vector<Token> scan(const PromptTemplate& tmpl) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  const std::string& body = tmpl.body;
  while ((pos = body.find("{{", pos)) != std::string::npos) {
    const std::size_t close = body.find("}}", pos + 2);
    if (close == std::string::npos) {
      throw TemplateError("template " + tmpl.name + ": unterminated \"{{\" at offset " + std::to_string(pos));
    }
    std::string name = body.substr(pos + 2, close - pos - 2);
    if (!allowed(name)) throw TemplateError("template " + tmpl.name + ": unknown placeholder \"" + name + "\"");
    tokens.push_back({pos, close + 2, std::move(name)});
    pos = close + 2;
  }
  return tokens;
}

std::string trim_right(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\n' || s.back() == '\r' || s.back() == '\t')) s.pop_back();
  return s;
}

std::string points_phrase(int points) { return std::to_string(points) + (points == 1 ? " point" : " points"); }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> placeholders(const PromptTemplate& tmpl) {
  std::vector<std::string> names;
  for (auto& t : scan(tmpl)) names.push_back(std::move(t.name));
  return names;
}

void validate_template(const PromptTemplate& tmpl, TemplateRole role) {
  const auto names = placeholders(tmpl);
  const std::set<std::string> present(names.begin(), names.end());
  std::vector<std::string> required;
  switch (role) {
    case TemplateRole::AnswerOnly:
    case TemplateRole::WithRubric:
      required = {"question", "model_answer", "student_answer", "max_points"};
      if (role == TemplateRole::WithRubric) required.push_back("rubric");
      if (role == TemplateRole::AnswerOnly && present.count("rubric") != 0) {
        throw TemplateError("template " + tmpl.name + ": an answer-only template must not contain {{rubric}}");
      }
      if (!trim_right(tmpl.body).ends_with("Grade:")) {
        throw TemplateError("template " + tmpl.name + ": grading templates must end with the \"Grade:\" cue");
      }
      break;
    case TemplateRole::RubricGeneration:
      required = {"question", "score_breakdown"};
      break;
  }
  for (const auto& r : required) {
    if (present.count(r) == 0) throw TemplateError("template " + tmpl.name + ": missing required {{" + r + "}}");
  }
}

std::string render(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings) {
  const auto tokens = scan(tmpl);
  std::string out;
  out.reserve(tmpl.body.size());
  std::size_t cursor = 0;
  for (const auto& t : tokens) {
    const auto it = bindings.find(t.name);
    if (it == bindings.end()) throw TemplateError("template " + tmpl.name + ": missing binding \"" + t.name + "\"");
    out.append(tmpl.body, cursor, t.begin - cursor);
    out += it->second;
    cursor = t.end;
  }
  out.append(tmpl.body, cursor, std::string::npos);
  return out;
}

PromptTemplate load_template(const std::filesystem::path& path) {
  PromptTemplate t;
  t.name = path.stem().string();
  t.body = detail::read_text_file(path);
  if (!t.body.empty() && t.body.back() == '\n') t.body.pop_back();
  return t;
}

const PromptTemplate& TemplateSet::for_condition(PromptCondition c) const {
  switch (c) {
    case PromptCondition::AnswerOnly: return answer_only;
    case PromptCondition::AnswerPlusRubric: return with_rubric;
    case PromptCondition::AiRubricPlusAnswer: return ai_rubric;
  }
  return answer_only;
}

TemplateSet load_template_set(const std::filesystem::path& dir) {
  TemplateSet set;
  set.answer_only = load_template(dir / kAnswerOnlyTemplate);
  set.with_rubric = load_template(dir / kWithRubricTemplate);
  set.ai_rubric = load_template(dir / kAiRubricTemplate);
  set.rubric_generation = load_template(dir / kRubricGenerationTemplate);
  validate_template(set.answer_only, TemplateRole::AnswerOnly);
  validate_template(set.with_rubric, TemplateRole::WithRubric);
  validate_template(set.ai_rubric, TemplateRole::WithRubric);
  validate_template(set.rubric_generation, TemplateRole::RubricGeneration);
  return set;
}

std::string content_hash(const DispatchKey& key, std::string_view text) {
  char temp[40];
  std::snprintf(temp, sizeof temp, "%.17g", key.temperature);
  std::string message = "gradekit-v1";
  message.push_back('\0');
  message += key.backend_id;
  message.push_back('\0');
  message += key.model_id;
  message.push_back('\0');
  message += temp;
  message.push_back('\0');
  message += text;

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(message.data(), message.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string render_rubric_prose(const Rubric& rubric) {
  std::vector<std::string> blocks;
  for (const auto& crit : rubric.criteria) {
    const std::string& header = crit.description.empty() ? crit.label : crit.description;
    if (!header.empty()) blocks.push_back(header);
    for (const auto& level : crit.levels) {
      std::string line = points_phrase(level.points) + ":";
      if (!level.descriptor.empty()) line += " " + level.descriptor;
      blocks.push_back(std::move(line));
    }
  }
  return join(blocks, "\n\n");
}

std::string render_rubric_list(const Rubric& rubric) {
  std::vector<std::string> lines;
  for (const auto& crit : rubric.criteria) {
    std::string line = "- " + crit.label + " (" + points_phrase(crit.max_points()) + "):";
    if (!crit.description.empty()) line += " " + crit.description;
    lines.push_back(std::move(line));
  }
  return join(lines, "\n");
}

std::string render_rubric(const Rubric& rubric) {
  return rubric.origin == RubricOrigin::Instructor ? render_rubric_prose(rubric) : render_rubric_list(rubric);
}

PromptArtifact build_grading_prompt(PromptCondition condition, const corpus::Question& question,
                                    const corpus::ModelAnswer& answer, const Rubric* rubric,
                                    const corpus::Submission& submission, const PromptTemplate& tmpl,
                                    const DispatchKey& key, const corpus::Course* course) {
  switch (condition) {
    case PromptCondition::AnswerOnly:
      if (rubric != nullptr) throw PreconditionError("answer-only prompts take no rubric");
      break;
    case PromptCondition::AnswerPlusRubric:
      if (rubric == nullptr || rubric->origin != RubricOrigin::Instructor) {
        throw PreconditionError("condition 2 requires the instructor rubric for " + question.id);
      }
      break;
    case PromptCondition::AiRubricPlusAnswer:
      if (rubric == nullptr || rubric->origin != RubricOrigin::AiGenerated) {
        throw PreconditionError("condition 3 requires an ai_generated rubric for " + question.id);
      }
      break;
  }
  if (rubric != nullptr && rubric->question_id != question.id) {
    throw PreconditionError("rubric belongs to " + rubric->question_id + ", not " + question.id);
  }
  if (answer.question_id != question.id || submission.question_id != question.id) {
    throw PreconditionError("model answer or submission does not belong to " + question.id);
  }

  std::map<std::string, std::string> bindings = {
      {"question", question.prompt_text},
      {"model_answer", answer.text},
      {"student_answer", submission.text},
      {"max_points", std::to_string(question.max_points)},
  };
  if (rubric != nullptr) bindings["rubric"] = render_rubric(*rubric);
  if (course != nullptr) {
    bindings["course_title"] = course->title;
    bindings["audience_note"] = course->audience_note;
  }

  PromptArtifact a;
  a.condition = condition;
  a.template_name = tmpl.name;
  a.text = render(tmpl, bindings);
  a.content_hash = content_hash(key, a.text);
  return a;
}

std::string score_breakdown(std::span<const corpus::Question* const> questions) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    parts.push_back("the score for Question " + std::to_string(i + 1) + " is " +
                    std::to_string(questions[i]->max_points));
  }
  if (parts.size() <= 1) return parts.empty() ? std::string() : parts.front();
  if (parts.size() == 2) return parts[0] + " and " + parts[1];
  std::string out;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) out += parts[i] + ", ";
  return out + "and " + parts.back();
}

std::string question_answer_block(std::span<const corpus::Question* const> questions,
                                  std::span<const corpus::ModelAnswer* const> answers) {
  if (questions.size() != answers.size()) {
    throw PreconditionError("rubric prompt: " + std::to_string(questions.size()) + " questions but " +
                            std::to_string(answers.size()) + " model answers");
  }
  std::vector<std::string> blocks;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (answers[i]->question_id != questions[i]->id) {
      throw PreconditionError("rubric prompt: answer " + std::to_string(i + 1) + " belongs to " +
                              answers[i]->question_id + ", not " + questions[i]->id);
    }
    const std::string n = std::to_string(i + 1);
    const std::string full = std::to_string(questions[i]->max_points);
    blocks.push_back("Question " + n + ":\n\n" + questions[i]->prompt_text + "\n\nAnswer " + n + ":\n\n" +
                     answers[i]->text + "\n\nFull Score: " + full + "/" + full);
  }
  return join(blocks, "\n\n");
}

PromptArtifact build_rubric_prompt(const corpus::Course& course, std::span<const corpus::Question* const> questions,
                                   std::span<const corpus::ModelAnswer* const> answers, const PromptTemplate& tmpl,
                                   const DispatchKey& key) {
  if (questions.empty()) throw PreconditionError("rubric prompt needs at least one question");
  const std::map<std::string, std::string> bindings = {
      {"question", question_answer_block(questions, answers)},
      {"score_breakdown", score_breakdown(questions)},
      {"course_title", course.title},
      {"audience_note", course.audience_note},
  };
  PromptArtifact a;
  a.template_name = tmpl.name;
  a.text = render(tmpl, bindings);
  a.content_hash = content_hash(key, a.text);
  return a;
}

}  // namespace gradekit::prompting
