#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gradekit::corpus {

struct Course {
  std::string id;
  std::string title;
  std::string audience_note;  // course category and audience, quoted in rubric-generation prompts
};

struct WordGuidance {
  int min = 0;
  int max = 0;
};

struct Question {
  std::string id;
  std::string course_id;
  std::string prompt_text;
  int max_points = 0;
  std::optional<WordGuidance> word_guidance;
};

struct RubricLevel {
  int points = 0;
  std::string descriptor;
};

struct RubricCriterion {
  std::string label;
  std::string description;
  std::vector<RubricLevel> levels;  // document order is kept for rendering

  int max_points() const;
};

enum class RubricOrigin { Instructor, AiGenerated };

std::string to_string(RubricOrigin origin);

struct Rubric {
  std::string question_id;
  std::vector<RubricCriterion> criteria;
  RubricOrigin origin = RubricOrigin::Instructor;
};

struct ModelAnswer {
  std::string question_id;
  std::string text;
};

struct Submission {
  std::string id;
  std::string question_id;
  std::string student_alias;
  std::string text;
};

/// Raw peer-review scores for one submission.
struct PeerScoreSet {
  std::string submission_id;
  std::vector<double> scores;
  bool reviewer_participated = true;
};

struct InstructorGrade {
  std::string submission_id;
  double awarded = 0.0;
};

/// Immutable after loading. Collections keep bundle document order.
class Corpus {
 public:
  std::vector<Course> courses;
  std::vector<Question> questions;
  std::vector<Rubric> rubrics;  // instructor and AI-generated together
  std::vector<ModelAnswer> model_answers;
  std::vector<Submission> submissions;
  std::vector<PeerScoreSet> peer_scores;
  std::vector<InstructorGrade> instructor_grades;

  /// Rebuilds the id lookups; call after editing the collections.
  void reindex();

  const Course* find_course(const std::string& id) const;
  const Question* find_question(const std::string& id) const;
  const Submission* find_submission(const std::string& id) const;
  const ModelAnswer* find_model_answer(const std::string& question_id) const;
  const Rubric* find_rubric(const std::string& question_id, RubricOrigin origin) const;
  const PeerScoreSet* find_peer_scores(const std::string& submission_id) const;
  const InstructorGrade* find_instructor_grade(const std::string& submission_id) const;

  // Throwing variants for validated corpora; IntegrityError names the id.
  const Course& course(const std::string& id) const;
  const Question& question(const std::string& id) const;
  const Submission& submission(const std::string& id) const;
  const ModelAnswer& model_answer(const std::string& question_id) const;
  const Rubric& rubric(const std::string& question_id, RubricOrigin origin) const;

  std::vector<const Question*> questions_of(const std::string& course_id) const;
  std::vector<const Submission*> submissions_of(const std::string& question_id) const;

 private:
  std::map<std::string, std::size_t> course_index_;
  std::map<std::string, std::size_t> question_index_;
  std::map<std::string, std::size_t> submission_index_;
  std::map<std::string, std::size_t> answer_index_;
  std::map<std::string, std::size_t> instructor_rubric_index_;
  std::map<std::string, std::size_t> ai_rubric_index_;
  std::map<std::string, std::size_t> peer_index_;
  std::map<std::string, std::size_t> grade_index_;
};

enum class Severity { Error, Warning };

struct Finding {
  Severity severity = Severity::Error;
  std::string subject;  // offending id, or the document name
  std::string message;
};

/// Bundle document names (without the .json suffix).
inline constexpr const char* kRequiredDocuments[] = {"courses", "questions", "rubrics", "model_answers",
                                                     "submissions"};
inline constexpr const char* kOptionalDocuments[] = {"peer_scores", "instructor_grades", "ai_rubrics"};

/// Parses document texts (name -> JSON text) without checking integrity.
/// Missing optional documents are treated as empty. Throws ParseError with
/// the document name and line/column.
Corpus parse_corpus(const std::map<std::string, std::string>& documents);

/// Reads every `<name>.json` in `dir`. Throws ParseError, or Error when the
/// directory or a required document is missing.
Corpus read_corpus_bundle(const std::filesystem::path& dir);

/// Every integrity violation (Severity::Error) and lint (Severity::Warning).
std::vector<Finding> check_corpus(const Corpus& corpus);

/// read_corpus_bundle + check_corpus; throws IntegrityError on the first
/// error-level finding.
Corpus load_corpus(const std::filesystem::path& dir);

/// Sum over criteria of the largest level points.
int question_max_points(const Rubric& rubric);

/// 100 * awarded / max. DomainError when awarded lies outside [0, max] or max < 1.
double normalize_score(double awarded, double max);

/// JSON text for a rubric list in the bundle's rubric document layout.
std::string rubrics_to_json(std::span<const Rubric> rubrics);

/// Whitespace-separated word count, as used by the word-guidance lint.
std::size_t word_count(const std::string& text);

}  // namespace gradekit::corpus
