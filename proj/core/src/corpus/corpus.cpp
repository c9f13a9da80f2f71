#include "gradekit/corpus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "common/io.hpp"
#include "common/json_util.hpp"
#include "gradekit/error.hpp"

namespace gradekit::corpus {

using detail::Json;

int RubricCriterion::max_points() const {
  int best = 0;
  for (const auto& level : levels) best = std::max(best, level.points);
  return best;
}

std::string to_string(RubricOrigin origin) {
  return origin == RubricOrigin::Instructor ? "instructor" : "ai_generated";
}

namespace {

template <typename T>
const T* lookup(const std::map<std::string, std::size_t>& index, const std::vector<T>& items, const std::string& id) {
  const auto it = index.find(id);
  return it == index.end() ? nullptr : &items[it->second];
}

template <typename T>
const T& require(const T* item, const char* kind, const std::string& id) {
  if (item == nullptr) throw IntegrityError(std::string("unknown ") + kind + " \"" + id + "\"");
  return *item;
}

std::string at(const std::string& doc, std::size_t i) { return doc + "[" + std::to_string(i) + "]"; }

const Json& document_array(const Json& root, const std::string& doc) {
  if (!root.is_array()) throw ParseError(doc + ".json: top level must be an array");
  return root;
}

RubricOrigin parse_origin(const std::string& text, const std::string& where) {
  if (text == "instructor") return RubricOrigin::Instructor;
  if (text == "ai_generated") return RubricOrigin::AiGenerated;
  throw ParseError(where + ": origin must be \"instructor\" or \"ai_generated\", got \"" + text + "\"");
}

std::vector<Rubric> parse_rubrics(const Json& root, const std::string& doc, RubricOrigin default_origin) {
  std::vector<Rubric> out;
  for (std::size_t i = 0; i < document_array(root, doc).size(); ++i) {
    const Json& item = root[i];
    const std::string where = at(doc, i);
    Rubric r;
    r.question_id = detail::string_field(item, "question_id", where);
    r.origin = parse_origin(detail::optional_string_field(item, "origin", where, to_string(default_origin)), where);
    const Json& criteria = detail::field(item, "criteria", where);
    if (!criteria.is_array()) throw ParseError(where + ": criteria must be an array");
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      const std::string cw = where + ".criteria[" + std::to_string(c) + "]";
      RubricCriterion crit;
      crit.label = detail::optional_string_field(criteria[c], "label", cw);
      crit.description = detail::optional_string_field(criteria[c], "description", cw);
      const Json& levels = detail::field(criteria[c], "levels", cw);
      if (!levels.is_array()) throw ParseError(cw + ": levels must be an array");
      for (std::size_t l = 0; l < levels.size(); ++l) {
        const std::string lw = cw + ".levels[" + std::to_string(l) + "]";
        RubricLevel level;
        level.points = static_cast<int>(detail::integer_field(levels[l], "points", lw));
        level.descriptor = detail::optional_string_field(levels[l], "descriptor", lw);
        crit.levels.push_back(std::move(level));
      }
      r.criteria.push_back(std::move(crit));
    }
    out.push_back(std::move(r));
  }
  return out;
}

bool is_token(const std::string& id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](unsigned char c) { return std::isspace(c) || std::iscntrl(c); });
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

void Corpus::reindex() {
  course_index_.clear();
  question_index_.clear();
  submission_index_.clear();
  answer_index_.clear();
  instructor_rubric_index_.clear();
  ai_rubric_index_.clear();
  peer_index_.clear();
  grade_index_.clear();
  // First occurrence wins; duplicates are reported by check_corpus.
  for (std::size_t i = 0; i < courses.size(); ++i) course_index_.emplace(courses[i].id, i);
  for (std::size_t i = 0; i < questions.size(); ++i) question_index_.emplace(questions[i].id, i);
  for (std::size_t i = 0; i < submissions.size(); ++i) submission_index_.emplace(submissions[i].id, i);
  for (std::size_t i = 0; i < model_answers.size(); ++i) answer_index_.emplace(model_answers[i].question_id, i);
  for (std::size_t i = 0; i < rubrics.size(); ++i) {
    auto& index = rubrics[i].origin == RubricOrigin::Instructor ? instructor_rubric_index_ : ai_rubric_index_;
    index.emplace(rubrics[i].question_id, i);
  }
  for (std::size_t i = 0; i < peer_scores.size(); ++i) peer_index_.emplace(peer_scores[i].submission_id, i);
  for (std::size_t i = 0; i < instructor_grades.size(); ++i) {
    grade_index_.emplace(instructor_grades[i].submission_id, i);
  }
}

const Course* Corpus::find_course(const std::string& id) const { return lookup(course_index_, courses, id); }
const Question* Corpus::find_question(const std::string& id) const {
  return lookup(question_index_, questions, id);
}
const Submission* Corpus::find_submission(const std::string& id) const {
  return lookup(submission_index_, submissions, id);
}
const ModelAnswer* Corpus::find_model_answer(const std::string& question_id) const {
  return lookup(answer_index_, model_answers, question_id);
}
const Rubric* Corpus::find_rubric(const std::string& question_id, RubricOrigin origin) const {
  return lookup(origin == RubricOrigin::Instructor ? instructor_rubric_index_ : ai_rubric_index_, rubrics,
                question_id);
}
const PeerScoreSet* Corpus::find_peer_scores(const std::string& submission_id) const {
  return lookup(peer_index_, peer_scores, submission_id);
}
const InstructorGrade* Corpus::find_instructor_grade(const std::string& submission_id) const {
  return lookup(grade_index_, instructor_grades, submission_id);
}

const Course& Corpus::course(const std::string& id) const { return require(find_course(id), "course", id); }
const Question& Corpus::question(const std::string& id) const {
  return require(find_question(id), "question", id);
}
const Submission& Corpus::submission(const std::string& id) const {
  return require(find_submission(id), "submission", id);
}
const ModelAnswer& Corpus::model_answer(const std::string& question_id) const {
  return require(find_model_answer(question_id), "model answer for question", question_id);
}
const Rubric& Corpus::rubric(const std::string& question_id, RubricOrigin origin) const {
  const char* kind = origin == RubricOrigin::Instructor ? "instructor rubric for question"
                                                        : "ai_generated rubric for question";
  return require(find_rubric(question_id, origin), kind, question_id);
}

std::vector<const Question*> Corpus::questions_of(const std::string& course_id) const {
  std::vector<const Question*> out;
  for (const auto& q : questions) {
    if (q.course_id == course_id) out.push_back(&q);
  }
  return out;
}

std::vector<const Submission*> Corpus::submissions_of(const std::string& question_id) const {
  std::vector<const Submission*> out;
  for (const auto& s : submissions) {
    if (s.question_id == question_id) out.push_back(&s);
  }
  return out;
}

Corpus parse_corpus(const std::map<std::string, std::string>& documents) {
  std::map<std::string, Json> roots;
  for (const char* name : kRequiredDocuments) {
    const auto it = documents.find(name);
    if (it == documents.end()) throw Error(std::string("corpus bundle lacks the ") + name + " document");
    roots[name] = detail::parse_json(it->second, std::string(name) + ".json");
  }
  for (const char* name : kOptionalDocuments) {
    const auto it = documents.find(name);
    roots[name] = it == documents.end() ? Json::array() : detail::parse_json(it->second, std::string(name) + ".json");
  }

  Corpus c;
  const Json& courses = document_array(roots["courses"], "courses");
  for (std::size_t i = 0; i < courses.size(); ++i) {
    const std::string w = at("courses", i);
    c.courses.push_back({detail::string_field(courses[i], "id", w), detail::string_field(courses[i], "title", w),
                         detail::optional_string_field(courses[i], "audience_note", w)});
  }
  const Json& questions = document_array(roots["questions"], "questions");
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const std::string w = at("questions", i);
    Question q;
    q.id = detail::string_field(questions[i], "id", w);
    q.course_id = detail::string_field(questions[i], "course_id", w);
    q.prompt_text = detail::string_field(questions[i], "prompt_text", w);
    q.max_points = static_cast<int>(detail::integer_field(questions[i], "max_points", w));
    if (const auto g = questions[i].find("word_guidance"); g != questions[i].end() && !g->is_null()) {
      q.word_guidance = WordGuidance{static_cast<int>(detail::integer_field(*g, "min", w + ".word_guidance")),
                                     static_cast<int>(detail::integer_field(*g, "max", w + ".word_guidance"))};
    }
    c.questions.push_back(std::move(q));
  }
  c.rubrics = parse_rubrics(roots["rubrics"], "rubrics", RubricOrigin::Instructor);
  for (auto& r : parse_rubrics(roots["ai_rubrics"], "ai_rubrics", RubricOrigin::AiGenerated)) {
    c.rubrics.push_back(std::move(r));
  }
  const Json& answers = document_array(roots["model_answers"], "model_answers");
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const std::string w = at("model_answers", i);
    c.model_answers.push_back(
        {detail::string_field(answers[i], "question_id", w), detail::string_field(answers[i], "text", w)});
  }
  const Json& subs = document_array(roots["submissions"], "submissions");
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const std::string w = at("submissions", i);
    c.submissions.push_back({detail::string_field(subs[i], "id", w), detail::string_field(subs[i], "question_id", w),
                             detail::optional_string_field(subs[i], "student_alias", w),
                             detail::string_field(subs[i], "text", w)});
  }
  const Json& peers = document_array(roots["peer_scores"], "peer_scores");
  for (std::size_t i = 0; i < peers.size(); ++i) {
    const std::string w = at("peer_scores", i);
    PeerScoreSet p;
    p.submission_id = detail::string_field(peers[i], "submission_id", w);
    const Json& scores = detail::field(peers[i], "scores", w);
    if (!scores.is_array()) throw ParseError(w + ": scores must be an array");
    for (const Json& s : scores) {
      if (!s.is_number()) throw ParseError(w + ": scores must be numbers");
      p.scores.push_back(s.get<double>());
    }
    p.reviewer_participated = detail::bool_field(peers[i], "reviewer_participated", w, true);
    c.peer_scores.push_back(std::move(p));
  }
  const Json& grades = document_array(roots["instructor_grades"], "instructor_grades");
  for (std::size_t i = 0; i < grades.size(); ++i) {
    const std::string w = at("instructor_grades", i);
    c.instructor_grades.push_back(
        {detail::string_field(grades[i], "submission_id", w), detail::number_field(grades[i], "awarded", w)});
  }
  c.reindex();
  return c;
}

Corpus read_corpus_bundle(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error("corpus bundle " + dir.string() + " is not a directory");
  std::map<std::string, std::string> documents;
  for (const char* name : kRequiredDocuments) {
    const auto path = dir / (std::string(name) + ".json");
    if (!std::filesystem::exists(path, ec)) throw Error("corpus bundle lacks " + path.string());
    documents[name] = detail::read_text_file(path);
  }
  for (const char* name : kOptionalDocuments) {
    const auto path = dir / (std::string(name) + ".json");
    if (std::filesystem::exists(path, ec)) documents[name] = detail::read_text_file(path);
  }
  return parse_corpus(documents);
}

std::vector<Finding> check_corpus(const Corpus& c) {
  std::vector<Finding> out;
  auto error = [&](const std::string& subject, const std::string& msg) {
    out.push_back({Severity::Error, subject, msg});
  };
  auto warn = [&](const std::string& subject, const std::string& msg) {
    out.push_back({Severity::Warning, subject, msg});
  };

  if (c.courses.empty()) error("courses", "corpus has no courses");

  std::set<std::string> seen;
  for (const auto& course : c.courses) {
    if (!is_token(course.id)) error(course.id, "course id must be a nonempty token without whitespace");
    if (!seen.insert(course.id).second) error(course.id, "duplicate course id");
    if (blank(course.title)) error(course.id, "course title is empty");
  }

  seen.clear();
  for (const auto& q : c.questions) {
    if (!is_token(q.id)) error(q.id, "question id must be a nonempty token without whitespace");
    if (!seen.insert(q.id).second) error(q.id, "duplicate question id");
    if (c.find_course(q.course_id) == nullptr) error(q.id, "question refers to unknown course \"" + q.course_id + "\"");
    if (q.max_points < 1) error(q.id, "max_points must be at least 1");
    if (blank(q.prompt_text)) error(q.id, "question prompt_text is empty");
    if (q.word_guidance && (q.word_guidance->min < 0 || q.word_guidance->max < q.word_guidance->min)) {
      error(q.id, "word_guidance needs 0 <= min <= max");
    }
  }

  std::map<std::string, int> instructor_count;
  std::map<std::string, int> ai_count;
  for (const auto& r : c.rubrics) {
    const std::string subject = r.question_id;
    const std::string kind = to_string(r.origin) + " rubric";
    const Question* q = c.find_question(r.question_id);
    if (q == nullptr) {
      error(subject, kind + " refers to unknown question \"" + r.question_id + "\"");
      continue;
    }
    ++(r.origin == RubricOrigin::Instructor ? instructor_count : ai_count)[r.question_id];
    if (r.criteria.empty()) {
      error(subject, kind + " has no criteria");
      continue;
    }
    bool criteria_ok = true;
    for (std::size_t i = 0; i < r.criteria.size(); ++i) {
      const auto& crit = r.criteria[i];
      const std::string name = "criterion " + std::to_string(i + 1) + (crit.label.empty() ? "" : " (" + crit.label + ")");
      if (crit.levels.empty()) {
        error(subject, kind + " " + name + " has no levels");
        criteria_ok = false;
        continue;
      }
      std::set<int> points;
      for (const auto& level : crit.levels) {
        if (level.points < 0) error(subject, kind + " " + name + " has a negative level");
        if (!points.insert(level.points).second) {
          error(subject, kind + " " + name + " repeats the " + std::to_string(level.points) + "-point level");
        }
      }
      if (crit.max_points() < 1) {
        error(subject, kind + " " + name + " has no level worth at least 1 point");
        criteria_ok = false;
      }
    }
    if (criteria_ok) {
      const int sum = question_max_points(r);
      if (sum != q->max_points) {
        error(subject, kind + " criteria sum to " + std::to_string(sum) + " but question " + q->id + " has max_points " +
                           std::to_string(q->max_points));
      }
    }
  }
  for (const auto& q : c.questions) {
    const int n = instructor_count[q.id];
    if (n == 0) error(q.id, "question has no instructor rubric");
    if (n > 1) error(q.id, "question has " + std::to_string(n) + " instructor rubrics");
    if (ai_count[q.id] > 1) error(q.id, "question has " + std::to_string(ai_count[q.id]) + " ai_generated rubrics");
  }

  std::map<std::string, int> answer_count;
  for (const auto& a : c.model_answers) {
    if (c.find_question(a.question_id) == nullptr) {
      error(a.question_id, "model answer refers to unknown question \"" + a.question_id + "\"");
      continue;
    }
    ++answer_count[a.question_id];
    if (blank(a.text)) error(a.question_id, "model answer text is empty");
  }
  for (const auto& q : c.questions) {
    const int n = answer_count[q.id];
    if (n == 0) error(q.id, "question has no model answer");
    if (n > 1) error(q.id, "question has " + std::to_string(n) + " model answers");
  }

  seen.clear();
  for (const auto& s : c.submissions) {
    if (!is_token(s.id)) error(s.id, "submission id must be a nonempty token without whitespace");
    if (!seen.insert(s.id).second) error(s.id, "duplicate submission id");
    const Question* q = c.find_question(s.question_id);
    if (q == nullptr) {
      error(s.id, "submission refers to unknown question \"" + s.question_id + "\"");
      continue;
    }
    if (blank(s.text)) error(s.id, "submission text is empty");
    if (q->word_guidance) {
      const std::size_t words = word_count(s.text);
      if (words < static_cast<std::size_t>(q->word_guidance->min) ||
          words > static_cast<std::size_t>(q->word_guidance->max)) {
        warn(s.id, "answer has " + std::to_string(words) + " words, guidance for " + q->id + " is " +
                       std::to_string(q->word_guidance->min) + "-" + std::to_string(q->word_guidance->max));
      }
    }
  }

  auto max_for = [&](const std::string& submission_id) -> const Question* {
    const Submission* s = c.find_submission(submission_id);
    return s == nullptr ? nullptr : c.find_question(s->question_id);
  };

  seen.clear();
  for (const auto& p : c.peer_scores) {
    const Question* q = max_for(p.submission_id);
    if (q == nullptr) {
      error(p.submission_id, "peer scores refer to unknown submission \"" + p.submission_id + "\"");
      continue;
    }
    if (!seen.insert(p.submission_id).second) error(p.submission_id, "duplicate peer score set");
    if (p.scores.empty() || p.scores.size() > 8) error(p.submission_id, "peer score set must hold 1 to 8 scores");
    for (double s : p.scores) {
      if (!std::isfinite(s) || s < 0.0 || s > q->max_points) {
        std::ostringstream msg;
        msg << "peer score " << s << " outside [0, " << q->max_points << "]";
        error(p.submission_id, msg.str());
      }
    }
  }

  seen.clear();
  for (const auto& g : c.instructor_grades) {
    const Question* q = max_for(g.submission_id);
    if (q == nullptr) {
      error(g.submission_id, "instructor grade refers to unknown submission \"" + g.submission_id + "\"");
      continue;
    }
    if (!seen.insert(g.submission_id).second) error(g.submission_id, "duplicate instructor grade");
    if (!std::isfinite(g.awarded) || g.awarded < 0.0 || g.awarded > q->max_points) {
      std::ostringstream msg;
      msg << "instructor grade " << g.awarded << " outside [0, " << q->max_points << "]";
      error(g.submission_id, msg.str());
    }
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  Corpus c = read_corpus_bundle(dir);
  const auto findings = check_corpus(c);
  std::size_t errors = 0;
  const Finding* first = nullptr;
  for (const auto& f : findings) {
    if (f.severity != Severity::Error) continue;
    if (first == nullptr) first = &f;
    ++errors;
  }
  if (first != nullptr) {
    std::string msg = first->subject + ": " + first->message;
    if (errors > 1) msg += " (and " + std::to_string(errors - 1) + " more integrity errors)";
    throw IntegrityError(msg);
  }
  return c;
}

int question_max_points(const Rubric& rubric) {
  int sum = 0;
  for (const auto& crit : rubric.criteria) sum += crit.max_points();
  return sum;
}

double normalize_score(double awarded, double max) {
  if (!(max >= 1.0)) throw DomainError("normalize_score: max must be at least 1");
  if (!(awarded >= 0.0 && awarded <= max)) throw DomainError("normalize_score: awarded outside [0, max]");
  return 100.0 * awarded / max;
}

std::string rubrics_to_json(std::span<const Rubric> rubrics) {
  detail::OrderedJson root = detail::OrderedJson::array();
  for (const auto& r : rubrics) {
    detail::OrderedJson item;
    item["question_id"] = r.question_id;
    item["origin"] = to_string(r.origin);
    item["criteria"] = detail::OrderedJson::array();
    for (const auto& crit : r.criteria) {
      detail::OrderedJson cj;
      cj["label"] = crit.label;
      cj["description"] = crit.description;
      cj["levels"] = detail::OrderedJson::array();
      for (const auto& level : crit.levels) {
        detail::OrderedJson lj;
        lj["points"] = level.points;
        lj["descriptor"] = level.descriptor;
        cj["levels"].push_back(std::move(lj));
      }
      item["criteria"].push_back(std::move(cj));
    }
    root.push_back(std::move(item));
  }
  return root.dump(2) + "\n";
}

std::size_t word_count(const std::string& text) {
  std::size_t words = 0;
  bool in_word = false;
  for (unsigned char ch : text) {
    const bool space = std::isspace(ch) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

}  // namespace gradekit::corpus
