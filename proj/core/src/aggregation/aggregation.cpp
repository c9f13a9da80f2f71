#include "gradekit/aggregation/aggregation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "gradekit/error.hpp"
#include "gradekit/statkit/descriptive.hpp"

namespace gradekit::aggregation {

std::string to_string(EvenMedian m) {
  switch (m) {
    case EvenMedian::MeanOfMiddle: return "mean_of_middle";
    case EvenMedian::Lower: return "lower";
    case EvenMedian::Upper: return "upper";
  }
  return "unknown";
}

std::optional<EvenMedian> parse_even_median(std::string_view text) {
  for (auto m : {EvenMedian::MeanOfMiddle, EvenMedian::Lower, EvenMedian::Upper}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

double peer_final_grade(const corpus::PeerScoreSet& peers, double max, EvenMedian even) {
  if (peers.scores.empty()) throw DomainError("peer score set for " + peers.submission_id + " is empty");
  std::vector<double> s = peers.scores;
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  double median = s[n / 2];
  if (n % 2 == 0) {
    switch (even) {
      case EvenMedian::MeanOfMiddle: median = (s[n / 2 - 1] + s[n / 2]) / 2.0; break;
      case EvenMedian::Lower: median = s[n / 2 - 1]; break;
      case EvenMedian::Upper: median = s[n / 2]; break;
    }
  }
  if (!peers.reviewer_participated) median *= kNonParticipationFactor;
  return std::clamp(median, 0.0, max);
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Instructor: return "instructor";
    case Provenance::Peer: return "peer";
    case Provenance::Llm: return "llm";
  }
  return "unknown";
}

std::string rater_id(prompting::PromptCondition c) { return "llm_p" + std::to_string(prompting::condition_number(c)); }

std::vector<std::string> default_rater_ids() { return {kInstructor, kPeerMedian, "llm_p1", "llm_p2", "llm_p3"}; }

std::vector<GradeRecord> instructor_records(const corpus::Corpus& corpus) {
  std::vector<GradeRecord> out;
  for (const auto& g : corpus.instructor_grades) {
    const auto& q = corpus.question(corpus.submission(g.submission_id).question_id);
    out.push_back({g.submission_id, kInstructor, Provenance::Instructor, g.awarded, q.max_points, {}, {}});
  }
  return out;
}

std::vector<GradeRecord> peer_records(const corpus::Corpus& corpus, EvenMedian even) {
  std::vector<GradeRecord> out;
  for (const auto& p : corpus.peer_scores) {
    const auto& q = corpus.question(corpus.submission(p.submission_id).question_id);
    GradeRecord r{p.submission_id, kPeerMedian, Provenance::Peer, peer_final_grade(p, q.max_points, even),
                  q.max_points, {}, {}};
    if (!p.reviewer_participated) r.flags.emplace_back("non_participation_penalty");
    out.push_back(std::move(r));
  }
  return out;
}

std::size_t GradeMatrix::rater_index(const std::string& rater) const {
  const auto it = std::find(rater_ids.begin(), rater_ids.end(), rater);
  if (it == rater_ids.end()) throw DomainError("grade matrix has no rater \"" + rater + "\"");
  return static_cast<std::size_t>(it - rater_ids.begin());
}

std::vector<double> GradeMatrix::column(std::size_t rater) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = values[i * cols() + rater];
  return out;
}

std::vector<double> GradeMatrix::point_column(std::size_t rater) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = points[i * cols() + rater];
  return out;
}

GradeMatrix build_grade_matrix(std::span<const GradeRecord> records, const corpus::Corpus& corpus,
                               std::vector<std::string> raters) {
  if (raters.empty()) {
    std::set<std::string> present;
    for (const auto& r : records) present.insert(r.rater_id);
    for (const auto& id : default_rater_ids()) {
      if (present.count(id) != 0) raters.push_back(id);
    }
    for (const auto& r : records) {
      if (std::find(raters.begin(), raters.end(), r.rater_id) == raters.end()) raters.push_back(r.rater_id);
    }
  }
  std::map<std::string, std::size_t> rater_pos;
  for (std::size_t j = 0; j < raters.size(); ++j) {
    if (!rater_pos.emplace(raters[j], j).second) throw DomainError("rater \"" + raters[j] + "\" listed twice");
  }
  if (raters.size() < 2) throw IntegrityError("grade matrix needs at least 2 raters");

  // submission id -> per-rater record
  std::map<std::string, std::vector<const GradeRecord*>> cells;
  for (const auto& r : records) {
    const corpus::Submission* s = corpus.find_submission(r.submission_id);
    if (s == nullptr) throw IntegrityError("grade record for unknown submission \"" + r.submission_id + "\"");
    const auto& q = corpus.question(s->question_id);
    if (r.max != q.max_points) {
      throw IntegrityError("grade record " + r.submission_id + "/" + r.rater_id + " has max " + std::to_string(r.max) +
                           " but question " + q.id + " has max_points " + std::to_string(q.max_points));
    }
    auto& row = cells[r.submission_id];
    row.resize(raters.size(), nullptr);
    const auto pos = rater_pos.find(r.rater_id);
    if (pos == rater_pos.end()) continue;
    if (row[pos->second] != nullptr) {
      throw IntegrityError("duplicate grade records for item " + r.submission_id + " and rater " + r.rater_id);
    }
    row[pos->second] = &r;
  }

  std::map<std::string, std::size_t> course_rank;
  for (std::size_t i = 0; i < corpus.courses.size(); ++i) course_rank.emplace(corpus.courses[i].id, i);
  std::map<std::string, std::size_t> question_rank;
  for (std::size_t i = 0; i < corpus.questions.size(); ++i) question_rank.emplace(corpus.questions[i].id, i);

  struct Item {
    std::size_t course;
    std::size_t question;
    std::string id;
  };
  std::vector<Item> items;
  for (const auto& [id, row] : cells) {
    const auto& q = corpus.question(corpus.submission(id).question_id);
    items.push_back({course_rank.at(q.course_id), question_rank.at(q.id), id});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(a.course, a.question, a.id) < std::tie(b.course, b.question, b.id);
  });

  GradeMatrix m;
  m.rater_ids = raters;
  for (const auto& item : items) {
    const auto& row = cells.at(item.id);
    std::vector<std::string> missing;
    for (std::size_t j = 0; j < raters.size(); ++j) {
      if (row[j] == nullptr) missing.push_back(raters[j]);
    }
    if (!missing.empty()) {
      std::string msg = "dropped item " + item.id + ": no grade from";
      for (const auto& r : missing) msg += " " + r;
      m.warnings.push_back(std::move(msg));
      continue;
    }
    const auto& q = corpus.question(corpus.submission(item.id).question_id);
    m.item_ids.push_back(item.id);
    m.max_points.push_back(q.max_points);
    m.course_of_item.push_back(q.course_id);
    m.question_of_item.push_back(q.id);
    for (std::size_t j = 0; j < raters.size(); ++j) {
      m.points.push_back(row[j]->awarded);
      m.values.push_back(corpus::normalize_score(row[j]->awarded, q.max_points));
    }
  }
  if (m.rows() < 2) {
    throw IntegrityError("grade matrix needs at least 2 complete items, found " + std::to_string(m.rows()));
  }
  return m;
}

std::vector<DifferenceSeries> difference_series(const GradeMatrix& matrix, const std::string& baseline,
                                                const std::vector<std::string>& others) {
  const std::size_t base = matrix.rater_index(baseline);
  std::vector<std::size_t> other_idx;
  for (const auto& o : others) other_idx.push_back(matrix.rater_index(o));

  std::vector<DifferenceSeries> out;
  std::map<std::string, std::size_t> by_course;
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const std::string& course = matrix.course_of_item[i];
    auto [it, inserted] = by_course.emplace(course, out.size());
    if (inserted) {
      DifferenceSeries s;
      s.course_id = course;
      s.baseline = baseline;
      s.others = others;
      s.differences.resize(others.size());
      out.push_back(std::move(s));
    }
    auto& s = out[it->second];
    s.item_ids.push_back(matrix.item_ids[i]);
    for (std::size_t k = 0; k < other_idx.size(); ++k) {
      s.differences[k].push_back(matrix.at(i, base) - matrix.at(i, other_idx[k]));
    }
  }
  for (auto& s : out) {
    for (std::size_t k = 0; k < others.size(); ++k) {
      DifferenceSummary sum;
      sum.other = others[k];
      sum.mean_pct = statkit::mean(s.differences[k]);
      sum.sd_pct = statkit::sample_sd(s.differences[k]);
      sum.mean_fraction = sum.mean_pct / 100.0;
      sum.sd_fraction = sum.sd_pct / 100.0;
      s.summaries.push_back(sum);
    }
  }
  return out;
}

}  // namespace gradekit::aggregation
