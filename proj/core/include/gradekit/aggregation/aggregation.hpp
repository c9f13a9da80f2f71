#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradekit/corpus/corpus.hpp"
#include "gradekit/prompting/prompting.hpp"
#include "gradekit/statkit/matrix.hpp"

namespace gradekit::aggregation {

/// How to take the median of an even number of peer scores.
enum class EvenMedian { MeanOfMiddle, Lower, Upper };

std::string to_string(EvenMedian m);
std::optional<EvenMedian> parse_even_median(std::string_view text);

inline constexpr double kNonParticipationFactor = 0.8;

/// Median of the peer scores (even counts per `even`), times 0.8 when the
/// learner skipped reviewing, clamped to [0, max]. DomainError on an empty set.
double peer_final_grade(const corpus::PeerScoreSet& peers, double max, EvenMedian even = EvenMedian::MeanOfMiddle);

enum class Provenance { Instructor, Peer, Llm };

std::string to_string(Provenance p);

inline constexpr const char* kInstructor = "instructor";
inline constexpr const char* kPeerMedian = "peer_median";

/// "llm_p1", "llm_p2", "llm_p3".
std::string rater_id(prompting::PromptCondition c);

/// instructor, peer_median, llm_p1, llm_p2, llm_p3.
std::vector<std::string> default_rater_ids();

/// One rater's score for one submission.
struct GradeRecord {
  std::string submission_id;
  std::string rater_id;
  Provenance provenance = Provenance::Instructor;
  double awarded = 0.0;
  int max = 0;
  std::vector<std::string> flags;
  std::string prompt_hash;  // LLM records only
};

std::vector<GradeRecord> instructor_records(const corpus::Corpus& corpus);
std::vector<GradeRecord> peer_records(const corpus::Corpus& corpus, EvenMedian even = EvenMedian::MeanOfMiddle);

/// Complete items x raters table of normalized percentages.
struct GradeMatrix {
  std::vector<std::string> item_ids;
  std::vector<std::string> rater_ids;
  std::vector<double> values;  // row-major percentages, items x raters
  std::vector<double> points;  // same layout, raw awarded points
  std::vector<int> max_points;                 // per item
  std::vector<std::string> course_of_item;     // per item
  std::vector<std::string> question_of_item;   // per item
  std::vector<std::string> warnings;           // one per dropped item

  std::size_t rows() const { return item_ids.size(); }
  std::size_t cols() const { return rater_ids.size(); }
  double at(std::size_t item, std::size_t rater) const { return values[item * rater_ids.size() + rater]; }
  statkit::MatrixView view() const { return statkit::MatrixView(values, rows(), cols()); }
  /// Index of a rater; DomainError when absent.
  std::size_t rater_index(const std::string& rater) const;
  std::vector<double> column(std::size_t rater) const;
  std::vector<double> point_column(std::size_t rater) const;
};

/// Normalizes and arranges records into a matrix. Items missing any of
/// `raters` are dropped with a warning. Rows follow course order, then
/// question order, then submission id. An empty `raters` uses the default
/// raters that appear in the records.
/// IntegrityError on duplicate (item, rater) records, unknown submissions,
/// a record max that disagrees with the question, or fewer than 2 complete items.
GradeMatrix build_grade_matrix(std::span<const GradeRecord> records, const corpus::Corpus& corpus,
                               std::vector<std::string> raters = {});

struct DifferenceSummary {
  std::string other;
  double mean_pct = 0.0;       // percentage points
  double sd_pct = 0.0;         // sample SD, percentage points
  double mean_fraction = 0.0;  // same on the 0..1 scale
  double sd_fraction = 0.0;
};

/// baseline minus each other rater, per item, for one course.
struct DifferenceSeries {
  std::string course_id;
  std::string baseline;
  std::vector<std::string> item_ids;
  std::vector<std::string> others;
  std::vector<std::vector<double>> differences;  // [other][item], percentage points
  std::vector<DifferenceSummary> summaries;      // one per other
};

/// One series per course, in order of first appearance in the matrix.
std::vector<DifferenceSeries> difference_series(const GradeMatrix& matrix, const std::string& baseline,
                                                const std::vector<std::string>& others);

}  // namespace gradekit::aggregation
