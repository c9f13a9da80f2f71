#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gradekit/corpus/corpus.hpp"
#include "gradekit/error.hpp"
#include "gradekit/prompting/prompting.hpp"

namespace gradekit::grader {

/// Replay backend found no cached completion for a prompt hash.
class CacheMissError : public Error {
 public:
  explicit CacheMissError(const std::string& hash)
      : Error("replay cache has no completion for prompt " + hash), hash_(hash) {}
  const std::string& hash() const noexcept { return hash_; }

 private:
  std::string hash_;
};

/// Network failure, non-success status, or an unusable reply.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Any failure while grading one submission, tagged with where it happened.
class GradingError : public Error {
 public:
  GradingError(const std::string& submission_id, prompting::PromptCondition condition, const std::string& what)
      : Error(submission_id + " [" + prompting::to_string(condition) + "]: " + what),
        submission_id_(submission_id),
        condition_(condition) {}
  const std::string& submission_id() const noexcept { return submission_id_; }
  prompting::PromptCondition condition() const noexcept { return condition_; }

 private:
  std::string submission_id_;
  prompting::PromptCondition condition_;
};

enum class BackendKind { HttpChat, Replay };

struct BackendConfig {
  BackendKind kind = BackendKind::Replay;
  std::string backend_id = "chat-completions";  // part of the cache key, shared by both kinds
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model_id = "gpt-4";
  double temperature = 0.0;
  int max_retries = 4;
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds initial_backoff{1000};  // doubled after every failed attempt
  std::string credential_env = "OPENAI_API_KEY";
  std::filesystem::path cache_dir;

  prompting::DispatchKey key() const { return {backend_id, model_id, temperature}; }
  /// Throws PreconditionError when the kind's requirements are unmet.
  void validate() const;
};

struct RawResponse {
  std::string prompt_hash;
  std::string text;
  std::string retrieved_at;  // UTC, "YYYY-MM-DDTHH:MM:SSZ"
  std::string model_id;
  double temperature = 0.0;
};

/// Append-only JSON-lines store of completions keyed by prompt hash, kept in
/// `<dir>/cache.jsonl`. The first record for a hash wins. Lookups and
/// appends are safe from multiple threads.
class ResponseCache {
 public:
  static constexpr const char* kFileName = "cache.jsonl";

  /// Loads existing records; a malformed line is a ParseError with its line.
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<RawResponse> find(const std::string& prompt_hash) const;
  /// Persists and indexes `r` unless its hash is already present. Returns
  /// whether a record was written.
  bool put(const RawResponse& r);
  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, RawResponse> records_;
  std::ofstream out_;
};

/// Wall-clock UTC timestamp in the cache format.
std::string utc_timestamp_now();

/// Sends prompts to the configured backend, cache first.
class Dispatcher {
 public:
  Dispatcher(BackendConfig config, ResponseCache& cache);

  RawResponse dispatch(const prompting::PromptArtifact& artifact);
  const BackendConfig& config() const noexcept { return config_; }
  /// HTTP requests actually sent, retries included.
  std::size_t network_requests() const noexcept { return requests_.load(); }

 private:
  std::string request_completion(const std::string& prompt);

  BackendConfig config_;
  ResponseCache& cache_;
  std::atomic<std::size_t> requests_{0};
};

/// One-shot form of Dispatcher::dispatch.
RawResponse dispatch(const prompting::PromptArtifact& artifact, const BackendConfig& config, ResponseCache& cache);

struct GradeFlags {
  bool non_integer_awarded = false;
  bool max_mismatch_repaired = false;

  /// Set flag names, e.g. {"max_mismatch_repaired", "non_integer_awarded"}.
  std::vector<std::string> names() const;
};

struct ExtractedGrade {
  double awarded = 0.0;
  int max = 0;
  GradeFlags flags;
  std::string rationale;  // completion without the grade token, trimmed
  double raw_numerator = 0.0;
  double raw_denominator = 0.0;
};

/// Reads the authoritative "A/B" grade: right after the last "Grade:" marker
/// if that is where a fraction sits, otherwise at the very start of the text.
/// A denominator other than expected_max is rescaled and flagged.
/// ParseError when no fraction is found; DomainError for negative grades,
/// zero denominators, or grades above the maximum.
ExtractedGrade extract_grade(std::string_view text, int expected_max);

/// Builds an ai_generated rubric from "- label (N points): description"
/// list items. ParseError when none are found; IntegrityError when the
/// points do not add up to the question's maximum.
corpus::Rubric parse_ai_rubric(std::string_view text, const corpus::Question& question);

/// Splits a course-level rubric completion at its "Rubric for [XYZ ]Question N:"
/// headings. Keys are the 1-based question numbers.
std::map<int, std::string> split_rubric_sections(std::string_view text);

struct GradeResult {
  std::string submission_id;
  std::string question_id;
  prompting::PromptCondition condition = prompting::PromptCondition::AnswerOnly;
  double awarded = 0.0;
  int max = 0;
  std::string rationale;
  GradeFlags flags;
  RawResponse raw;
};

/// The prompt grade_submission sends: picks the condition's rubric (the
/// instructor's for condition 2, the AI-generated one for condition 3) and
/// the course context. PreconditionError when a condition 3 rubric is missing.
prompting::PromptArtifact grading_prompt(const corpus::Submission& submission, const corpus::Question& question,
                                         prompting::PromptCondition condition, const corpus::Corpus& corpus,
                                         const prompting::TemplateSet& templates, const prompting::DispatchKey& key);

/// grading_prompt -> dispatch -> extract_grade. Every failure is
/// rethrown as GradingError naming the submission and condition.
GradeResult grade_submission(const corpus::Submission& submission, const corpus::Question& question,
                             prompting::PromptCondition condition, const corpus::Corpus& corpus,
                             const prompting::TemplateSet& templates, Dispatcher& dispatcher);

}  // namespace gradekit::grader
