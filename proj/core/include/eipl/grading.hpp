#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eipl/codegen.hpp"
#include "eipl/domain.hpp"
#include "eipl/execution.hpp"

namespace eipl {

class CompletionCache;

enum class GradingPolicy { OneAttempt, Robustness };

std::string_view to_string(GradingPolicy policy);
/// Accepts "one-attempt"/"one_attempt" and "robustness".
GradingPolicy parse_grading_policy(std::string_view text);

struct GradedVariant {
  GeneratedVariant variant;
  /// Empty case list with fraction 0 when extraction failed.
  SuiteResult suite;

  friend bool operator==(const GradedVariant&, const GradedVariant&) = default;
};

struct CaseSummary {
  int case_index = 0;
  CaseStatus status = CaseStatus::Pass;

  friend bool operator==(const CaseSummary&, const CaseSummary&) = default;
};

/// What the student sees after an attempt: the first variant's code and its
/// per-case statuses. Never carries the reference solution.
struct FeedbackPayload {
  std::string shown_code;
  std::vector<CaseSummary> case_summaries;
  std::string message;

  friend bool operator==(const FeedbackPayload&, const FeedbackPayload&) = default;
};

struct GradingOutcome {
  ResponseRef response_ref;
  std::string response_text;
  GradingPolicy policy = GradingPolicy::OneAttempt;
  std::string prompt_version;
  std::string model_id;
  double temperature = 0.0;
  std::vector<GradedVariant> variants;
  bool correct = false;
  double partial_score = 0.0;
  FeedbackPayload feedback;

  friend bool operator==(const GradingOutcome&, const GradingOutcome&) = default;
};

struct GradingSettings {
  std::string model_id = "gpt-4o";
  double temperature_one_attempt = 0.0;
  double temperature_robustness = 0.7;
  int n_variants = 5;
  int word_limit = 10;
  int max_attempts = 3;
  PromptTemplate prompt = default_prompt_template();
  GenerationOptions generation;
};

/// Injected collaborators. `cache` may be null.
struct GradingContext {
  GenerationClient& client;
  ExecutionBackend& backend;
  CompletionCache* cache = nullptr;
  GradingSettings settings;
};

/// One generated function; correct iff it passes every case, partial score
/// is the fraction of cases passed. Throws InvalidArgumentError for an
/// invalid response and propagates generation errors.
GradingOutcome grade_one_attempt(const StudentResponse& response, const Question& question, GradingContext& ctx);

/// n_variants generated functions; correct iff every variant passes every
/// case, partial score is the fraction of variants that pass every case.
GradingOutcome grade_robustness(const StudentResponse& response, const Question& question, GradingContext& ctx);

GradingOutcome grade(GradingPolicy policy, const StudentResponse& response, const Question& question,
                     GradingContext& ctx);

struct AttemptsResult {
  double final_score = 0.0;
  std::vector<GradingOutcome> outcomes;
  /// Submissions rejected by validation; they do not use up an attempt.
  int invalid_submissions = 0;
};

/// Grades the attempts of one student on one question in order, stopping
/// after the first correct outcome. The final score is the best partial
/// score. Throws AttemptLimitExceeded when more than max_attempts valid
/// responses are supplied.
AttemptsResult grade_with_attempts(const std::vector<StudentResponse>& responses, const Question& question,
                                   GradingPolicy policy, GradingContext& ctx);

// ---------------------------------------------------------------------------
// Grading records (JSONL)

/// Record written for one outcome: every GradingOutcome field plus
/// per-variant code_hash and a graded_at timestamp.
Json grading_record(const GradingOutcome& outcome, UtcTime graded_at);
GradingOutcome outcome_from_record(const Json& record);

}  // namespace eipl
