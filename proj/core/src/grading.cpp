#include "eipl/grading.hpp"

#include <algorithm>
#include <cmath>

#include "eipl/completion_cache.hpp"
#include "eipl/errors.hpp"
#include "eipl/hashing.hpp"
#include "eipl/validation.hpp"

namespace eipl {

namespace {

std::string count_phrase(int n, std::string_view noun) {
  return std::to_string(n) + " " + std::string(noun) + (n == 1 ? "" : "s");
}

std::vector<GradedVariant> generate_and_run(const StudentResponse& response, const Question& question,
                                            GradingContext& ctx, int n_variants, double temperature) {
  const ValidationResult validation =
      validate_function_name(response.text, ctx.settings.word_limit, question.subject_language);
  if (!validation.valid) {
    throw InvalidArgumentError("response '" + response.text + "' is not gradable: " +
                               resubmission_message(validation, ctx.settings.word_limit));
  }
  if (question.test_suite.empty()) throw InvalidArgumentError("question '" + question.id + "' has no test cases");

  GenerationRequest request;
  request.question_id = question.id;
  request.function_name = response.text;
  request.prompt = build_prompt(question, response.text, ctx.settings.prompt);
  request.prompt_version = ctx.settings.prompt.version;
  request.n_variants = n_variants;
  request.temperature = temperature;
  request.model_id = ctx.settings.model_id;

  std::vector<GradedVariant> graded;
  for (GeneratedVariant& variant : generate_variants(request, ctx.client, ctx.cache, ctx.settings.generation)) {
    SuiteResult suite;
    if (variant.extraction_error.empty()) {
      suite = run_suite(variant.code, response.text, question.test_suite, ctx.backend);
    }
    suite.variant_index = variant.index;
    graded.push_back({std::move(variant), std::move(suite)});
  }
  return graded;
}

GradingOutcome make_outcome(const StudentResponse& response, GradingPolicy policy, const GradingContext& ctx,
                            double temperature, std::vector<GradedVariant> variants) {
  GradingOutcome outcome;
  outcome.response_ref = response.ref();
  outcome.response_text = response.text;
  outcome.policy = policy;
  outcome.prompt_version = ctx.settings.prompt.version;
  outcome.model_id = ctx.settings.model_id;
  outcome.temperature = temperature;
  outcome.variants = std::move(variants);

  const GradedVariant& first = outcome.variants.front();
  outcome.feedback.shown_code = first.variant.code;
  for (const CaseResult& c : first.suite.case_results) outcome.feedback.case_summaries.push_back({c.case_index, c.status});
  return outcome;
}

}  // namespace

std::string_view to_string(GradingPolicy policy) {
  return policy == GradingPolicy::OneAttempt ? "one-attempt" : "robustness";
}

GradingPolicy parse_grading_policy(std::string_view text) {
  if (text == "one-attempt" || text == "one_attempt" || text == "OneAttempt") return GradingPolicy::OneAttempt;
  if (text == "robustness" || text == "Robustness") return GradingPolicy::Robustness;
  throw ParseError("unknown grading policy '" + std::string(text) + "'");
}

GradingOutcome grade_one_attempt(const StudentResponse& response, const Question& question, GradingContext& ctx) {
  const double temperature = ctx.settings.temperature_one_attempt;
  GradingOutcome outcome = make_outcome(response, GradingPolicy::OneAttempt, ctx, temperature,
                                        generate_and_run(response, question, ctx, 1, temperature));
  const GradedVariant& only = outcome.variants.front();
  if (!only.variant.extraction_error.empty()) {
    outcome.correct = false;
    outcome.partial_score = 0.0;
    outcome.feedback.message =
        "No runnable code was produced from your function name (" + only.variant.extraction_error + ").";
    return outcome;
  }
  outcome.correct = only.suite.passed_all;
  outcome.partial_score = only.suite.fraction_passed;
  const int total = static_cast<int>(only.suite.case_results.size());
  const int passed = static_cast<int>(std::lround(only.suite.fraction_passed * total));
  if (outcome.correct) {
    outcome.feedback.message = "Correct: the generated function passed all " + count_phrase(total, "test case") + ".";
  } else {
    outcome.feedback.message = "Incorrect: the generated function passed " + std::to_string(passed) + " of " +
                               count_phrase(total, "test case") + ".";
  }
  return outcome;
}

GradingOutcome grade_robustness(const StudentResponse& response, const Question& question, GradingContext& ctx) {
  const double temperature = ctx.settings.temperature_robustness;
  const int n = ctx.settings.n_variants;
  GradingOutcome outcome = make_outcome(response, GradingPolicy::Robustness, ctx, temperature,
                                        generate_and_run(response, question, ctx, n, temperature));
  const int passing = static_cast<int>(std::count_if(outcome.variants.begin(), outcome.variants.end(),
                                                     [](const GradedVariant& v) { return v.suite.passed_all; }));
  const int no_code = static_cast<int>(std::count_if(outcome.variants.begin(), outcome.variants.end(), [](const GradedVariant& v) {
    return !v.variant.extraction_error.empty();
  }));
  outcome.correct = passing == n;
  outcome.partial_score = static_cast<double>(passing) / static_cast<double>(n);
  outcome.feedback.message = (outcome.correct ? "Correct: " : "Incorrect: ") + std::to_string(passing) + " of " +
                             count_phrase(n, "generated function") + " passed every test case.";
  if (no_code > 0) outcome.feedback.message += " " + std::to_string(no_code) + " produced no runnable code.";
  return outcome;
}

GradingOutcome grade(GradingPolicy policy, const StudentResponse& response, const Question& question,
                     GradingContext& ctx) {
  return policy == GradingPolicy::OneAttempt ? grade_one_attempt(response, question, ctx)
                                             : grade_robustness(response, question, ctx);
}

AttemptsResult grade_with_attempts(const std::vector<StudentResponse>& responses, const Question& question,
                                   GradingPolicy policy, GradingContext& ctx) {
  AttemptsResult result;
  std::vector<const StudentResponse*> valid;
  for (const StudentResponse& r : responses) {
    if (!responses.empty() &&
        (r.student_id != responses.front().student_id || r.question_id != responses.front().question_id)) {
      throw InvalidArgumentError("attempts must share one student and question");
    }
    if (validate_function_name(r.text, ctx.settings.word_limit, question.subject_language).valid) {
      valid.push_back(&r);
    } else {
      ++result.invalid_submissions;
    }
  }
  if (static_cast<int>(valid.size()) > ctx.settings.max_attempts) {
    throw AttemptLimitExceeded(std::to_string(valid.size()) + " valid attempts supplied, limit is " +
                               std::to_string(ctx.settings.max_attempts));
  }
  for (const StudentResponse* r : valid) {
    result.outcomes.push_back(grade(policy, *r, question, ctx));
    result.final_score = std::max(result.final_score, result.outcomes.back().partial_score);
    if (result.outcomes.back().correct) break;
  }
  return result;
}

// ---------------------------------------------------------------------------

Json grading_record(const GradingOutcome& outcome, UtcTime graded_at) {
  Json variants = Json::array();
  for (const GradedVariant& v : outcome.variants) {
    Json entry = v.variant;
    entry["code_hash"] = v.variant.code.empty() ? std::string() : sha256_hex(v.variant.code);
    entry["fraction_passed"] = v.suite.fraction_passed;
    entry["passed_all"] = v.suite.passed_all;
    entry["case_results"] = v.suite.case_results;
    entry["runtime_ms"] = v.suite.runtime_ms;
    variants.push_back(std::move(entry));
  }
  Json summaries = Json::array();
  for (const CaseSummary& s : outcome.feedback.case_summaries) {
    summaries.push_back(Json{{"case_index", s.case_index}, {"status", to_string(s.status)}});
  }
  return Json{{"response_ref", outcome.response_ref},
              {"response_text", outcome.response_text},
              {"policy", to_string(outcome.policy)},
              {"prompt_version", outcome.prompt_version},
              {"model_id", outcome.model_id},
              {"temperature", outcome.temperature},
              {"variants", std::move(variants)},
              {"correct", outcome.correct},
              {"partial_score", outcome.partial_score},
              {"feedback",
               Json{{"shown_code", outcome.feedback.shown_code},
                    {"case_summaries", std::move(summaries)},
                    {"message", outcome.feedback.message}}},
              {"graded_at", format_utc(graded_at)}};
}

GradingOutcome outcome_from_record(const Json& record) {
  try {
    GradingOutcome outcome;
    outcome.response_ref = record.at("response_ref").get<ResponseRef>();
    outcome.response_text = record.value("response_text", std::string());
    outcome.policy = parse_grading_policy(record.at("policy").get<std::string>());
    outcome.prompt_version = record.value("prompt_version", std::string());
    outcome.model_id = record.value("model_id", std::string());
    outcome.temperature = record.value("temperature", 0.0);
    for (const Json& entry : record.at("variants")) {
      GradedVariant v;
      v.variant = entry.get<GeneratedVariant>();
      v.suite.variant_index = v.variant.index;
      v.suite.case_results = entry.value("case_results", Json::array()).get<std::vector<CaseResult>>();
      v.suite.fraction_passed = entry.at("fraction_passed").get<double>();
      v.suite.passed_all = entry.at("passed_all").get<bool>();
      v.suite.runtime_ms = entry.value("runtime_ms", 0LL);
      outcome.variants.push_back(std::move(v));
    }
    outcome.correct = record.at("correct").get<bool>();
    outcome.partial_score = record.at("partial_score").get<double>();
    if (record.contains("feedback")) {
      const Json& fb = record.at("feedback");
      outcome.feedback.shown_code = fb.value("shown_code", std::string());
      outcome.feedback.message = fb.value("message", std::string());
      for (const Json& s : fb.value("case_summaries", Json::array())) {
        outcome.feedback.case_summaries.push_back(
            {s.at("case_index").get<int>(), parse_case_status(s.at("status").get<std::string>())});
      }
    }
    return outcome;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed grading record: ") + e.what());
  }
}

}  // namespace eipl
