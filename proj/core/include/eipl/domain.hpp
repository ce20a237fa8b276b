#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace eipl {

using Json = nlohmann::json;
using UtcTime = std::chrono::sys_seconds;

// ---------------------------------------------------------------------------
// Questions and test cases

enum class CaseMode { ReturnValue, ArgumentMutation, Both };

std::string_view to_string(CaseMode mode);
CaseMode parse_case_mode(std::string_view text);

/// One unit test for a question. `expected_return` is checked in
/// ReturnValue/Both modes; `expected_arguments` maps a zero-based argument
/// position to the state that argument must hold after the call.
struct TestCase {
  std::vector<Json> inputs;
  std::optional<Json> expected_return;
  std::map<std::size_t, Json> expected_arguments;
  CaseMode mode = CaseMode::ReturnValue;
  int timeout_ms = 5000;

  /// The `expected` member of the runner protocol / bank file.
  Json expected_document() const;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct Parameter {
  std::string name;
  std::string type_annotation;

  friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct Question {
  std::string id;
  std::string title;
  std::string subject_language = "python";
  std::string code;
  std::vector<Parameter> params;
  std::string assumptions;
  std::vector<TestCase> test_suite;
  std::string reference_solution;

  friend bool operator==(const Question&, const Question&) = default;
};

/// Checks the structural invariants of a question (nonempty id and suite,
/// case arity, mutation cases naming at least one in-range argument).
/// Throws InvalidArgumentError naming the offending field.
void check_question(const Question& question);

// ---------------------------------------------------------------------------
// Responses

struct ResponseRef {
  std::string student_id;
  std::string question_id;
  int attempt = 1;

  friend auto operator<=>(const ResponseRef&, const ResponseRef&) = default;
};

struct StudentResponse {
  std::string student_id;
  std::string question_id;
  int attempt = 1;
  std::string text;
  UtcTime timestamp{};

  ResponseRef ref() const { return {student_id, question_id, attempt}; }

  friend bool operator==(const StudentResponse&, const StudentResponse&) = default;
};

enum class Violation { NotAnIdentifier, ReservedKeyword, TooManyWords, Empty };

std::string_view to_string(Violation violation);

struct ValidationResult {
  bool valid = false;
  int word_count = 0;
  std::vector<Violation> violations;

  friend bool operator==(const ValidationResult&, const ValidationResult&) = default;
};

// ---------------------------------------------------------------------------
// SOLO labels

enum class SoloCategory {
  Relational,
  RelationalError,
  Multistructural,
  MultistructuralError,
  OtherError,
};

std::string_view to_string(SoloCategory category);
SoloCategory parse_solo_category(std::string_view text);

struct SoloLabel {
  std::string rater_id;
  ResponseRef response_ref;
  SoloCategory category = SoloCategory::OtherError;

  friend bool operator==(const SoloLabel&, const SoloLabel&) = default;
};

// ---------------------------------------------------------------------------
// Time helpers (ISO-8601, UTC, second resolution: "2024-05-01T12:00:00Z")

std::string format_utc(UtcTime instant);
UtcTime parse_utc(std::string_view text);
UtcTime utc_now();

// ---------------------------------------------------------------------------
// JSON mapping

void to_json(Json& j, const TestCase& value);
void from_json(const Json& j, TestCase& value);
void to_json(Json& j, const Parameter& value);
void from_json(const Json& j, Parameter& value);
void to_json(Json& j, const Question& value);
void from_json(const Json& j, Question& value);
void to_json(Json& j, const ResponseRef& value);
void from_json(const Json& j, ResponseRef& value);
void to_json(Json& j, const StudentResponse& value);
void from_json(const Json& j, StudentResponse& value);
void to_json(Json& j, const ValidationResult& value);
void to_json(Json& j, const SoloLabel& value);
void from_json(const Json& j, SoloLabel& value);

}  // namespace eipl
