#include "eipl/domain.hpp"

#include <ctime>
#include <cstdio>

#include "eipl/errors.hpp"

namespace eipl {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::pair<Enum, std::string_view> (&table)[N],
                std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == text) return value;
  }
  throw ParseError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum value, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "unknown";
}

constexpr std::pair<CaseMode, std::string_view> kCaseModes[] = {
    {CaseMode::ReturnValue, "return_value"},
    {CaseMode::ArgumentMutation, "argument_mutation"},
    {CaseMode::Both, "both"},
};

constexpr std::pair<Violation, std::string_view> kViolations[] = {
    {Violation::NotAnIdentifier, "not_an_identifier"},
    {Violation::ReservedKeyword, "reserved_keyword"},
    {Violation::TooManyWords, "too_many_words"},
    {Violation::Empty, "empty"},
};

constexpr std::pair<SoloCategory, std::string_view> kSoloCategories[] = {
    {SoloCategory::Relational, "relational"},
    {SoloCategory::RelationalError, "relational_error"},
    {SoloCategory::Multistructural, "multistructural"},
    {SoloCategory::MultistructuralError, "multistructural_error"},
    {SoloCategory::OtherError, "other_error"},
};

bool mode_checks_return(CaseMode mode) { return mode != CaseMode::ArgumentMutation; }
bool mode_checks_arguments(CaseMode mode) { return mode != CaseMode::ReturnValue; }

}  // namespace

std::string_view to_string(CaseMode mode) { return enum_name(mode, kCaseModes); }
CaseMode parse_case_mode(std::string_view text) { return parse_enum(text, kCaseModes, "case mode"); }
std::string_view to_string(Violation violation) { return enum_name(violation, kViolations); }
std::string_view to_string(SoloCategory category) { return enum_name(category, kSoloCategories); }

SoloCategory parse_solo_category(std::string_view text) {
  // Accept the display spellings too ("Relational Error", "OtherError").
  std::string key;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == ' ' || c == '-' || c == '_') {
      if (!key.empty() && key.back() != '_') key += '_';
    } else if (c >= 'A' && c <= 'Z') {
      if (i > 0 && !key.empty() && key.back() != '_' && text[i - 1] >= 'a' && text[i - 1] <= 'z') {
        key += '_';
      }
      key += static_cast<char>(c - 'A' + 'a');
    } else {
      key += c;
    }
  }
  // Short forms used in coding sheets.
  if (key == "r") return SoloCategory::Relational;
  if (key == "re") return SoloCategory::RelationalError;
  if (key == "m") return SoloCategory::Multistructural;
  if (key == "me") return SoloCategory::MultistructuralError;
  if (key == "o" || key == "oe") return SoloCategory::OtherError;
  return parse_enum(std::string_view(key), kSoloCategories, "SOLO category");
}

Json TestCase::expected_document() const {
  if (mode == CaseMode::ReturnValue) return expected_return.value_or(Json());
  Json doc = Json::object();
  if (mode == CaseMode::Both) doc["return"] = expected_return.value_or(Json());
  Json args = Json::object();
  for (const auto& [index, state] : expected_arguments) args[std::to_string(index)] = state;
  doc["arguments"] = std::move(args);
  return doc;
}

void check_question(const Question& question) {
  auto fail = [&](const std::string& msg) {
    throw InvalidArgumentError("question '" + question.id + "': " + msg);
  };
  if (question.id.empty()) throw InvalidArgumentError("question id must be nonempty");
  if (question.test_suite.empty()) fail("test_suite must be nonempty");
  for (std::size_t i = 0; i < question.test_suite.size(); ++i) {
    const TestCase& tc = question.test_suite[i];
    const std::string where = "test case " + std::to_string(i) + ": ";
    if (tc.inputs.size() != question.params.size()) {
      fail(where + "expected " + std::to_string(question.params.size()) + " inputs, got " +
           std::to_string(tc.inputs.size()));
    }
    if (mode_checks_return(tc.mode) && !tc.expected_return) fail(where + "missing expected return value");
    if (mode_checks_arguments(tc.mode)) {
      if (tc.expected_arguments.empty()) fail(where + "argument mutation case needs at least one argument state");
      for (const auto& [index, state] : tc.expected_arguments) {
        if (index >= tc.inputs.size()) fail(where + "argument index " + std::to_string(index) + " out of range");
      }
    }
    if (tc.timeout_ms <= 0) fail(where + "timeout_ms must be positive");
  }
}

// ---------------------------------------------------------------------------

std::string format_utc(UtcTime instant) {
  const std::time_t t = instant.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

UtcTime parse_utc(std::string_view text) {
  std::tm tm{};
  int consumed = 0;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                  &tm.tm_min, &tm.tm_sec, &consumed) != 6) {
    throw ParseError("invalid UTC timestamp '" + s + "'");
  }
  std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  // Fractional seconds are accepted and dropped.
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
  }
  if (rest != "Z" && rest != "+00:00" && !rest.empty()) {
    throw ParseError("timestamp '" + s + "' is not UTC");
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return UtcTime(std::chrono::seconds(timegm(&tm)));
}

UtcTime utc_now() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

// ---------------------------------------------------------------------------

void to_json(Json& j, const TestCase& value) {
  j = Json{{"inputs", value.inputs},
           {"expected", value.expected_document()},
           {"mode", to_string(value.mode)},
           {"timeout_ms", value.timeout_ms}};
}

void from_json(const Json& j, TestCase& value) {
  value = TestCase{};
  value.inputs = j.at("inputs").get<std::vector<Json>>();
  value.mode = parse_case_mode(j.value("mode", std::string("return_value")));
  value.timeout_ms = j.value("timeout_ms", 5000);
  const Json& expected = j.at("expected");
  if (value.mode == CaseMode::ReturnValue) {
    value.expected_return = expected;
    return;
  }
  if (!expected.is_object() || !expected.contains("arguments")) {
    throw ParseError("argument mutation case needs expected.arguments");
  }
  if (value.mode == CaseMode::Both) value.expected_return = expected.at("return");
  for (const auto& [key, state] : expected.at("arguments").items()) {
    std::size_t index = 0;
    try {
      index = std::stoul(key);
    } catch (const std::exception&) {
      throw ParseError("argument key '" + key + "' is not an index");
    }
    value.expected_arguments[index] = state;
  }
}

void to_json(Json& j, const Parameter& value) {
  j = Json{{"name", value.name}, {"type", value.type_annotation}};
}

void from_json(const Json& j, Parameter& value) {
  value.name = j.at("name").get<std::string>();
  value.type_annotation = j.value("type", std::string());
}

void to_json(Json& j, const Question& value) {
  j = Json{{"id", value.id},
           {"title", value.title},
           {"subject_language", value.subject_language},
           {"code", value.code},
           {"params", value.params},
           {"assumptions", value.assumptions},
           {"test_suite", value.test_suite},
           {"reference_solution", value.reference_solution}};
}

void from_json(const Json& j, Question& value) {
  value.id = j.at("id").get<std::string>();
  value.title = j.value("title", value.id);
  value.subject_language = j.value("subject_language", std::string("python"));
  value.code = j.at("code").get<std::string>();
  value.params = j.at("params").get<std::vector<Parameter>>();
  value.assumptions = j.value("assumptions", std::string());
  value.test_suite = j.at("test_suite").get<std::vector<TestCase>>();
  value.reference_solution = j.at("reference_solution").get<std::string>();
}

void to_json(Json& j, const ResponseRef& value) {
  j = Json{{"student_id", value.student_id}, {"question_id", value.question_id}, {"attempt", value.attempt}};
}

void from_json(const Json& j, ResponseRef& value) {
  value.student_id = j.at("student_id").get<std::string>();
  value.question_id = j.at("question_id").get<std::string>();
  value.attempt = j.at("attempt").get<int>();
}

void to_json(Json& j, const StudentResponse& value) {
  j = Json{{"student_id", value.student_id},
           {"question_id", value.question_id},
           {"attempt", value.attempt},
           {"text", value.text},
           {"timestamp", format_utc(value.timestamp)}};
}

void from_json(const Json& j, StudentResponse& value) {
  value.student_id = j.at("student_id").get<std::string>();
  value.question_id = j.at("question_id").get<std::string>();
  value.attempt = j.value("attempt", 1);
  if (value.attempt < 1) throw ParseError("attempt must be >= 1");
  value.text = j.at("text").get<std::string>();
  value.timestamp = j.contains("timestamp") ? parse_utc(j.at("timestamp").get<std::string>()) : UtcTime{};
}

void to_json(Json& j, const ValidationResult& value) {
  Json violations = Json::array();
  for (Violation v : value.violations) violations.push_back(to_string(v));
  j = Json{{"valid", value.valid}, {"word_count", value.word_count}, {"violations", violations}};
}

void to_json(Json& j, const SoloLabel& value) {
  j = Json{{"rater_id", value.rater_id},
           {"response_ref", value.response_ref},
           {"category", to_string(value.category)}};
}

void from_json(const Json& j, SoloLabel& value) {
  value.rater_id = j.at("rater_id").get<std::string>();
  value.response_ref = j.at("response_ref").get<ResponseRef>();
  value.category = parse_solo_category(j.at("category").get<std::string>());
}

}  // namespace eipl
