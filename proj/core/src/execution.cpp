#include "eipl/execution.hpp"

#include <algorithm>

#include "eipl/errors.hpp"
#include "eipl/hashing.hpp"

namespace eipl {

namespace {

constexpr std::pair<CaseStatus, std::string_view> kStatuses[] = {
    {CaseStatus::Pass, "pass"},
    {CaseStatus::WrongReturn, "wrong_return"},
    {CaseStatus::WrongMutation, "wrong_mutation"},
    {CaseStatus::RuntimeError, "runtime_error"},
    {CaseStatus::Timeout, "timeout"},
    {CaseStatus::LoadError, "load_error"},
};

std::string truncate_observed(std::string text) {
  if (text.size() > kMaxObservedLength) text.resize(kMaxObservedLength);
  return text;
}

}  // namespace

std::string_view to_string(CaseStatus status) {
  for (const auto& [value, name] : kStatuses) {
    if (value == status) return name;
  }
  return "unknown";
}

CaseStatus parse_case_status(std::string_view text) {
  // "WrongReturn", "wrong_return" and "WRONG_RETURN" are all accepted.
  std::string key;
  for (char c : text) {
    if (c == '_' || c == '-' || c == ' ') continue;
    key += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  }
  for (const auto& [value, name] : kStatuses) {
    std::string candidate;
    for (char c : name) {
      if (c != '_') candidate += c;
    }
    if (candidate == key) return value;
  }
  throw ParseError("unknown case status '" + std::string(text) + "'");
}

SuiteResult SuiteResult::from_cases(std::vector<CaseResult> cases, int variant_index, long long runtime_ms) {
  SuiteResult result;
  result.variant_index = variant_index;
  result.runtime_ms = runtime_ms;
  const auto passed = std::count_if(cases.begin(), cases.end(),
                                    [](const CaseResult& c) { return c.status == CaseStatus::Pass; });
  result.passed_all = !cases.empty() && passed == static_cast<std::ptrdiff_t>(cases.size());
  result.fraction_passed = cases.empty() ? 0.0 : static_cast<double>(passed) / static_cast<double>(cases.size());
  result.case_results = std::move(cases);
  return result;
}

SuiteResult SuiteResult::uniform(std::size_t case_count, CaseStatus status, std::string observed) {
  std::vector<CaseResult> cases;
  cases.reserve(case_count);
  for (std::size_t i = 0; i < case_count; ++i) cases.push_back({static_cast<int>(i), status, observed});
  return from_cases(std::move(cases));
}

// ---------------------------------------------------------------------------

StubBackend::StubBackend(Script script) : script_(std::move(script)) {}

SuiteResult StubBackend::run(const std::string& code, const std::string& function_name,
                             const std::vector<TestCase>&) {
  auto it = script_.find(sha256_hex(code));
  if (it == script_.end()) {
    throw UnknownCodeError("stub backend has no result scripted for this code (function '" + function_name + "')");
  }
  return it->second;
}

void StubBackend::add(std::string_view code, SuiteResult result) { script_[sha256_hex(code)] = std::move(result); }

std::unique_ptr<ExecutionBackend> stub_backend(StubBackend::Script script) {
  return std::make_unique<StubBackend>(std::move(script));
}

SuiteResult run_suite(const std::string& code, const std::string& function_name, const std::vector<TestCase>& suite,
                      ExecutionBackend& backend) {
  if (suite.empty()) throw InvalidArgumentError("test suite is empty");
  if (code.empty()) throw InvalidArgumentError("no code to run");

  SuiteResult raw = backend.run(code, function_name, suite);
  if (raw.case_results.size() != suite.size()) {
    throw ProtocolError("backend returned " + std::to_string(raw.case_results.size()) + " case results for " +
                        std::to_string(suite.size()) + " test cases");
  }
  std::stable_sort(raw.case_results.begin(), raw.case_results.end(),
                   [](const CaseResult& a, const CaseResult& b) { return a.case_index < b.case_index; });
  for (std::size_t i = 0; i < raw.case_results.size(); ++i) {
    CaseResult& c = raw.case_results[i];
    if (c.case_index != static_cast<int>(i)) throw ProtocolError("case results do not cover every case index");
    c.observed = truncate_observed(std::move(c.observed));
  }
  return SuiteResult::from_cases(std::move(raw.case_results), raw.variant_index, raw.runtime_ms);
}

// ---------------------------------------------------------------------------

Json runner_input(const std::string& code, const std::string& function_name, const std::vector<TestCase>& suite) {
  Json cases = Json::array();
  for (const TestCase& tc : suite) cases.push_back(tc);
  return Json{{"function_name", function_name}, {"code", code}, {"cases", std::move(cases)}};
}

std::vector<CaseResult> parse_runner_output(const Json& output, std::size_t case_count) {
  if (!output.is_object()) throw ProtocolError("runner output is not a JSON object");
  if (output.contains("load_error") && !output.at("load_error").is_null()) {
    const Json& err = output.at("load_error");
    const std::string message = err.is_string() ? err.get<std::string>() : err.dump();
    return SuiteResult::uniform(case_count, CaseStatus::LoadError, truncate_observed(message)).case_results;
  }
  if (!output.contains("results") || !output.at("results").is_array()) {
    throw ProtocolError("runner output has no results array");
  }
  std::vector<CaseResult> results;
  try {
    for (const Json& entry : output.at("results")) results.push_back(entry.get<CaseResult>());
  } catch (const Json::exception& e) {
    throw ProtocolError(std::string("malformed runner result: ") + e.what());
  } catch (const ParseError& e) {
    throw ProtocolError(std::string("malformed runner result: ") + e.what());
  }
  return results;
}

void to_json(Json& j, const CaseResult& value) {
  j = Json{{"case_index", value.case_index}, {"status", to_string(value.status)}, {"observed", value.observed}};
}

void from_json(const Json& j, CaseResult& value) {
  value.case_index = j.at("case_index").get<int>();
  value.status = parse_case_status(j.at("status").get<std::string>());
  const Json& observed = j.value("observed", Json());
  value.observed = observed.is_string() ? observed.get<std::string>() : (observed.is_null() ? "" : observed.dump());
}

void to_json(Json& j, const SuiteResult& value) {
  j = Json{{"variant_index", value.variant_index},
           {"case_results", value.case_results},
           {"passed_all", value.passed_all},
           {"fraction_passed", value.fraction_passed},
           {"runtime_ms", value.runtime_ms}};
}

void from_json(const Json& j, SuiteResult& value) {
  value.variant_index = j.value("variant_index", 0);
  value.case_results = j.at("case_results").get<std::vector<CaseResult>>();
  value.passed_all = j.at("passed_all").get<bool>();
  value.fraction_passed = j.at("fraction_passed").get<double>();
  value.runtime_ms = j.value("runtime_ms", 0LL);
}

}  // namespace eipl
