#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "eipl/domain.hpp"

namespace eipl {

enum class CaseStatus { Pass, WrongReturn, WrongMutation, RuntimeError, Timeout, LoadError };

std::string_view to_string(CaseStatus status);
CaseStatus parse_case_status(std::string_view text);

inline constexpr std::size_t kMaxObservedLength = 2000;

struct CaseResult {
  int case_index = 0;
  CaseStatus status = CaseStatus::Pass;
  /// Serialized value or error text, at most kMaxObservedLength chars.
  std::string observed;

  friend bool operator==(const CaseResult&, const CaseResult&) = default;
};

struct SuiteResult {
  int variant_index = 0;
  std::vector<CaseResult> case_results;
  bool passed_all = false;
  double fraction_passed = 0.0;
  long long runtime_ms = 0;

  /// Builds a result whose aggregate fields agree with `cases`.
  static SuiteResult from_cases(std::vector<CaseResult> cases, int variant_index = 0, long long runtime_ms = 0);
  /// Every case marked `status` with the same observed text.
  static SuiteResult uniform(std::size_t case_count, CaseStatus status, std::string observed = {});

  friend bool operator==(const SuiteResult&, const SuiteResult&) = default;
};

/// Runs generated code against a test suite. Implementations never execute
/// the code inside the calling process.
class ExecutionBackend {
 public:
  virtual ~ExecutionBackend() = default;
  virtual SuiteResult run(const std::string& code, const std::string& function_name,
                          const std::vector<TestCase>& suite) = 0;
};

/// Backend answering from a map of SHA-256(code) to a canned result.
/// Unknown code raises UnknownCodeError.
class StubBackend final : public ExecutionBackend {
 public:
  using Script = std::map<std::string, SuiteResult>;

  explicit StubBackend(Script script);

  SuiteResult run(const std::string& code, const std::string& function_name,
                  const std::vector<TestCase>& suite) override;

  /// Adds (or replaces) the canned result for `code`.
  void add(std::string_view code, SuiteResult result);

 private:
  Script script_;
};

std::unique_ptr<ExecutionBackend> stub_backend(StubBackend::Script script);

/// Runs `suite` through `backend` and normalizes the result: one case
/// result per test case in order, observed text truncated, aggregates
/// recomputed. Throws InvalidArgumentError for an empty suite or code and
/// ProtocolError when the backend returns the wrong number of cases.
SuiteResult run_suite(const std::string& code, const std::string& function_name, const std::vector<TestCase>& suite,
                      ExecutionBackend& backend);

// ---------------------------------------------------------------------------
// Runner protocol

/// {function_name, code, cases:[{inputs, expected, mode, timeout_ms}]}
Json runner_input(const std::string& code, const std::string& function_name, const std::vector<TestCase>& suite);

/// Decodes {load_error, results:[{case_index, status, observed}]}. A set
/// load_error marks every case LoadError. Throws ProtocolError.
std::vector<CaseResult> parse_runner_output(const Json& output, std::size_t case_count);

void to_json(Json& j, const CaseResult& value);
void from_json(const Json& j, CaseResult& value);
void to_json(Json& j, const SuiteResult& value);
void from_json(const Json& j, SuiteResult& value);

}  // namespace eipl
