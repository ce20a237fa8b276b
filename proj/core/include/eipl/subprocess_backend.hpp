#pragma once

#include <string>
#include <vector>

#include "eipl/execution.hpp"

namespace eipl {

struct SubprocessBackendConfig {
  /// Runner command line, e.g. {"python3", "harness/runner.py"}.
  std::vector<std::string> command;
  /// Whole-run ceiling is the sum of case timeouts plus this margin.
  int ceiling_margin_ms = 2000;
};

/// Executes each variant in a fresh runner subprocess speaking the runner
/// protocol over stdin/stdout. The runner enforces per-case timeouts; if the
/// whole run exceeds the ceiling the process group is killed and unfinished
/// cases are reported as Timeout. Safe to call concurrently; each call owns
/// its subprocess.
class SubprocessBackend final : public ExecutionBackend {
 public:
  explicit SubprocessBackend(SubprocessBackendConfig config);

  SuiteResult run(const std::string& code, const std::string& function_name,
                  const std::vector<TestCase>& suite) override;

 private:
  SubprocessBackendConfig config_;
};

/// Splits a command string on whitespace (no quoting rules).
std::vector<std::string> split_command(const std::string& command);

}  // namespace eipl
