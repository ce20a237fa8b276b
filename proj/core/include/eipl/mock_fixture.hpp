#pragma once

#include <filesystem>

#include "eipl/codegen.hpp"
#include "eipl/execution.hpp"

namespace eipl {

/// Offline grading fixture: scripted completions per function name and,
/// optionally, the suite outcome each completion's code should produce.
///
///   {"completions": {"count_odd_nums": [
///       {"output": "```python\n...\n```", "cases": ["pass", "wrong_return", ...]},
///       "```python\n...\n```"]}}
///
/// Plain-string entries script only the completion; their code must then be
/// run by a real backend.
struct MockFixture {
  ScriptedClient::Script completions;
  StubBackend::Script results;
};

MockFixture parse_mock_fixture(const Json& doc);
MockFixture load_mock_fixture(const std::filesystem::path& path);

}  // namespace eipl
