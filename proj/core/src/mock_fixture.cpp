#include "eipl/mock_fixture.hpp"

#include <fstream>

#include "eipl/errors.hpp"
#include "eipl/hashing.hpp"

namespace eipl {

MockFixture parse_mock_fixture(const Json& doc) {
  if (!doc.is_object() || !doc.contains("completions") || !doc.at("completions").is_object()) {
    throw ParseError("mock fixture needs a \"completions\" object");
  }
  MockFixture fixture;
  for (const auto& [name, entries] : doc.at("completions").items()) {
    if (!entries.is_array() || entries.empty()) {
      throw ParseError("mock fixture: completions for '" + name + "' must be a nonempty array");
    }
    auto& outputs = fixture.completions[name];
    for (const Json& entry : entries) {
      if (entry.is_string()) {
        outputs.push_back(entry.get<std::string>());
        continue;
      }
      if (!entry.is_object() || !entry.contains("output")) {
        throw ParseError("mock fixture: entry for '" + name + "' needs an \"output\" string");
      }
      const std::string output = entry.at("output").get<std::string>();
      outputs.push_back(output);
      if (!entry.contains("cases")) continue;

      std::string code;
      try {
        code = extract_code(output, name);
      } catch (const ExtractionError&) {
        continue;  // grading never runs code that fails extraction
      }
      std::vector<CaseResult> cases;
      for (const Json& status : entry.at("cases")) {
        cases.push_back({static_cast<int>(cases.size()), parse_case_status(status.get<std::string>()), ""});
      }
      fixture.results[sha256_hex(code)] = SuiteResult::from_cases(std::move(cases));
    }
  }
  return fixture;
}

MockFixture load_mock_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mock fixture " + path.string());
  const Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError("mock fixture " + path.string() + " is not valid JSON");
  return parse_mock_fixture(doc);
}

}  // namespace eipl
