#include "eipl/bank.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "eipl/codegen.hpp"
#include "eipl/errors.hpp"
#include "embedded_data.hpp"

namespace eipl {

const Question* QuestionBank::find(std::string_view id) const {
  for (const Question& q : questions) {
    if (q.id == id) return &q;
  }
  return nullptr;
}

std::filesystem::path default_bank_path() {
  std::filesystem::path source(std::string(embedded::kDefaultBankPath));
  if (std::filesystem::exists(source)) return source;
  return std::filesystem::path(std::string(embedded::kInstalledBankPath));
}

QuestionBank parse_bank(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError("question bank is empty");
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("question bank is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("questions") || !doc.at("questions").is_array()) {
    throw ParseError("question bank must be an object with a \"questions\" array");
  }

  QuestionBank bank;
  bank.version = doc.value("version", std::string());
  std::set<std::string> seen;
  const Json& questions = doc.at("questions");
  for (std::size_t i = 0; i < questions.size(); ++i) {
    Question q;
    try {
      q = questions[i].get<Question>();
      check_question(q);
    } catch (const Json::exception& e) {
      throw ParseError("questions[" + std::to_string(i) + "]: " + e.what());
    } catch (const InvalidArgumentError& e) {
      throw ParseError("questions[" + std::to_string(i) + "]: " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("questions[" + std::to_string(i) + "]: " + e.what());
    }
    if (!seen.insert(q.id).second) throw DuplicateIdError("duplicate question id '" + q.id + "'");
    bank.questions.push_back(std::move(q));
  }
  return bank;
}

QuestionBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open question bank " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_bank(buffer.str());
}

void to_json(Json& j, const QuestionBank& bank) { j = Json{{"version", bank.version}, {"questions", bank.questions}}; }

std::string reference_function_name(const Question& question) {
  const auto names = defined_functions(question.reference_solution);
  if (names.empty()) throw InvalidArgumentError("question '" + question.id + "' has no function in its reference solution");
  return names.front();
}

std::vector<BankCheckRow> check_bank(const QuestionBank& bank, ExecutionBackend& backend) {
  std::vector<BankCheckRow> rows;
  for (const Question& q : bank.questions) {
    rows.push_back({q.id, run_suite(q.reference_solution, reference_function_name(q), q.test_suite, backend)});
  }
  return rows;
}

}  // namespace eipl
