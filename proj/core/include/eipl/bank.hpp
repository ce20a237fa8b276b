#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eipl/domain.hpp"
#include "eipl/execution.hpp"

namespace eipl {

struct QuestionBank {
  std::string version;
  std::vector<Question> questions;

  /// nullptr when no question has `id`.
  const Question* find(std::string_view id) const;
};

/// Path of the bank that ships with the library: the source tree copy when
/// it exists, otherwise the installed copy.
std::filesystem::path default_bank_path();

/// Parses a bank document. Throws ParseError (with the offending question
/// and field) and DuplicateIdError.
QuestionBank parse_bank(std::string_view text);
QuestionBank load_bank(const std::filesystem::path& path);

void to_json(Json& j, const QuestionBank& bank);

/// Name of the function defined by a question's reference solution.
std::string reference_function_name(const Question& question);

struct BankCheckRow {
  std::string question_id;
  SuiteResult result;
};

/// Runs every reference solution against its own suite.
std::vector<BankCheckRow> check_bank(const QuestionBank& bank, ExecutionBackend& backend);

}  // namespace eipl
