#include "eipl/validation.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "eipl/errors.hpp"
#include "embedded_data.hpp"

namespace eipl {

namespace {

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string> parse_keyword_file(std::string_view data) {
  std::vector<std::string> words;
  std::istringstream in{std::string(data)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && is_space(line.back())) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.push_back(line);
  }
  std::sort(words.begin(), words.end());
  return words;
}

const std::map<std::string, std::vector<std::string>, std::less<>>& keyword_tables() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> tables = {
      {"python", parse_keyword_file(embedded::kPythonKeywords)},
  };
  return tables;
}

}  // namespace

int count_words(std::string_view name) {
  int words = 0;
  bool in_word = false;
  char prev = '\0';
  for (char c : name) {
    if (c == '_' || is_space(c)) {
      in_word = false;
    } else {
      if (!in_word || (is_lower(prev) && is_upper(c))) ++words;
      in_word = true;
    }
    prev = c;
  }
  return words;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  if (!(is_lower(text[0]) || is_upper(text[0]) || text[0] == '_')) return false;
  return std::all_of(text.begin() + 1, text.end(),
                     [](char c) { return is_lower(c) || is_upper(c) || is_digit(c) || c == '_'; });
}

const std::vector<std::string>& reserved_keywords(std::string_view language) {
  const auto& tables = keyword_tables();
  auto it = tables.find(language);
  if (it == tables.end()) {
    throw InvalidArgumentError("no keyword list for subject language '" + std::string(language) + "'");
  }
  return it->second;
}

bool is_reserved_keyword(std::string_view text, std::string_view language) {
  const auto& words = reserved_keywords(language);
  return std::binary_search(words.begin(), words.end(), text);
}

ValidationResult validate_function_name(std::string_view text, int word_limit, std::string_view language) {
  ValidationResult result;
  result.word_count = count_words(text);
  if (result.word_count == 0) {
    // "", "_", "___": nothing a grader could read as a description.
    result.violations.push_back(Violation::Empty);
  }
  if (!text.empty() && !is_identifier(text)) result.violations.push_back(Violation::NotAnIdentifier);
  if (is_reserved_keyword(text, language)) result.violations.push_back(Violation::ReservedKeyword);
  if (result.word_count > word_limit) result.violations.push_back(Violation::TooManyWords);
  result.valid = result.violations.empty();
  return result;
}

std::string resubmission_message(const ValidationResult& result, int word_limit) {
  if (result.valid) return "valid (" + std::to_string(result.word_count) + " words)";
  std::string msg = "invalid:";
  for (Violation v : result.violations) {
    switch (v) {
      case Violation::Empty:
        msg += " the response is empty;";
        break;
      case Violation::NotAnIdentifier:
        msg += " the response must be a valid Python function name (letters, digits and underscores, no spaces);";
        break;
      case Violation::ReservedKeyword:
        msg += " the response is a reserved keyword;";
        break;
      case Violation::TooManyWords:
        msg += " the name has " + std::to_string(result.word_count) + " words, the limit is " +
               std::to_string(word_limit) + ";";
        break;
    }
  }
  msg.pop_back();
  msg += ". You may resubmit without penalty.";
  return msg;
}

}  // namespace eipl
