#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eipl/domain.hpp"

namespace eipl {

inline constexpr int kDefaultWordLimit = 10;

/// Number of words in a function name: segments separated by underscores,
/// whitespace, or a lowercase-to-uppercase transition. Empty segments are
/// not counted, so "__init" is one word and "countOddNums" is three.
int count_words(std::string_view name);

/// True when `text` matches [A-Za-z_][A-Za-z0-9_]*.
bool is_identifier(std::string_view text);

/// Reserved words of a subject language. Throws InvalidArgumentError for a
/// language with no keyword list.
const std::vector<std::string>& reserved_keywords(std::string_view language = "python");
bool is_reserved_keyword(std::string_view text, std::string_view language = "python");

/// Checks a submitted function name. Never throws for bad input; every
/// problem is reported as a violation. The text itself is not modified.
ValidationResult validate_function_name(std::string_view text, int word_limit = kDefaultWordLimit,
                                        std::string_view language = "python");

/// Student-facing explanation of a failed validation.
std::string resubmission_message(const ValidationResult& result, int word_limit = kDefaultWordLimit);

}  // namespace eipl
