#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace openindex::text {

// Unicode-normalizes, folds diacritics and Latin ligatures to ASCII and
// lowercases. Characters with no ASCII fold (e.g. CJK) pass through as UTF-8.
std::string fold(std::string_view utf8);

// Splits folded text on runs of characters that are not ASCII alphanumerics.
// Non-ASCII bytes count as word characters.
std::vector<std::string> alnum_tokens(std::string_view utf8);

// Joins alnum_tokens with single spaces.
std::string alnum_normalize(std::string_view utf8);

std::string collapse_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace openindex::text
