#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cilyric::utf8 {

/// Splits a UTF-8 string into one std::string per Unicode scalar value.
/// Throws Error(kSchema) on malformed input.
std::vector<std::string> Chars(std::string_view text);

/// Number of Unicode scalar values in `text`.
std::size_t Length(std::string_view text);

/// Leading / trailing `count` scalar values (fewer if the text is shorter).
std::string Prefix(std::string_view text, std::size_t count);
std::string Suffix(std::string_view text, std::size_t count);

/// Decodes one scalar value starting at `pos`, advancing `pos`.
char32_t Decode(std::string_view text, std::size_t& pos);

bool IsWhitespace(char32_t cp);

}  // namespace cilyric::utf8
