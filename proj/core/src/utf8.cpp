#include "cilyric/utf8.h"

#include "cilyric/error.h"

namespace cilyric::utf8 {

namespace {

std::size_t SequenceLength(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 0;
}

[[noreturn]] void Malformed(std::size_t pos) {
  throw Error(ErrorCategory::kSchema, "malformed UTF-8 at byte " + std::to_string(pos));
}

}  // namespace

char32_t Decode(std::string_view text, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  const std::size_t len = SequenceLength(lead);
  if (len == 0 || pos + len > text.size()) Malformed(pos);
  char32_t cp = len == 1 ? lead : (lead & (0xFF >> (len + 1)));
  for (std::size_t k = 1; k < len; ++k) {
    const auto cont = static_cast<unsigned char>(text[pos + k]);
    if ((cont >> 6) != 0x2) Malformed(pos + k);
    cp = (cp << 6) | (cont & 0x3F);
  }
  pos += len;
  return cp;
}

std::vector<std::string> Chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    Decode(text, pos);
    out.emplace_back(text.substr(start, pos - start));
  }
  return out;
}

std::size_t Length(std::string_view text) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    Decode(text, pos);
    ++n;
  }
  return n;
}

std::string Prefix(std::string_view text, std::size_t count) {
  std::size_t pos = 0;
  for (std::size_t k = 0; k < count && pos < text.size(); ++k) Decode(text, pos);
  return std::string(text.substr(0, pos));
}

std::string Suffix(std::string_view text, std::size_t count) {
  const std::size_t total = Length(text);
  if (count >= total) return std::string(text);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < total - count; ++k) Decode(text, pos);
  return std::string(text.substr(pos));
}

bool IsWhitespace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0D: case 0x20:
    case 0xA0: case 0x3000: case 0xFEFF:
      return true;
    default:
      return false;
  }
}

}  // namespace cilyric::utf8
