#include "strokegestalt/text.hpp"

#include "strokegestalt/error.hpp"

namespace strokegestalt {

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      throw CodecError("malformed UTF-8 at byte " + std::to_string(i));
    }
    if (i + static_cast<size_t>(extra) >= s.size() && extra > 0) {
      throw CodecError("truncated UTF-8 sequence at byte " + std::to_string(i));
    }
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        throw CodecError("malformed UTF-8 continuation at byte " + std::to_string(i + k));
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    out.push_back(cp);
    i += static_cast<size_t>(extra) + 1;
  }
  return out;
}

std::string utf8_encode(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

std::string utf8_encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) out += utf8_encode(c);
  return out;
}

char32_t fold_case(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c - U'A' + U'a';
  return c;
}

namespace {

bool is_punct_or_space(char32_t c) {
  if (c < 0x80) {
    // Everything printable that is not alphanumeric, plus whitespace/control.
    const bool alnum = (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') ||
                       (c >= U'A' && c <= U'Z');
    return !alnum;
  }
  if (c == 0x00A0 || (c >= 0x00A1 && c <= 0x00BF && c != 0x00AA && c != 0x00B5 &&
                      c != 0x00BA)) {
    return true;  // Latin-1 punctuation (¡ « » ¿ ...)
  }
  if (c >= 0x2000 && c <= 0x206F) return true;  // general punctuation, spaces
  if (c >= 0x3000 && c <= 0x303F) return true;  // CJK symbols and punctuation
  if (c >= 0xFF01 && c <= 0xFF0F) return true;  // fullwidth ! .. /
  if (c >= 0xFF1A && c <= 0xFF20) return true;  // fullwidth : .. @
  if (c >= 0xFF3B && c <= 0xFF40) return true;
  if (c >= 0xFF5B && c <= 0xFF65) return true;
  return false;
}

}  // namespace

std::string normalize_text(std::string_view s) {
  std::u32string out;
  for (char32_t c : utf8_decode(s)) {
    if (is_punct_or_space(c)) continue;
    out.push_back(fold_case(c));
  }
  return utf8_encode(out);
}

}  // namespace strokegestalt
