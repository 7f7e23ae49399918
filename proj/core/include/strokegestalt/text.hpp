#pragma once

#include <string>
#include <string_view>

namespace strokegestalt {

/// Decodes UTF-8 into code points. Throws CodecError on malformed input.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
std::string utf8_encode(char32_t c);

/// ASCII-only case folding; other code points are returned unchanged.
char32_t fold_case(char32_t c);

/// Evaluation normalization: drops punctuation and whitespace, folds
/// uppercase to lowercase. Idempotent.
std::string normalize_text(std::string_view s);

}  // namespace strokegestalt
