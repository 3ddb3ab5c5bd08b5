#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace morphtag::utf8 {

// Decodes UTF-8 into codepoints. Throws DataError on invalid sequences
// (overlong encodings, surrogates, truncation).
std::u32string decode(std::string_view text);

// True iff text is well-formed UTF-8.
bool valid(std::string_view text);

std::string encode(std::u32string_view codepoints);
std::string encode_one(char32_t cp);

// One-to-one case mappings covering the cased scripts of the Unicode BMP/SMP.
// Characters without a mapping are returned unchanged. to_lower is restricted
// to characters whose uppercase mapping restores them, so
// to_upper(to_lower(c)) == c holds whenever to_lower(c) != c.
char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);

inline bool has_uppercase(char32_t cp) { return to_lower(cp) != cp; }

std::u32string lowered(std::u32string_view s);

}  // namespace morphtag::utf8
