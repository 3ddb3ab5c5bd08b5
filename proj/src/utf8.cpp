#include "morphtag/utf8.hpp"

#include <algorithm>

#include "morphtag/errors.hpp"

namespace morphtag::utf8 {

namespace {

struct CasePair {
    uint32_t from;
    uint32_t to;
};

#include "unicode_case_table.inc"

template <size_t N>
char32_t map_case(const CasePair (&table)[N], char32_t cp) {
    const CasePair* end = table + N;
    const CasePair* it = std::lower_bound(
        table, end, cp, [](const CasePair& p, char32_t c) { return p.from < c; });
    if (it != end && it->from == cp) return static_cast<char32_t>(it->to);
    return cp;
}

bool decode_next(std::string_view text, size_t& i, char32_t& out) {
    const auto* s = reinterpret_cast<const unsigned char*>(text.data());
    unsigned char b0 = s[i];
    if (b0 < 0x80) {
        out = b0;
        i += 1;
        return true;
    }
    int len;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return false;
    }
    if (i + len > text.size()) return false;
    for (int k = 1; k < len; ++k) {
        unsigned char b = s[i + k];
        if ((b & 0xC0) != 0x80) return false;
        cp = (cp << 6) | (b & 0x3F);
    }
    static const char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len]) return false;               // overlong
    if (cp >= 0xD800 && cp <= 0xDFFF) return false;  // surrogate
    if (cp > 0x10FFFF) return false;
    out = cp;
    i += len;
    return true;
}

}  // namespace

std::u32string decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        char32_t cp;
        size_t at = i;
        if (!decode_next(text, i, cp))
            throw DataError("invalid UTF-8 sequence at byte offset " + std::to_string(at));
        out.push_back(cp);
    }
    return out;
}

bool valid(std::string_view text) {
    size_t i = 0;
    char32_t cp;
    while (i < text.size())
        if (!decode_next(text, i, cp)) return false;
    return true;
}

std::string encode_one(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

std::string encode(std::u32string_view codepoints) {
    std::string out;
    out.reserve(codepoints.size());
    for (char32_t cp : codepoints) out += encode_one(cp);
    return out;
}

char32_t to_lower(char32_t cp) { return map_case(kToLower, cp); }
char32_t to_upper(char32_t cp) { return map_case(kToUpper, cp); }

std::u32string lowered(std::u32string_view s) {
    std::u32string out(s);
    for (char32_t& c : out) c = to_lower(c);
    return out;
}

}  // namespace morphtag::utf8
