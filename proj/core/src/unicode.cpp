#include "clpd/unicode.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace clpd::unicode {

namespace {

template <typename F>
void for_each_cp(std::string_view s, F&& f) {
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    const auto n = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < n) {
        int32_t begin = i;
        UChar32 c;
        U8_NEXT(p, i, n, c);
        if (c < 0) c = 0xFFFD;
        f(static_cast<char32_t>(c), static_cast<std::size_t>(begin));
    }
}

}  // namespace

std::u32string decode(std::string_view utf8) {
    std::u32string out;
    out.reserve(utf8.size());
    for_each_cp(utf8, [&](char32_t c, std::size_t) { out.push_back(c); });
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool err = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(cp), err);
    if (err) {
        append_utf8(out, 0xFFFD);
        return;
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
}

std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps) append_utf8(out, c);
    return out;
}

char32_t to_lower(char32_t cp) { return static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp))); }

std::string fold_case(std::string_view utf8) {
    std::string out;
    out.reserve(utf8.size());
    for_each_cp(utf8, [&](char32_t c, std::size_t) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
        } else {
            append_utf8(out, to_lower(c));
        }
    });
    return out;
}

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }
bool is_upper(char32_t cp) { return u_isupper(static_cast<UChar32>(cp)) || u_istitle(static_cast<UChar32>(cp)); }
bool is_digit(char32_t cp) { return u_isdigit(static_cast<UChar32>(cp)); }
bool is_alpha(char32_t cp) { return u_isalpha(static_cast<UChar32>(cp)); }

bool is_punct(char32_t cp) {
    const auto c = static_cast<UChar32>(cp);
    if (u_ispunct(c)) return true;
    switch (u_charType(c)) {
        case U_MATH_SYMBOL:
        case U_CURRENCY_SYMBOL:
        case U_MODIFIER_SYMBOL:
        case U_OTHER_SYMBOL:
            return true;
        default:
            return false;
    }
}

std::size_t length(std::string_view utf8) {
    std::size_t n = 0;
    for (char ch : utf8) {
        if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) ++n;
    }
    return n;
}

std::vector<std::size_t> codepoint_byte_offsets(std::string_view utf8) {
    std::vector<std::size_t> offs;
    offs.reserve(utf8.size() + 1);
    for_each_cp(utf8, [&](char32_t, std::size_t b) { offs.push_back(b); });
    offs.push_back(utf8.size());
    return offs;
}

std::string substr(std::string_view utf8, std::size_t start, std::size_t end) {
    auto offs = codepoint_byte_offsets(utf8);
    const std::size_t n = offs.size() - 1;
    if (start > n) start = n;
    if (end > n) end = n;
    if (end <= start) return {};
    return std::string(utf8.substr(offs[start], offs[end] - offs[start]));
}

}  // namespace clpd::unicode
