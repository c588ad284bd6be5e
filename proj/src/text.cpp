#include "cartograf/text.hpp"

namespace cartograf::text {

uint32_t decode_utf8(std::string_view s, size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    uint32_t cp = 0;
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
        ++i; // stray continuation or invalid lead byte
        return b0;
    }
    if (i + static_cast<size_t>(len) > s.size()) {
        ++i;
        return b0;
    }
    for (int k = 1; k < len; ++k) {
        unsigned char bk = static_cast<unsigned char>(s[i + static_cast<size_t>(k)]);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += static_cast<size_t>(len);
    return cp;
}

size_t codepoint_count(std::string_view s) {
    size_t i = 0, n = 0;
    while (i < s.size()) {
        decode_utf8(s, i);
        ++n;
    }
    return n;
}

bool is_word_char(uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
               (cp >= '0' && cp <= '9') || cp == '\'';
    }
    // Non-ASCII: treat as a letter unless it sits in a punctuation block.
    if (cp >= 0xA0 && cp <= 0xBF) return false;  // Latin-1 punctuation/symbols
    if (cp == 0xD7 || cp == 0xF7) return false;  // multiplication/division signs
    if (cp >= 0x2000 && cp <= 0x206F) return false; // general punctuation
    return true;
}

void append_lowered(std::string& out, uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') {
        out.push_back(static_cast<char>(cp + 32));
        return;
    }
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) cp += 32; // Latin-1 uppercase range
    // re-encode as UTF-8
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

} // namespace cartograf::text
