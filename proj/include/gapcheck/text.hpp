#pragma once

// Small text utilities shared across the library: byte-level string
// helpers, UTF-8 validation/repair, simple lowercasing for the Latin
// ranges that Latin/Italian corpora actually use, FNV-1a checksums and
// deterministic number formatting.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace gapcheck::text {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// ── UTF-8 ────────────────────────────────────────────────────────────

// Decodes one codepoint starting at s[i]. Returns the codepoint and
// advances i past it, or returns -1 (i advanced by one byte) on an
// invalid sequence. Rejects overlongs, surrogates and > U+10FFFF.
inline long utf8_decode(std::string_view s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) { ++i; return b0; }
    int len;
    long cp;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { ++i; return -1; }
    if (i + static_cast<std::size_t>(len) > s.size()) { ++i; return -1; }
    for (int k = 1; k < len; ++k) {
        unsigned char b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((b & 0xC0) != 0x80) { ++i; return -1; }
        cp = (cp << 6) | (b & 0x3F);
    }
    // Overlong / out-of-range checks.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return -1;
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

inline void utf8_encode(long cp, std::string& out) {
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

inline bool utf8_valid(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size())
        if (utf8_decode(s, i) < 0) return false;
    return true;
}

// Replaces every invalid sequence with U+FFFD. Returns the number of
// replacements made.
inline std::size_t utf8_sanitize(std::string_view s, std::string& out) {
    out.clear();
    out.reserve(s.size());
    std::size_t replaced = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t before = i;
        long cp = utf8_decode(s, i);
        if (cp < 0) {
            out.append("\xEF\xBF\xBD");
            ++replaced;
        } else {
            out.append(s.substr(before, i - before));
        }
    }
    return replaced;
}

// Simple (one-to-one) lowercase mapping covering ASCII, Latin-1
// Supplement and Latin Extended-A; other codepoints pass through.
// Deliberately locale-independent.
inline long lower_codepoint(long cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if ((cp >= 0xC0 && cp <= 0xD6) || (cp >= 0xD8 && cp <= 0xDE)) return cp + 0x20;
    if (cp == 0x130) return 0x69;  // I-with-dot lowercases to plain i
    if (cp >= 0x100 && cp <= 0x137 && (cp % 2) == 0) return cp + 1;
    if (cp >= 0x139 && cp <= 0x147 && (cp % 2) == 1) return cp + 1;
    if (cp >= 0x14A && cp <= 0x177 && (cp % 2) == 0) return cp + 1;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x179 && cp <= 0x17D && (cp % 2) == 1) return cp + 1;
    return cp;
}

inline std::string lowercase(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t before = i;
        long cp = utf8_decode(s, i);
        if (cp < 0) {
            out.push_back(s[before]);  // leave invalid bytes alone
        } else {
            utf8_encode(lower_codepoint(cp), out);
        }
    }
    return out;
}

// ── Checksums ────────────────────────────────────────────────────────

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf, 16);
}

// ── Number formatting ────────────────────────────────────────────────

// Shortest representation that round-trips the double exactly.
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return std::string(buf);
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out, 10);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

} // namespace gapcheck::text
