#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace clickdet::text {

struct DecodedChar {
    char32_t cp = 0;
    int nbytes = 1;
    bool valid = true;
};

// Decodes the UTF-8 sequence starting at s[i]. Invalid bytes are reported
// with valid=false and consumed one at a time so malformed input passes
// through unchanged instead of derailing the scan.
inline DecodedChar utf8_decode(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1, true};
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else return {b0, 1, false};
    if (i + static_cast<std::size_t>(len) > s.size()) return {b0, 1, false};
    for (int k = 1; k < len; ++k) {
        const auto bk = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((bk & 0xC0) != 0x80) return {b0, 1, false};
        cp = (cp << 6) | (bk & 0x3F);
    }
    return {cp, len, true};
}

inline void utf8_append(std::string& out, char32_t cp) {
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

inline bool is_space_cp(char32_t cp) {
    switch (cp) {
        case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
        case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
        case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Letter classification for the bag-of-words splitters. ASCII resolves via
// isalpha semantics; beyond ASCII everything counts as a letter except the
// common punctuation, symbol and whitespace blocks seen in news headlines.
inline bool is_letter_cp(char32_t cp) {
    if (cp < 0x80) return (cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z');
    if (is_space_cp(cp)) return false;
    if (cp >= 0x00A1 && cp <= 0x00BF) return false;  // Latin-1 punctuation
    if (cp == 0x00D7 || cp == 0x00F7) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
    if (cp >= 0x20A0 && cp <= 0x20CF) return false;  // currency signs
    if (cp >= 0x2100 && cp <= 0x2BFF) return false;  // symbols and arrows
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
    return true;
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = ascii_lower(c);
    return out;
}

namespace detail {

struct ComposeEntry {
    char32_t base;
    char32_t mark;
    char32_t composed;
};

// Canonical composition pairs for the Latin repertoire that shows up in
// news text: base letter + combining mark -> precomposed character.
inline const std::unordered_map<std::uint64_t, char32_t>& compose_table() {
    static const std::unordered_map<std::uint64_t, char32_t> table = [] {
        constexpr ComposeEntry entries[] = {
            {U'A', 0x300, 0xC0}, {U'E', 0x300, 0xC8}, {U'I', 0x300, 0xCC},
            {U'O', 0x300, 0xD2}, {U'U', 0x300, 0xD9},
            {U'a', 0x300, 0xE0}, {U'e', 0x300, 0xE8}, {U'i', 0x300, 0xEC},
            {U'o', 0x300, 0xF2}, {U'u', 0x300, 0xF9},
            {U'A', 0x301, 0xC1}, {U'E', 0x301, 0xC9}, {U'I', 0x301, 0xCD},
            {U'O', 0x301, 0xD3}, {U'U', 0x301, 0xDA}, {U'Y', 0x301, 0xDD},
            {U'a', 0x301, 0xE1}, {U'e', 0x301, 0xE9}, {U'i', 0x301, 0xED},
            {U'o', 0x301, 0xF3}, {U'u', 0x301, 0xFA}, {U'y', 0x301, 0xFD},
            {U'C', 0x301, 0x106}, {U'c', 0x301, 0x107},
            {U'N', 0x301, 0x143}, {U'n', 0x301, 0x144},
            {U'S', 0x301, 0x15A}, {U's', 0x301, 0x15B},
            {U'Z', 0x301, 0x179}, {U'z', 0x301, 0x17A},
            {U'A', 0x302, 0xC2}, {U'E', 0x302, 0xCA}, {U'I', 0x302, 0xCE},
            {U'O', 0x302, 0xD4}, {U'U', 0x302, 0xDB},
            {U'a', 0x302, 0xE2}, {U'e', 0x302, 0xEA}, {U'i', 0x302, 0xEE},
            {U'o', 0x302, 0xF4}, {U'u', 0x302, 0xFB},
            {U'A', 0x303, 0xC3}, {U'N', 0x303, 0xD1}, {U'O', 0x303, 0xD5},
            {U'a', 0x303, 0xE3}, {U'n', 0x303, 0xF1}, {U'o', 0x303, 0xF5},
            {U'A', 0x304, 0x100}, {U'a', 0x304, 0x101},
            {U'E', 0x304, 0x112}, {U'e', 0x304, 0x113},
            {U'I', 0x304, 0x12A}, {U'i', 0x304, 0x12B},
            {U'O', 0x304, 0x14C}, {U'o', 0x304, 0x14D},
            {U'U', 0x304, 0x16A}, {U'u', 0x304, 0x16B},
            {U'A', 0x306, 0x102}, {U'a', 0x306, 0x103},
            {U'G', 0x306, 0x11E}, {U'g', 0x306, 0x11F},
            {U'A', 0x308, 0xC4}, {U'E', 0x308, 0xCB}, {U'I', 0x308, 0xCF},
            {U'O', 0x308, 0xD6}, {U'U', 0x308, 0xDC},
            {U'a', 0x308, 0xE4}, {U'e', 0x308, 0xEB}, {U'i', 0x308, 0xEF},
            {U'o', 0x308, 0xF6}, {U'u', 0x308, 0xFC}, {U'y', 0x308, 0xFF},
            {U'A', 0x30A, 0xC5}, {U'a', 0x30A, 0xE5},
            {U'C', 0x30C, 0x10C}, {U'c', 0x30C, 0x10D},
            {U'S', 0x30C, 0x160}, {U's', 0x30C, 0x161},
            {U'Z', 0x30C, 0x17D}, {U'z', 0x30C, 0x17E},
            {U'C', 0x327, 0xC7}, {U'c', 0x327, 0xE7},
            {U'S', 0x327, 0x15E}, {U's', 0x327, 0x15F},
        };
        std::unordered_map<std::uint64_t, char32_t> m;
        for (const auto& e : entries) {
            m.emplace((static_cast<std::uint64_t>(e.base) << 32) | e.mark, e.composed);
        }
        return m;
    }();
    return table;
}

inline bool is_combining_mark(char32_t cp) { return cp >= 0x300 && cp <= 0x36F; }

} // namespace detail

// Canonical composition for Latin base + combining mark sequences (the NFC
// cases occurring in this corpus). Marks without a composition stay as-is;
// already-composed text is returned unchanged.
inline std::string compose_nfc_latin(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    bool have_pending = false;
    char32_t pending = 0;
    auto flush = [&] {
        if (have_pending) {
            utf8_append(out, pending);
            have_pending = false;
        }
    };
    while (i < s.size()) {
        const auto d = utf8_decode(s, i);
        if (!d.valid) {
            flush();
            out.append(s, i, static_cast<std::size_t>(d.nbytes));
            i += static_cast<std::size_t>(d.nbytes);
            continue;
        }
        if (have_pending && detail::is_combining_mark(d.cp)) {
            const auto key = (static_cast<std::uint64_t>(pending) << 32) | d.cp;
            const auto& table = detail::compose_table();
            if (auto it = table.find(key); it != table.end()) {
                pending = it->second;  // composed char may take a further mark
                i += static_cast<std::size_t>(d.nbytes);
                continue;
            }
        }
        flush();
        pending = d.cp;
        have_pending = true;
        i += static_cast<std::size_t>(d.nbytes);
    }
    flush();
    return out;
}

// Collapses any run of Unicode whitespace to a single ASCII space and trims
// both ends.
inline std::string collapse_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    bool pending_space = false;
    while (i < s.size()) {
        const auto d = utf8_decode(s, i);
        if (d.valid && is_space_cp(d.cp)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) {
                out.push_back(' ');
                pending_space = false;
            }
            out.append(s, i, static_cast<std::size_t>(d.nbytes));
        }
        i += static_cast<std::size_t>(d.nbytes);
    }
    return out;
}

// Whitespace-delimited tokens.
inline std::vector<std::string> split_whitespace(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto d = utf8_decode(s, i);
        if (d.valid && is_space_cp(d.cp)) {
            if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.append(s, i, static_cast<std::size_t>(d.nbytes));
        }
        i += static_cast<std::size_t>(d.nbytes);
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Maximal letter runs within a token ("split on non-letter characters").
inline std::vector<std::string> letter_runs(std::string_view token) {
    std::vector<std::string> out;
    std::string cur;
    std::size_t i = 0;
    while (i < token.size()) {
        const auto d = utf8_decode(token, i);
        if (d.valid && is_letter_cp(d.cp)) {
            cur.append(token, i, static_cast<std::size_t>(d.nbytes));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
        i += static_cast<std::size_t>(d.nbytes);
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Code point count (invalid bytes count as one each).
inline std::size_t utf8_length(std::string_view s) {
    std::size_t i = 0, n = 0;
    while (i < s.size()) {
        i += static_cast<std::size_t>(utf8_decode(s, i).nbytes);
        ++n;
    }
    return n;
}

} // namespace clickdet::text
