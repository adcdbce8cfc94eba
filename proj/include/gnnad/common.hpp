// Shared small utilities: error types, string helpers, strict number parsing.
#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gnnad {

/// Raised for malformed user input (files, configs, CLI values). The CLI maps
/// this to exit status 1; anything else escaping to main is an internal error.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

inline std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Parses the whole (trimmed) string as a double. Accepts nan/inf spellings;
/// rejects trailing garbage and empty input.
inline bool parse_double(std::string_view raw, double& out) {
    std::string_view s = trim(raw);
    if (s.empty()) return false;
    std::string buf(s);
    const char* p = buf.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(p, &end);
    if (end != p + buf.size()) return false;
    out = v;
    return true;
}

inline bool parse_long(std::string_view raw, long long& out) {
    std::string_view s = trim(raw);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Splits one line on a separator; does not interpret quotes.
inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

/// Splits a CSV line honoring double quotes; `""` inside quotes is an escaped
/// quote. Returned fields are unquoted and untrimmed.
inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
                else quoted = false;
            } else cur += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else cur += c;
    }
    out.push_back(std::move(cur));
    return out;
}

/// Iterates lines of a text blob, tolerating \n and \r\n endings. Callback
/// receives (line, zero-based line number). Empty input yields no lines.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    size_t start = 0, lineno = 0;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line = (nl == std::string_view::npos)
                                    ? text.substr(start)
                                    : text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(line, lineno++);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
}

/// Parses a 64-bit hex field (as written by the checkpoint/forest formats).
inline bool parse_hex_u64(std::string_view raw, uint64_t& out) {
    std::string_view s = trim(raw);
    if (s.empty() || s.size() > 16) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 16);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace gnnad
