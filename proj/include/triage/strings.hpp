#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

inline bool is_ascii_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = ascii_lower(c);
    return out;
}

// Splits on any non-alphanumeric byte, lowercases, drops empty pieces.
std::vector<std::string> tokenize_alnum(std::string_view text);

std::string trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// FNV-1a 64-bit, used for stable non-cryptographic fingerprints.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string to_hex(std::uint64_t value);  // 16 lowercase hex chars

// Shortest decimal form that round-trips the double (std::to_chars).
std::string format_double(double v);

}  // namespace triage
