#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace glhnn {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// 64-bit FNV-1a: for each byte, h ^= byte; h *= 0x100000001b3 (mod 2^64),
// starting from 0xcbf29ce484222325. Pass a previous result as `h` to
// continue hashing.
constexpr std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t h = kFnvOffsetBasis) noexcept {
    for (unsigned char b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffsetBasis) noexcept {
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace glhnn
