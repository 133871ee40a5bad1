#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace thintact {

// Seed splitting: a single user seed fans out into independent streams keyed
// by a domain tag (and optional indices). stream(seed, tag, i, j) =
// mt19937_64(splitmix64(seed ^ fnv1a64(tag) ^ mix(i, j))).

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::mt19937_64 rng_stream(std::uint64_t seed, std::string_view tag, std::uint64_t i = 0,
                                  std::uint64_t j = 0) {
    std::uint64_t key = seed ^ fnv1a64(tag) ^ splitmix64(i * 0x9e3779b97f4a7c15ull + j);
    return std::mt19937_64(splitmix64(key));
}

}  // namespace thintact
