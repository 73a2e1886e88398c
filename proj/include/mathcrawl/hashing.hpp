#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mathcrawl::hashing {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer; full-avalanche 64-bit mix.
constexpr uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

// Seeded 64-bit content hash (FNV-1a style accumulation + avalanche).
uint64_t hash64(std::string_view bytes, uint64_t seed = 0);

// Member i of the indexed hash family used for MinHash rows. The base
// value is hash64(shingle, seed); each row remixes it with its index.
inline uint64_t family_hash(uint64_t base, uint32_t index) {
    return mix64(base + (static_cast<uint64_t>(index) + 1) * kGolden);
}

struct Digest128 {
    uint64_t hi = 0;
    uint64_t lo = 0;
    std::string hex() const;
    bool operator==(const Digest128&) const = default;
};

// 128-bit content digest (two independently seeded 64-bit lanes).
Digest128 digest128(std::string_view bytes);

// Convenience: hex string of digest128.
std::string digest_hex(std::string_view bytes);

}  // namespace mathcrawl::hashing
