#include "mathcrawl/hashing.hpp"

#include <cstdio>

namespace mathcrawl::hashing {

uint64_t hash64(std::string_view bytes, uint64_t seed) {
    uint64_t h = 0xCBF29CE484222325ull ^ mix64(seed);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    h ^= static_cast<uint64_t>(bytes.size());
    return mix64(h);
}

std::string Digest128::hex() const {
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return std::string(buf, 32);
}

Digest128 digest128(std::string_view bytes) {
    return Digest128{hash64(bytes, 0x5EEDED5EEDED5EEDull),
                     hash64(bytes, 0xA11CE0FFEE0FFEE0ull)};
}

std::string digest_hex(std::string_view bytes) {
    return digest128(bytes).hex();
}

}  // namespace mathcrawl::hashing
