#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sqlcritic {

/// FNV-1a, stable across platforms and runs. Used for resume keys and
/// deterministic per-item seeds.
constexpr uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(uint64_t value);

}  // namespace sqlcritic
