#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace correct::util {

using Rng = std::mt19937_64;

// std::shuffle and the std distributions are implementation-defined; these helpers keep
// seeded results identical across standard libraries.

inline std::size_t bounded(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[bounded(rng, i)]);
    }
}

}  // namespace correct::util
