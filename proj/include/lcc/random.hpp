#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace lcc {

using Rng = std::mt19937_64;

/// Generator keyed by a seed plus stream coordinates (pass, sweep, node, ...).
/// The same key always yields the same stream, independent of call order.
inline Rng keyed_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * key.size());
    words.push_back(static_cast<std::uint32_t>(seed));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    for (auto k : key) {
        words.push_back(static_cast<std::uint32_t>(k));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

}  // namespace lcc
