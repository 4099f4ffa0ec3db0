// Deterministic random generators shared by the unit and acceptance suites.
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "btsf/bencode.hpp"
#include "btsf/bytes.hpp"

namespace testgen {

using btsf::Bytes;
using btsf::bencode::BValue;

inline std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t n) {
    return rng() % n;
}

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t len) {
    Bytes out(len);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 0xFF);
    return out;
}

// Random bencode value tree, depth-bounded. Keys are kept unique per dict.
inline BValue random_bvalue(std::mt19937_64& rng, int depth = 0) {
    int pick = depth >= 4 ? static_cast<int>(rng_below(rng, 2))
                          : static_cast<int>(rng_below(rng, 4));
    switch (pick) {
        case 0:
            return BValue::bin(random_bytes(rng, rng_below(rng, 12)));
        case 1:
            return BValue::integer(static_cast<std::int64_t>(rng()));
        case 2: {
            BValue::List items;
            std::size_t n = rng_below(rng, 4);
            for (std::size_t i = 0; i < n; ++i) items.push_back(random_bvalue(rng, depth + 1));
            return BValue::list(std::move(items));
        }
        default: {
            BValue::Dict entries;
            std::size_t n = rng_below(rng, 4);
            for (std::size_t i = 0; i < n; ++i) {
                Bytes key = random_bytes(rng, 1 + rng_below(rng, 6));
                bool dup = false;
                for (const auto& [k, v] : entries)
                    if (k == key) dup = true;
                if (dup) continue;
                entries.emplace_back(std::move(key), random_bvalue(rng, depth + 1));
            }
            return BValue::dict(std::move(entries));
        }
    }
}

} // namespace testgen
