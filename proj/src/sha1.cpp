#include <array>
#include <cstdint>
#include <cstring>

#include "btsf/keycodec.hpp"

namespace btsf {

// SHA-1 (FIPS 180-4). Verified in tests against the standard vectors.
namespace {

inline std::uint32_t rol(std::uint32_t v, int n) {
    return (v << n) | (v >> (32 - n));
}

struct Sha1State {
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};

    void process_block(const std::uint8_t* p) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(p[i * 4]) << 24) | (std::uint32_t(p[i * 4 + 1]) << 16) |
                   (std::uint32_t(p[i * 4 + 2]) << 8) | std::uint32_t(p[i * 4 + 3]);
        }
        for (int i = 16; i < 80; ++i)
            w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);

        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            std::uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = t;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }
};

} // namespace

std::array<std::uint8_t, 20> sha1_digest(ByteView data) {
    Sha1State st;
    std::size_t full = data.size() / 64;
    for (std::size_t i = 0; i < full; ++i) st.process_block(data.data() + i * 64);

    std::uint8_t tail[128];
    std::size_t rem = data.size() - full * 64;
    std::memcpy(tail, data.data() + full * 64, rem);
    tail[rem] = 0x80;
    std::size_t tail_len = (rem < 56) ? 64 : 128;
    std::memset(tail + rem + 1, 0, tail_len - rem - 1);
    std::uint64_t bits = std::uint64_t(data.size()) * 8;
    for (int i = 0; i < 8; ++i)
        tail[tail_len - 1 - i] = static_cast<std::uint8_t>(bits >> (8 * i));
    st.process_block(tail);
    if (tail_len == 128) st.process_block(tail + 64);

    std::array<std::uint8_t, 20> out{};
    for (int i = 0; i < 5; ++i) {
        out[i * 4] = static_cast<std::uint8_t>(st.h[i] >> 24);
        out[i * 4 + 1] = static_cast<std::uint8_t>(st.h[i] >> 16);
        out[i * 4 + 2] = static_cast<std::uint8_t>(st.h[i] >> 8);
        out[i * 4 + 3] = static_cast<std::uint8_t>(st.h[i]);
    }
    return out;
}

} // namespace btsf
