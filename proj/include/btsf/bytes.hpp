#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace btsf {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

std::string to_hex(ByteView data, bool uppercase = true);

// Strict hex: even length, hex digits only. Whitespace is not tolerated here;
// callers that accept hex dumps strip whitespace first.
std::optional<Bytes> from_hex(std::string_view hex);

bool is_hex_digit(char c);

// Display form used by the JSON renderers: printable ASCII passes through,
// anything else is emitted as "hex:XX...".
std::string printable_or_hex(ByteView data);

} // namespace btsf
