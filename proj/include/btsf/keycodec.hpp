#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btsf/bytes.hpp"
#include "btsf/error.hpp"

namespace btsf {

// 20-byte device identifier. Hex in logs, base32 in paths and metadata.
struct PeerId {
    std::array<std::uint8_t, 20> bytes{};

    std::string hex() const { return to_hex(ByteView(bytes.data(), bytes.size())); }
    std::string b32() const;
    bool operator==(const PeerId&) const = default;
};

Result<PeerId> peer_id_from_bytes(ByteView raw);

enum class ShareWidth { w20, w32 };

// SHA-1 of a folder's master key (20 bytes); a 32-byte variant also appears
// on the wire.
struct ShareId {
    Bytes bytes;
    ShareWidth width = ShareWidth::w20;

    std::string hex() const { return to_hex(ByteView(bytes.data(), bytes.size())); }
    bool operator==(const ShareId&) const = default;
};

Result<ShareId> share_id_from_bytes(ByteView raw);

enum class Permission {
    read_write,
    read_only,
    encrypted_node,
    legacy_read_only,
    time_limited,
};

const char* permission_name(Permission p);

// Folder master key: a type letter followed by 32 base32 symbols, or 64
// symbols for the long read-only form carrying an extra data-key segment.
struct MasterKey {
    char key_type = 0;
    std::string body;
    std::optional<std::string> extra;
    Permission permission = Permission::read_write;

    std::string text() const;
};

struct SyncLink {
    std::optional<std::string> folder_name; // f=, percent-decoded
    std::optional<std::string> size_approx; // sz=, kept as text
    std::optional<Bytes> folder_id;         // s=, 20 bytes
    std::optional<std::string> temp_key;    // i=, base32 text
    std::optional<std::int64_t> expiry;     // e=, epoch seconds
    std::optional<PeerId> peer_id;          // p=
    std::vector<std::pair<std::string, std::string>> extras; // unknown params, raw
    std::vector<std::pair<std::string, std::string>> raw_params; // full multiset
    std::vector<std::string> warnings;
};

struct NetAddr {
    std::array<std::uint8_t, 4> ip{};
    std::uint16_t port = 0;

    std::string ip_string() const;
    std::string to_string() const;
    auto operator<=>(const NetAddr&) const = default;
};

// Base-32 over A..Z,2..7, 5-bit groups MSB first, no padding.
std::string base32_encode(ByteView data);
Result<Bytes> base32_decode(std::string_view text);

Result<MasterKey> classify_key(std::string_view key);
Result<ShareId> share_id_of_key(std::string_view key);
Result<SyncLink> parse_sync_link(std::string_view url);

// First 4 bytes IPv4, last 2 port, both big-endian.
Result<NetAddr> decode_netaddr(ByteView raw);
std::array<std::uint8_t, 6> encode_netaddr(const NetAddr& addr);

std::optional<NetAddr> parse_ip_port(std::string_view text); // "1.2.3.4:56"
std::optional<std::array<std::uint8_t, 4>> parse_ipv4(std::string_view text);

std::array<std::uint8_t, 20> sha1_digest(ByteView data);

} // namespace btsf
