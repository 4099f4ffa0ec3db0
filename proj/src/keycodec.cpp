#include "btsf/keycodec.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace btsf {

static const char kB32Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";

static int b32_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= '2' && c <= '7') return c - '2' + 26;
    return -1;
}

std::string base32_encode(ByteView data) {
    std::string out;
    out.reserve((data.size() * 8 + 4) / 5);
    std::uint32_t acc = 0;
    int bits = 0;
    for (std::uint8_t b : data) {
        acc = (acc << 8) | b;
        bits += 8;
        while (bits >= 5) {
            out.push_back(kB32Alphabet[(acc >> (bits - 5)) & 0x1F]);
            bits -= 5;
        }
    }
    if (bits > 0)
        out.push_back(kB32Alphabet[(acc << (5 - bits)) & 0x1F]);
    return out;
}

Result<Bytes> base32_decode(std::string_view text) {
    // 5n bits must not strand 5 or more: lengths 1, 3, 6 mod 8 are impossible.
    std::size_t rem = text.size() % 8;
    if (rem == 1 || rem == 3 || rem == 6)
        return make_error(Errc::invalid_length,
                          "base32 length " + std::to_string(text.size()) + " strands >=5 bits");
    Bytes out;
    out.reserve(text.size() * 5 / 8);
    std::uint32_t acc = 0;
    int bits = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        int v = b32_value(text[i]);
        if (v < 0)
            return make_error(Errc::invalid_symbol,
                              std::string("invalid base32 symbol '") + text[i] + "'", i);
        acc = (acc << 5) | static_cast<std::uint32_t>(v);
        bits += 5;
        if (bits >= 8) {
            out.push_back(static_cast<std::uint8_t>((acc >> (bits - 8)) & 0xFF));
            bits -= 8;
        }
    }
    return out;
}

std::string PeerId::b32() const {
    return base32_encode(ByteView(bytes.data(), bytes.size()));
}

Result<PeerId> peer_id_from_bytes(ByteView raw) {
    if (raw.size() != 20)
        return make_error(Errc::bad_length,
                          "peer ID must be 20 bytes, got " + std::to_string(raw.size()));
    PeerId id;
    std::copy(raw.begin(), raw.end(), id.bytes.begin());
    return id;
}

Result<ShareId> share_id_from_bytes(ByteView raw) {
    if (raw.size() != 20 && raw.size() != 32)
        return make_error(Errc::bad_share_id_length,
                          "share ID must be 20 or 32 bytes, got " + std::to_string(raw.size()));
    ShareId id;
    id.bytes.assign(raw.begin(), raw.end());
    id.width = raw.size() == 20 ? ShareWidth::w20 : ShareWidth::w32;
    return id;
}

const char* permission_name(Permission p) {
    switch (p) {
        case Permission::read_write: return "ReadWrite";
        case Permission::read_only: return "ReadOnly";
        case Permission::encrypted_node: return "EncryptedNode";
        case Permission::legacy_read_only: return "LegacyReadOnly";
        case Permission::time_limited: return "TimeLimited";
    }
    return "Unknown";
}

std::string MasterKey::text() const {
    std::string out(1, key_type);
    out += body;
    if (extra) out += *extra;
    return out;
}

static std::optional<Permission> permission_of_type(char t) {
    switch (t) {
        case 'A': return Permission::read_write;      // standard read-write
        case 'B': return Permission::read_only;       // derived from 'A'
        case 'C': return Permission::time_limited;    // one-time read-only
        case 'D': return Permission::read_write;      // read-write, seeds encrypted nodes
        case 'E': return Permission::read_only;       // read-only for encrypted nodes
        case 'F': return Permission::encrypted_node;  // stores without decrypting
        case 'R': return Permission::legacy_read_only; // pre-1.0 compatibility
        default: return std::nullopt;
    }
}

Result<MasterKey> classify_key(std::string_view key) {
    if (key.size() != 33 && key.size() != 65)
        return make_error(Errc::bad_length,
                          "key must be 33 or 65 symbols, got " + std::to_string(key.size()));
    for (std::size_t i = 1; i < key.size(); ++i) {
        if (b32_value(key[i]) < 0)
            return make_error(Errc::bad_alphabet,
                              std::string("symbol '") + key[i] + "' outside A-Z,2-7", i);
    }
    auto perm = permission_of_type(key[0]);
    if (!perm)
        return make_error(Errc::unknown_key_type,
                          std::string("unknown key type '") + key[0] + "'", 0);
    MasterKey mk;
    mk.key_type = key[0];
    mk.body = std::string(key.substr(1, 32));
    if (key.size() == 65) mk.extra = std::string(key.substr(33, 32));
    mk.permission = *perm;
    return mk;
}

Result<ShareId> share_id_of_key(std::string_view key) {
    auto mk = classify_key(key);
    if (!mk) return mk.error();
    // The share ID is the SHA-1 of the key's printable form, type letter
    // included; pinned by golden tests so a correction is a one-line change.
    auto digest = sha1_digest(ByteView(reinterpret_cast<const std::uint8_t*>(key.data()), key.size()));
    ShareId id;
    id.bytes.assign(digest.begin(), digest.end());
    id.width = ShareWidth::w20;
    return id;
}

static std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && is_hex_digit(s[i + 1]) && is_hex_digit(s[i + 2])) {
            auto b = from_hex(s.substr(i + 1, 2));
            out.push_back(static_cast<char>((*b)[0]));
            i += 2;
        } else if (s[i] == '+') {
            out.push_back(' ');
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

Result<SyncLink> parse_sync_link(std::string_view url) {
    // Parameters follow '#' or '?', whichever comes first.
    std::size_t mark = url.find_first_of("#?");
    if (mark == std::string_view::npos || mark + 1 >= url.size())
        return make_error(Errc::no_params, "no parameter section after '#' or '?'");
    std::string_view query = url.substr(mark + 1);

    SyncLink link;
    std::size_t pos = 0;
    while (pos <= query.size()) {
        std::size_t amp = query.find('&', pos);
        std::string_view pair = query.substr(pos, amp == std::string_view::npos ? std::string_view::npos
                                                                                : amp - pos);
        pos = amp == std::string_view::npos ? query.size() + 1 : amp + 1;
        if (pair.empty()) continue;
        std::size_t eq = pair.find('=');
        std::string name(eq == std::string_view::npos ? pair : pair.substr(0, eq));
        std::string value(eq == std::string_view::npos ? "" : pair.substr(eq + 1));
        link.raw_params.emplace_back(name, value);

        if (name == "f") {
            link.folder_name = percent_decode(value);
        } else if (name == "sz") {
            link.size_approx = value;
        } else if (name == "s") {
            auto decoded = base32_decode(value);
            if (!decoded || decoded.value().size() != 20)
                return make_error(Errc::bad_base32_param,
                                  "param 's' is not base32 of a 20-byte folder ID");
            link.folder_id = decoded.take();
        } else if (name == "i") {
            if (!base32_decode(value))
                return make_error(Errc::bad_base32_param, "param 'i' is not valid base32");
            link.temp_key = value;
        } else if (name == "e") {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || p != value.data() + value.size() || v < 0) {
                link.warnings.push_back("param 'e' is not a non-negative integer: " + value);
            } else {
                link.expiry = v;
            }
        } else if (name == "p") {
            auto decoded = base32_decode(value);
            if (!decoded || decoded.value().size() != 20)
                return make_error(Errc::bad_base32_param,
                                  "param 'p' is not base32 of a 20-byte peer ID");
            auto pid = peer_id_from_bytes(ByteView(decoded.value().data(), decoded.value().size()));
            link.peer_id = pid.take();
        } else {
            link.extras.emplace_back(name, value);
        }
    }
    if (link.raw_params.empty())
        return make_error(Errc::no_params, "parameter section is empty");
    return link;
}

std::string NetAddr::ip_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", ip[0], ip[1], ip[2], ip[3]);
    return buf;
}

std::string NetAddr::to_string() const {
    return ip_string() + ":" + std::to_string(port);
}

Result<NetAddr> decode_netaddr(ByteView raw) {
    if (raw.size() != 6)
        return make_error(Errc::bad_length,
                          "address field must be 6 bytes, got " + std::to_string(raw.size()));
    NetAddr addr;
    std::copy(raw.begin(), raw.begin() + 4, addr.ip.begin());
    addr.port = static_cast<std::uint16_t>((raw[4] << 8) | raw[5]);
    return addr;
}

std::array<std::uint8_t, 6> encode_netaddr(const NetAddr& addr) {
    return {addr.ip[0], addr.ip[1], addr.ip[2], addr.ip[3],
            static_cast<std::uint8_t>(addr.port >> 8),
            static_cast<std::uint8_t>(addr.port & 0xFF)};
}

std::optional<std::array<std::uint8_t, 4>> parse_ipv4(std::string_view text) {
    std::array<std::uint8_t, 4> ip{};
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        std::size_t dot = i < 3 ? text.find('.', pos) : text.size();
        if (dot == std::string_view::npos) return std::nullopt;
        std::string_view part = text.substr(pos, dot - pos);
        if (part.empty() || part.size() > 3) return std::nullopt;
        unsigned v = 0;
        for (char c : part) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + static_cast<unsigned>(c - '0');
        }
        if (v > 255) return std::nullopt;
        ip[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
        pos = dot + 1;
    }
    return ip;
}

std::optional<NetAddr> parse_ip_port(std::string_view text) {
    std::size_t colon = text.rfind(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto ip = parse_ipv4(text.substr(0, colon));
    if (!ip) return std::nullopt;
    std::string_view port_text = text.substr(colon + 1);
    if (port_text.empty() || port_text.size() > 5) return std::nullopt;
    unsigned port = 0;
    for (char c : port_text) {
        if (c < '0' || c > '9') return std::nullopt;
        port = port * 10 + static_cast<unsigned>(c - '0');
    }
    if (port > 65535) return std::nullopt;
    NetAddr addr;
    addr.ip = *ip;
    addr.port = static_cast<std::uint16_t>(port);
    return addr;
}

} // namespace btsf
