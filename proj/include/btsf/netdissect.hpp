#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "btsf/bytes.hpp"
#include "btsf/error.hpp"
#include "btsf/keycodec.hpp"

namespace btsf::netdissect {

enum class Transport { udp, tcp, other };

struct CaptureRecord {
    std::int64_t ts_sec = 0;
    std::int32_t ts_usec = 0;
    NetAddr src;
    NetAddr dst;
    Transport transport = Transport::other;
    Bytes payload;
    std::size_t index = 0; // record position in the capture
};

struct SkippedRecord {
    std::size_t index;
    std::string reason;
};

struct Capture {
    std::vector<CaptureRecord> records;
    std::vector<SkippedRecord> skipped;
    bool truncated_tail = false; // file ended mid-record
    std::size_t total_records = 0;
};

// Classic capture format only: magic 0xA1B2C3D4, either endianness,
// Ethernet II link layer. Non-IPv4 and fragmented packets are counted and
// skipped with reasons; a truncated tail stops at the last whole record.
Result<Capture> read_capture(const std::filesystem::path& file);

struct TrackerGetPeers {
    NetAddr la;
    std::int64_t lp = 0;
    PeerId peer;
    ShareId share;
};

struct ResponsePeer {
    NetAddr a;  // external
    NetAddr la; // internal
    PeerId p;
};

struct TrackerPeersResponse {
    NetAddr ea;
    std::vector<ResponsePeer> peers; // never empty
    ShareId share;
    std::int64_t time = 0;
};

struct LanPing {
    std::int64_t port = 0;
    PeerId peer;
    std::vector<ShareId> shares;
};

using DiscoveryPayload = std::variant<TrackerGetPeers, TrackerPeersResponse, LanPing>;

struct DiscoveryMessage {
    DiscoveryPayload payload;
    std::size_t record_index = 0;
    std::int64_t ts_sec = 0;
    std::int32_t ts_usec = 0;
    NetAddr src;
    NetAddr dst;
};

// Payload dissection: "BSYNC"+00 LAN pings, 0x01-headed tracker datagrams
// behind a 20-byte transport header, then a last-resort scan for a bencode
// dict with an "m" key. Undissectable payloads yield nullopt plus a reason.
std::optional<DiscoveryPayload> dissect_udp_payload(ByteView payload,
                                                    std::string* reason = nullptr);

enum class EndpointClass {
    tracker,
    relay,
    lan_multicast,
    upnp_ssdp,
    nat_pmp,
    mobile_push_proxy,
    unknown,
};

const char* endpoint_class_name(EndpointClass c);

struct RegistryEntry {
    std::optional<std::array<std::uint8_t, 4>> ip; // absent: match by port alone
    std::optional<std::uint16_t> port;
    EndpointClass cls = EndpointClass::unknown;
    std::string url;
};

class EndpointRegistry {
public:
    // The built-in rendezvous/relay/multicast endpoint table.
    static EndpointRegistry builtin();
    static Result<EndpointRegistry> from_json(const nlohmann::json& doc);

    EndpointClass classify(const NetAddr& addr) const;
    const std::vector<RegistryEntry>& entries() const { return entries_; }

private:
    std::vector<RegistryEntry> entries_;
};

struct ExtractStats {
    std::size_t total = 0;
    std::size_t udp = 0;
    std::size_t tcp = 0;
    std::size_t other = 0;
    std::size_t dissected = 0;
    std::size_t undissected_udp = 0;
    std::map<std::string, std::size_t> by_class; // endpoint class counts over src+dst
};

struct Extraction {
    std::vector<DiscoveryMessage> messages;
    ExtractStats stats;
    std::vector<SkippedRecord> skipped;
    bool truncated_tail = false;
};

Result<Extraction> extract_discovery(const std::filesystem::path& file,
                                     const EndpointRegistry& registry);

} // namespace btsf::netdissect
