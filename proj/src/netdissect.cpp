#include "btsf/netdissect.hpp"

#include <cstring>
#include <fstream>

#include "btsf/bencode.hpp"

namespace btsf::netdissect {

using bencode::BValue;

namespace {

constexpr std::uint32_t kMagicBE = 0xA1B2C3D4;
constexpr std::uint32_t kMagicLE = 0xD4C3B2A1;

std::uint32_t read_u32(const std::uint8_t* p, bool swap) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    if (swap) v = __builtin_bswap32(v);
    return v;
}

std::uint16_t read_u16be(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

} // namespace

Result<Capture> read_capture(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return make_error(Errc::io_failure, "cannot open " + file.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 24)
        return make_error(Errc::bad_magic, file.string() + " is too short for a capture header");

    // magic read with host byte order: a match means file order == host
    // order, the reversed value means every header field needs a swap
    std::uint32_t magic = read_u32(data.data(), false);
    bool swap;
    if (magic == kMagicBE) {
        swap = false;
    } else if (magic == kMagicLE) {
        swap = true;
    } else {
        return make_error(Errc::bad_magic, file.string() + " lacks the classic capture magic");
    }

    Capture cap;
    std::size_t pos = 24;
    std::size_t index = 0;
    while (pos < data.size()) {
        if (pos + 16 > data.size()) {
            cap.truncated_tail = true;
            break;
        }
        std::uint32_t ts_sec = read_u32(data.data() + pos, swap);
        std::uint32_t ts_usec = read_u32(data.data() + pos + 4, swap);
        std::uint32_t incl = read_u32(data.data() + pos + 8, swap);
        std::uint32_t orig = read_u32(data.data() + pos + 12, swap);
        pos += 16;
        if (incl > 0x04000000 || pos + incl > data.size()) {
            cap.truncated_tail = true;
            break;
        }
        const std::uint8_t* pkt = data.data() + pos;
        pos += incl;
        std::size_t idx = index++;
        cap.total_records = index;

        auto skip = [&](std::string reason) {
            cap.skipped.push_back({idx, std::move(reason)});
        };
        if (incl < orig) {
            skip("snapshot shorter than original packet");
            continue;
        }
        if (incl < 14 + 20) {
            skip("frame too short for Ethernet+IPv4");
            continue;
        }
        std::uint16_t ethertype = read_u16be(pkt + 12);
        if (ethertype != 0x0800) {
            skip("not IPv4 (ethertype 0x" + to_hex(ByteView(pkt + 12, 2)) + ")");
            continue;
        }
        const std::uint8_t* ip = pkt + 14;
        std::size_t ip_len = incl - 14;
        if ((ip[0] >> 4) != 4) {
            skip("not IPv4");
            continue;
        }
        std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
        if (ihl < 20 || ip_len < ihl) {
            skip("bad IPv4 header length");
            continue;
        }
        std::uint16_t frag = read_u16be(ip + 6);
        if ((frag & 0x2000) != 0 || (frag & 0x1FFF) != 0) {
            skip("fragmented");
            continue;
        }
        std::uint16_t total_len = read_u16be(ip + 2);
        if (total_len < ihl || total_len > ip_len) {
            skip("IPv4 total length inconsistent");
            continue;
        }
        std::uint8_t proto = ip[9];

        CaptureRecord rec;
        rec.ts_sec = ts_sec;
        rec.ts_usec = static_cast<std::int32_t>(ts_usec);
        rec.index = idx;
        std::copy(ip + 12, ip + 16, rec.src.ip.begin());
        std::copy(ip + 16, ip + 20, rec.dst.ip.begin());

        const std::uint8_t* l4 = ip + ihl;
        std::size_t l4_len = total_len - ihl;
        if (proto == 17) {
            if (l4_len < 8) {
                skip("UDP header truncated");
                continue;
            }
            rec.transport = Transport::udp;
            rec.src.port = read_u16be(l4);
            rec.dst.port = read_u16be(l4 + 2);
            std::uint16_t udp_len = read_u16be(l4 + 4);
            if (udp_len < 8 || udp_len > l4_len) {
                skip("UDP length inconsistent");
                continue;
            }
            rec.payload.assign(l4 + 8, l4 + udp_len);
        } else if (proto == 6) {
            if (l4_len < 20) {
                skip("TCP header truncated");
                continue;
            }
            rec.transport = Transport::tcp;
            rec.src.port = read_u16be(l4);
            rec.dst.port = read_u16be(l4 + 2);
            std::size_t doff = static_cast<std::size_t>(l4[12] >> 4) * 4;
            if (doff < 20 || doff > l4_len) {
                skip("TCP data offset inconsistent");
                continue;
            }
            rec.payload.assign(l4 + doff, l4 + l4_len);
        } else {
            rec.transport = Transport::other;
            rec.payload.assign(l4, l4 + l4_len);
        }
        cap.records.push_back(std::move(rec));
    }
    cap.total_records = index;
    return cap;
}

namespace {

std::optional<NetAddr> addr_field(const BValue& dict, std::string_view key) {
    const BValue* v = dict.find(key);
    if (!v || !v->is_bytes() || v->as_bytes().size() != 6) return std::nullopt;
    auto a = decode_netaddr(ByteView(v->as_bytes().data(), 6));
    if (!a.ok()) return std::nullopt;
    return a.take();
}

std::optional<PeerId> peer_field(const BValue& dict, std::string_view key) {
    const BValue* v = dict.find(key);
    if (!v || !v->is_bytes()) return std::nullopt;
    auto p = peer_id_from_bytes(ByteView(v->as_bytes().data(), v->as_bytes().size()));
    if (!p.ok()) return std::nullopt;
    return p.take();
}

std::optional<ShareId> share_field(const BValue& value) {
    if (!value.is_bytes()) return std::nullopt;
    auto s = share_id_from_bytes(ByteView(value.as_bytes().data(), value.as_bytes().size()));
    if (!s.ok()) return std::nullopt;
    return s.take();
}

std::optional<DiscoveryPayload> payload_from_dict(const BValue& dict, std::string* reason) {
    const BValue* m = dict.find("m");
    if (!m || !m->is_bytes()) {
        if (reason) *reason = "bencode dict has no 'm' key";
        return std::nullopt;
    }
    std::string kind = m->as_text();
    if (kind == "ping") {
        LanPing ping;
        const BValue* port = dict.find("port");
        if (!port || !port->is_int()) {
            if (reason) *reason = "ping without integer 'port'";
            return std::nullopt;
        }
        ping.port = port->as_int();
        auto peer = peer_field(dict, "peer");
        if (!peer) {
            if (reason) *reason = "ping without 20-byte 'peer'";
            return std::nullopt;
        }
        ping.peer = *peer;
        const BValue* shares = dict.find("shares");
        if (shares && shares->is_list()) {
            for (const BValue& s : shares->as_list()) {
                auto sid = share_field(s);
                if (sid) ping.shares.push_back(std::move(*sid));
            }
        }
        return DiscoveryPayload{std::move(ping)};
    }
    if (kind == "get_peers") {
        TrackerGetPeers msg;
        auto la = addr_field(dict, "la");
        auto peer = peer_field(dict, "peer");
        const BValue* lp = dict.find("lp");
        const BValue* share = dict.find("share");
        if (!la || !peer || !share) {
            if (reason) *reason = "get_peers missing la/peer/share";
            return std::nullopt;
        }
        auto sid = share_field(*share);
        if (!sid) {
            if (reason) *reason = "get_peers share is not 20 or 32 bytes";
            return std::nullopt;
        }
        msg.la = *la;
        msg.peer = *peer;
        msg.share = std::move(*sid);
        msg.lp = lp && lp->is_int() ? lp->as_int() : 0;
        return DiscoveryPayload{std::move(msg)};
    }
    if (kind == "peers") {
        TrackerPeersResponse msg;
        auto ea = addr_field(dict, "ea");
        const BValue* share = dict.find("share");
        const BValue* peers = dict.find("peers");
        const BValue* time = dict.find("time");
        if (!ea || !share || !peers || !peers->is_list()) {
            if (reason) *reason = "peers response missing ea/share/peers";
            return std::nullopt;
        }
        auto sid = share_field(*share);
        if (!sid) {
            if (reason) *reason = "peers response share is not 20 or 32 bytes";
            return std::nullopt;
        }
        for (const BValue& p : peers->as_list()) {
            if (!p.is_dict()) continue;
            auto a = addr_field(p, "a");
            auto la = addr_field(p, "la");
            auto pid = peer_field(p, "p");
            if (!a || !la || !pid) continue;
            msg.peers.push_back({*a, *la, *pid});
        }
        if (msg.peers.empty()) {
            // responses always carry at least the originating peer
            if (reason) *reason = "peers response with empty peer list";
            return std::nullopt;
        }
        msg.ea = *ea;
        msg.share = std::move(*sid);
        msg.time = time && time->is_int() ? time->as_int() : 0;
        return DiscoveryPayload{std::move(msg)};
    }
    if (reason) *reason = "unknown message type '" + kind + "'";
    return std::nullopt;
}

std::optional<DiscoveryPayload> try_dict_at(ByteView payload, std::size_t offset,
                                            std::string* reason) {
    if (offset >= payload.size() || payload[offset] != 'd') return std::nullopt;
    auto decoded = bencode::decode(payload.subspan(offset));
    if (!decoded.ok()) {
        if (reason) *reason = decoded.error().to_string();
        return std::nullopt;
    }
    if (!decoded.value().value.is_dict()) return std::nullopt;
    return payload_from_dict(decoded.value().value, reason);
}

} // namespace

std::optional<DiscoveryPayload> dissect_udp_payload(ByteView payload, std::string* reason) {
    if (reason) reason->clear();

    // stage 1: LAN discovery frame
    static const std::uint8_t kBsync[5] = {'B', 'S', 'Y', 'N', 'C'};
    if (payload.size() > 6 && std::equal(kBsync, kBsync + 5, payload.begin()) &&
        payload[5] == 0x00) {
        if (auto msg = try_dict_at(payload, 6, reason)) return msg;
    }

    // stage 2: tracker datagram behind a 20-byte transport header
    // (type 0 / version 1 first byte; a null filler is tolerated on either
    // side of the header)
    std::size_t start = 0;
    if (payload.size() > 1 && payload[0] == 0x00 && payload[1] == 0x01) start = 1;
    if (payload.size() > start && payload[start] == 0x01) {
        std::size_t after = start + 20;
        if (after < payload.size()) {
            if (auto msg = try_dict_at(payload, after, reason)) return msg;
            if (payload[after] == 0x00) {
                if (auto msg = try_dict_at(payload, after + 1, reason)) return msg;
            }
        }
    }

    // stage 3: scan for a decodable dict carrying an 'm' key
    for (std::size_t i = 0; i < payload.size(); ++i) {
        if (payload[i] != 'd') continue;
        std::string local;
        if (auto msg = try_dict_at(payload, i, &local)) return msg;
    }
    if (reason && reason->empty()) *reason = "no discovery dictionary found";
    return std::nullopt;
}

const char* endpoint_class_name(EndpointClass c) {
    switch (c) {
        case EndpointClass::tracker: return "Tracker";
        case EndpointClass::relay: return "Relay";
        case EndpointClass::lan_multicast: return "LanMulticast";
        case EndpointClass::upnp_ssdp: return "UpnpSsdp";
        case EndpointClass::nat_pmp: return "NatPmp";
        case EndpointClass::mobile_push_proxy: return "MobilePushProxy";
        case EndpointClass::unknown: return "Unknown";
    }
    return "Unknown";
}

static std::optional<EndpointClass> endpoint_class_of(std::string_view name) {
    for (int c = 0; c <= static_cast<int>(EndpointClass::unknown); ++c) {
        auto cls = static_cast<EndpointClass>(c);
        if (name == endpoint_class_name(cls)) return cls;
    }
    return std::nullopt;
}

EndpointRegistry EndpointRegistry::builtin() {
    EndpointRegistry reg;
    auto add = [&](std::array<std::uint8_t, 4> ip, std::uint16_t port, EndpointClass cls,
                   std::string url) {
        reg.entries_.push_back({ip, port, cls, std::move(url)});
    };
    add({52, 0, 104, 40}, 3000, EndpointClass::tracker, "t.usyncapp.com");
    add({52, 0, 102, 230}, 3000, EndpointClass::tracker, "t.usyncapp.com");
    add({52, 1, 40, 103}, 3000, EndpointClass::tracker, "t.usyncapp.com");
    add({52, 1, 1, 135}, 3000, EndpointClass::tracker, "t.usyncapp.com");
    add({67, 215, 231, 242}, 3000, EndpointClass::relay, "r.usyncapp.com");
    add({67, 215, 229, 106}, 3000, EndpointClass::relay, "r.usyncapp.com");
    add({239, 192, 0, 0}, 3838, EndpointClass::lan_multicast, "");
    add({239, 255, 255, 250}, 1900, EndpointClass::upnp_ssdp, "");
    // NAT-PMP speaks to whatever the default gateway is; match on port alone
    reg.entries_.push_back({std::nullopt, 5351, EndpointClass::nat_pmp, ""});
    add({54, 235, 182, 157}, 3000, EndpointClass::mobile_push_proxy, "");
    return reg;
}

Result<EndpointRegistry> EndpointRegistry::from_json(const nlohmann::json& doc) {
    if (!doc.is_array())
        return make_error(Errc::not_parseable, "registry file must be a JSON array");
    EndpointRegistry reg;
    for (const auto& row : doc) {
        if (!row.is_object() || !row.contains("class"))
            return make_error(Errc::not_parseable, "registry row must be an object with 'class'");
        RegistryEntry e;
        auto cls = endpoint_class_of(row["class"].get<std::string>());
        if (!cls)
            return make_error(Errc::not_parseable,
                              "unknown endpoint class " + row["class"].dump());
        e.cls = *cls;
        if (row.contains("ip") && !row["ip"].is_null()) {
            auto ip = parse_ipv4(row["ip"].get<std::string>());
            if (!ip)
                return make_error(Errc::not_parseable, "bad registry ip " + row["ip"].dump());
            e.ip = *ip;
        }
        if (row.contains("port") && !row["port"].is_null())
            e.port = row["port"].get<std::uint16_t>();
        if (row.contains("url") && row["url"].is_string()) e.url = row["url"].get<std::string>();
        reg.entries_.push_back(std::move(e));
    }
    return reg;
}

EndpointClass EndpointRegistry::classify(const NetAddr& addr) const {
    for (const RegistryEntry& e : entries_) {
        if (e.ip && *e.ip != addr.ip) continue;
        if (e.port && *e.port != addr.port) continue;
        if (!e.ip && !e.port) continue; // refuse a match-all row
        return e.cls;
    }
    return EndpointClass::unknown;
}

Result<Extraction> extract_discovery(const std::filesystem::path& file,
                                     const EndpointRegistry& registry) {
    auto cap = read_capture(file);
    if (!cap.ok()) return cap.error();

    Extraction out;
    out.skipped = cap.value().skipped;
    out.truncated_tail = cap.value().truncated_tail;
    out.stats.total = cap.value().total_records;
    for (const CaptureRecord& rec : cap.value().records) {
        switch (rec.transport) {
            case Transport::udp: ++out.stats.udp; break;
            case Transport::tcp: ++out.stats.tcp; break;
            case Transport::other: ++out.stats.other; break;
        }
        if (rec.transport != Transport::udp) continue;
        std::string reason;
        auto payload = dissect_udp_payload(ByteView(rec.payload.data(), rec.payload.size()),
                                           &reason);
        if (!payload) {
            ++out.stats.undissected_udp;
            continue;
        }
        ++out.stats.dissected;
        ++out.stats.by_class[endpoint_class_name(registry.classify(rec.src))];
        ++out.stats.by_class[endpoint_class_name(registry.classify(rec.dst))];
        DiscoveryMessage msg;
        msg.payload = std::move(*payload);
        msg.record_index = rec.index;
        msg.ts_sec = rec.ts_sec;
        msg.ts_usec = rec.ts_usec;
        msg.src = rec.src;
        msg.dst = rec.dst;
        out.messages.push_back(std::move(msg));
    }
    return out;
}

} // namespace btsf::netdissect
