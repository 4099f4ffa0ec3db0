#include "btsf/fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "btsf/bencode.hpp"
#include "btsf/correlate.hpp"
#include "btsf/keycodec.hpp"

namespace btsf::fixtures {

namespace fs = std::filesystem;
using bencode::BValue;
using netdissect::LanPing;
using netdissect::TrackerGetPeers;
using netdissect::TrackerPeersResponse;

const char* profile_name(Profile p) {
    switch (p) {
        case Profile::minimal: return "Minimal";
        case Profile::two_peer_sync: return "TwoPeerSync";
        case Profile::deletion_case: return "DeletionCase";
        case Profile::multi_share_lan: return "MultiShareLan";
    }
    return "Minimal";
}

std::optional<Profile> profile_of(std::string_view name) {
    for (Profile p : {Profile::minimal, Profile::two_peer_sync, Profile::deletion_case,
                      Profile::multi_share_lan})
        if (name == profile_name(p)) return p;
    return std::nullopt;
}

nlohmann::ordered_json CaseManifest::to_json() const {
    nlohmann::ordered_json doc;
    doc["schema"] = "btsf-manifest-1";
    doc["seed"] = seed;
    doc["profile"] = profile_name(profile);
    auto devices_json = nlohmann::ordered_json::array();
    for (const Device& d : devices)
        devices_json.push_back({{"name", d.name},
                                {"peer_id_hex", d.peer_id_hex},
                                {"peer_id_b32", d.peer_id_b32}});
    doc["devices"] = std::move(devices_json);
    auto idents_json = nlohmann::ordered_json::array();
    for (const Identity& i : identities)
        idents_json.push_back({{"name", i.name}, {"fingerprint", i.fingerprint}});
    doc["identities"] = std::move(idents_json);
    auto folders_json = nlohmann::ordered_json::array();
    for (const Folder& f : folders)
        folders_json.push_back(
            {{"folder_id", f.folder_id}, {"path", f.path}, {"name", f.name}});
    doc["folders"] = std::move(folders_json);
    auto shares_json = nlohmann::ordered_json::array();
    for (const Share& s : shares) {
        nlohmann::ordered_json js{{"hex", s.hex}, {"width", s.width}, {"key", s.key}};
        if (s.folder_id) js["folder_id"] = *s.folder_id;
        shares_json.push_back(std::move(js));
    }
    doc["shares"] = std::move(shares_json);
    auto files_json = nlohmann::ordered_json::array();
    for (const File& f : files)
        files_json.push_back({{"folder_id", f.folder_id},
                              {"name", f.name},
                              {"deleted", f.deleted},
                              {"mtime", f.mtime},
                              {"size", f.size}});
    doc["files"] = std::move(files_json);
    doc["expected_edges"] = expected_edges;
    doc["expected_timeline"] = expected_timeline;
    doc["log_lines"] = log_lines;
    doc["log_recognized"] = log_recognized;
    doc["capture_messages"] = capture_messages;
    return doc;
}

Result<CaseManifest> CaseManifest::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != "btsf-manifest-1")
        return make_error(Errc::not_parseable, "not a btsf-manifest-1 document");
    CaseManifest m;
    try {
        m.seed = doc.at("seed").get<std::uint64_t>();
        auto profile = profile_of(doc.at("profile").get<std::string>());
        if (!profile) return make_error(Errc::not_parseable, "unknown profile");
        m.profile = *profile;
        for (const auto& jd : doc.at("devices"))
            m.devices.push_back({jd.at("name"), jd.at("peer_id_hex"), jd.at("peer_id_b32")});
        for (const auto& ji : doc.at("identities"))
            m.identities.push_back({ji.at("name"), ji.at("fingerprint")});
        for (const auto& jf : doc.at("folders"))
            m.folders.push_back({jf.at("folder_id"), jf.at("path"), jf.at("name")});
        for (const auto& js : doc.at("shares")) {
            Share s{js.at("hex"), js.at("width"), js.at("key"), std::nullopt};
            if (js.contains("folder_id")) s.folder_id = js["folder_id"].get<std::int64_t>();
            m.shares.push_back(std::move(s));
        }
        for (const auto& jf : doc.at("files"))
            m.files.push_back(
                {jf.at("folder_id"), jf.at("name"), jf.at("deleted"), jf.at("mtime"),
                 jf.at("size")});
        for (const auto& e : doc.at("expected_edges")) m.expected_edges.push_back(e);
        for (const auto& t : doc.at("expected_timeline")) m.expected_timeline.push_back(t);
        m.log_lines = doc.value("log_lines", 0u);
        m.log_recognized = doc.value("log_recognized", 0u);
        m.capture_messages = doc.value("capture_messages", 0u);
    } catch (const nlohmann::json::exception& e) {
        return make_error(Errc::not_parseable, std::string("manifest: ") + e.what());
    }
    return m;
}

// ---------------------------------------------------------------------------
// wire builders

namespace {

Bytes utp_data_header() {
    // type 0 / version 1 data header; remaining fields are irrelevant to the
    // dissector, which only validates the first byte and skips 20 bytes
    Bytes h(20, 0);
    h[0] = 0x01;
    return h;
}

BValue share_value(const ShareId& share) {
    return BValue::bin(share.bytes);
}

BValue peer_value(const PeerId& peer) {
    return BValue::bin(Bytes(peer.bytes.begin(), peer.bytes.end()));
}

BValue addr_value(const NetAddr& addr) {
    auto raw = encode_netaddr(addr);
    return BValue::bin(Bytes(raw.begin(), raw.end()));
}

} // namespace

Bytes build_lan_ping_payload(const LanPing& msg) {
    BValue::List shares;
    for (const ShareId& s : msg.shares) shares.push_back(share_value(s));
    BValue dict = BValue::dict({
        {to_bytes("m"), BValue::str("ping")},
        {to_bytes("peer"), peer_value(msg.peer)},
        {to_bytes("port"), BValue::integer(msg.port)},
        {to_bytes("shares"), BValue::list(std::move(shares))},
    });
    Bytes out = to_bytes("BSYNC");
    out.push_back(0x00);
    Bytes body = bencode::encode(dict);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

Bytes build_get_peers_payload(const TrackerGetPeers& msg) {
    BValue dict = BValue::dict({
        {to_bytes("la"), addr_value(msg.la)},
        {to_bytes("lp"), BValue::integer(msg.lp)},
        {to_bytes("m"), BValue::str("get_peers")},
        {to_bytes("peer"), peer_value(msg.peer)},
        {to_bytes("share"), share_value(msg.share)},
    });
    Bytes out = utp_data_header();
    Bytes body = bencode::encode(dict);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

Bytes build_peers_response_payload(const TrackerPeersResponse& msg) {
    BValue::List peers;
    for (const netdissect::ResponsePeer& p : msg.peers) {
        peers.push_back(BValue::dict({
            {to_bytes("a"), addr_value(p.a)},
            {to_bytes("la"), addr_value(p.la)},
            {to_bytes("p"), peer_value(p.p)},
        }));
    }
    BValue dict = BValue::dict({
        {to_bytes("ea"), addr_value(msg.ea)},
        {to_bytes("m"), BValue::str("peers")},
        {to_bytes("peers"), BValue::list(std::move(peers))},
        {to_bytes("share"), share_value(msg.share)},
        {to_bytes("time"), BValue::integer(msg.time)},
    });
    Bytes out = utp_data_header();
    out.push_back(0x00); // null filler ahead of the dictionary
    Bytes body = bencode::encode(dict);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

// ---------------------------------------------------------------------------
// pcap writing

namespace {

void put_u16le(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32le(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_u16be(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::uint16_t ipv4_checksum(const std::uint8_t* hdr, std::size_t len) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i + 1 < len; i += 2)
        sum += static_cast<std::uint32_t>((hdr[i] << 8) | hdr[i + 1]);
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

Bytes build_frame(const UdpPacket& pkt) {
    Bytes frame;
    // Ethernet II
    static const std::uint8_t dst_mac[6] = {0x02, 0x42, 0xC0, 0xA8, 0x00, 0x01};
    static const std::uint8_t src_mac[6] = {0x02, 0x42, 0xC0, 0xA8, 0x00, 0x02};
    frame.insert(frame.end(), dst_mac, dst_mac + 6);
    frame.insert(frame.end(), src_mac, src_mac + 6);
    put_u16be(frame, 0x0800);

    std::size_t udp_len = 8 + pkt.payload.size();
    std::size_t ip_len = 20 + udp_len;
    Bytes ip;
    ip.push_back(0x45);
    ip.push_back(0x00);
    put_u16be(ip, static_cast<std::uint16_t>(ip_len));
    put_u16be(ip, 0x0000);
    put_u16be(ip, 0x4000); // DF, not fragmented
    ip.push_back(64);
    ip.push_back(17); // UDP
    put_u16be(ip, 0x0000); // checksum placeholder
    ip.insert(ip.end(), pkt.src.ip.begin(), pkt.src.ip.end());
    ip.insert(ip.end(), pkt.dst.ip.begin(), pkt.dst.ip.end());
    std::uint16_t csum = ipv4_checksum(ip.data(), ip.size());
    ip[10] = static_cast<std::uint8_t>(csum >> 8);
    ip[11] = static_cast<std::uint8_t>(csum & 0xFF);
    frame.insert(frame.end(), ip.begin(), ip.end());

    put_u16be(frame, pkt.src.port);
    put_u16be(frame, pkt.dst.port);
    put_u16be(frame, static_cast<std::uint16_t>(udp_len));
    put_u16be(frame, 0x0000); // checksum optional over IPv4
    frame.insert(frame.end(), pkt.payload.begin(), pkt.payload.end());
    return frame;
}

} // namespace

Result<bool> write_pcap(const fs::path& file, const std::vector<UdpPacket>& packets) {
    Bytes out;
    put_u32le(out, 0xA1B2C3D4);
    put_u16le(out, 2);
    put_u16le(out, 4);
    put_u32le(out, 0);
    put_u32le(out, 0);
    put_u32le(out, 65535);
    put_u32le(out, 1); // Ethernet
    for (const UdpPacket& pkt : packets) {
        Bytes frame = build_frame(pkt);
        put_u32le(out, static_cast<std::uint32_t>(pkt.ts_sec));
        put_u32le(out, static_cast<std::uint32_t>(pkt.ts_usec));
        put_u32le(out, static_cast<std::uint32_t>(frame.size()));
        put_u32le(out, static_cast<std::uint32_t>(frame.size()));
        out.insert(out.end(), frame.begin(), frame.end());
    }
    std::ofstream f(file, std::ios::binary);
    if (!f) return make_error(Errc::io_failure, "cannot write " + file.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) return make_error(Errc::io_failure, "short write to " + file.string());
    return true;
}

// ---------------------------------------------------------------------------
// case generation

namespace {

std::string rand_b32(std::mt19937_64& rng, std::size_t n) {
    static const char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[rng() % 32]);
    return out;
}

Bytes rand_bytes(std::mt19937_64& rng, std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 0xFF);
    return out;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string civil_utc(std::int64_t epoch) {
    std::int64_t days = epoch / 86400;
    std::int64_t rem = epoch % 86400;
    std::int64_t z = days + 719468;
    std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    std::int64_t doe = z - era * 146097;
    std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t y = yoe + era * 400;
    std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    std::int64_t mp = (5 * doy + 2) / 153;
    std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    std::int64_t m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04lld-%02lld-%02lld %02lld:%02lld:%02lld",
                  static_cast<long long>(y), static_cast<long long>(m),
                  static_cast<long long>(d), static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem % 3600) / 60), static_cast<long long>(rem % 60));
    return buf;
}

void write_file(const fs::path& p, ByteView content, std::optional<std::int64_t> mtime = {}) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(content.data()),
              static_cast<std::streamsize>(content.size()));
    out.close();
    if (mtime) {
        auto when = std::chrono::file_clock::from_sys(
            std::chrono::sys_seconds{std::chrono::seconds{*mtime}});
        fs::last_write_time(p, when);
    }
}

void write_file(const fs::path& p, const std::string& content,
                std::optional<std::int64_t> mtime = {}) {
    write_file(p, ByteView(reinterpret_cast<const std::uint8_t*>(content.data()), content.size()),
               mtime);
}

// expectation accumulator; its ordering rules deliberately restate the
// correlator's timeline contract
class Expector {
public:
    void edge(const std::string& type, const std::string& from, const std::string& to) {
        edges_.insert(type + "|" + from + "|" + to);
    }

    void fact(std::int64_t ts, std::int32_t usec, bool naive, correlate::SourceKind source,
              std::int64_t locator, std::string path, std::string description) {
        facts_.insert(std::make_tuple(ts, usec, static_cast<int>(source), locator,
                                      std::move(path), std::move(description), naive));
    }

    std::vector<std::string> edges() const {
        return std::vector<std::string>(edges_.begin(), edges_.end());
    }

    std::vector<std::string> timeline() const {
        std::vector<std::string> out;
        for (const auto& [ts, usec, source, locator, path, desc, naive] : facts_) {
            out.push_back(std::to_string(ts) + "|" + std::to_string(usec) + "|" +
                          (naive ? "1" : "0") + "|" +
                          correlate::source_kind_name(static_cast<correlate::SourceKind>(source)) +
                          "|" + desc);
        }
        return out;
    }

private:
    std::set<std::string> edges_;
    // (ts, usec, source, locator, path, description, naive), kept sorted
    std::set<std::tuple<std::int64_t, std::int32_t, int, std::int64_t, std::string, std::string,
                        bool>>
        facts_;
};

struct LogBuilder {
    std::vector<std::string> lines;

    int add(const std::string& line) {
        lines.push_back(line);
        return static_cast<int>(lines.size());
    }

    std::string text() const {
        std::string out;
        for (const std::string& l : lines) out += l + "\n";
        return out;
    }
};

} // namespace

Result<CaseManifest> gen_case(std::uint64_t seed, Profile profile, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) return make_error(Errc::io_failure, out_dir.string() + ": " + ec.message());

    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(profile)));

    const bool two_devices = profile != Profile::minimal;
    const bool with_captures =
        profile == Profile::two_peer_sync || profile == Profile::multi_share_lan;
    const bool with_history = profile == Profile::two_peer_sync || profile == Profile::deletion_case;
    const bool with_hints = profile == Profile::deletion_case;
    const bool with_archive = profile == Profile::deletion_case;
    const bool with_requests = profile == Profile::two_peer_sync;
    const bool with_api_lines = profile == Profile::two_peer_sync;
    const int data_folder_count = profile == Profile::multi_share_lan ? 2 : 1;

    CaseManifest manifest;
    manifest.seed = seed;
    manifest.profile = profile;
    Expector expect;

    using correlate::SourceKind;

    // --- actors ---------------------------------------------------------
    std::string local_name = "HOSTBOX-" + rand_b32(rng, 4);
    std::string peer_name = "PEERBOX-" + rand_b32(rng, 4);
    Bytes local_id = rand_bytes(rng, 20);
    Bytes peer_id = rand_bytes(rng, 20);
    std::string local_hex_up = to_hex(ByteView(local_id.data(), 20));
    std::string peer_hex_up = to_hex(ByteView(peer_id.data(), 20));
    std::string local_hex = lower(local_hex_up);
    std::string peer_hex = lower(peer_hex_up);
    std::string local_b32 = base32_encode(ByteView(local_id.data(), 20));
    std::string peer_b32 = base32_encode(ByteView(peer_id.data(), 20));

    std::string host_ident = "Host-" + rand_b32(rng, 4);
    std::string guest_ident = "Guest-" + rand_b32(rng, 4);
    Bytes host_fp_raw = rand_bytes(rng, 32);
    Bytes guest_fp_raw = rand_bytes(rng, 32);
    std::string host_fp = base32_encode(ByteView(host_fp_raw.data(), 32));
    std::string guest_fp = base32_encode(ByteView(guest_fp_raw.data(), 32));

    manifest.devices.push_back({local_name, local_hex, local_b32});
    if (two_devices) manifest.devices.push_back({peer_name, peer_hex, peer_b32});
    manifest.identities.push_back({host_ident, host_fp});
    if (two_devices || with_requests) manifest.identities.push_back({guest_ident, guest_fp});

    const std::string kLocal = "device:" + local_hex;
    const std::string kPeer = "device:" + peer_hex;
    const std::string kHost = "identity:" + host_ident;
    const std::string kGuest = "identity:" + guest_ident;

    // --- folders, keys, shares ------------------------------------------
    std::string app_digits = std::to_string(100000 + rng() % 900000);
    std::int64_t app_fid = static_cast<std::int64_t>(rng() % 9000000000000000000ULL) + 1;
    std::string app_name = ".SyncUser" + app_digits;
    std::string app_path = "C:\\Users\\host\\BitTorrent Sync\\" + app_name;
    const std::string kAppFolder = "folder:" + std::to_string(app_fid);

    struct DataFolder {
        std::int64_t fid;
        std::string name;
        std::string path;
        std::string key;
        std::string share_hex; // lowercase
        std::string share_hex_up;
        ShareId share;
    };
    std::vector<DataFolder> data_folders;
    for (int i = 0; i < data_folder_count; ++i) {
        DataFolder f;
        f.fid = -static_cast<std::int64_t>(rng() % 9000000000000000000ULL) - 1;
        f.name = std::string("Share") + static_cast<char>('A' + i) + "-" + rand_b32(rng, 3);
        f.path = "C:\\" + f.name;
        Bytes key_body = rand_bytes(rng, 20);
        f.key = "A" + base32_encode(ByteView(key_body.data(), 20));
        auto sid = share_id_of_key(f.key);
        f.share = sid.take();
        f.share_hex_up = f.share.hex();
        f.share_hex = lower(f.share_hex_up);
        manifest.folders.push_back({f.fid, f.path, f.name});
        manifest.shares.push_back({f.share_hex, "W20", f.key, f.fid});
        data_folders.push_back(std::move(f));
    }
    manifest.folders.push_back({app_fid, app_path, app_name});
    const DataFolder& main_folder = data_folders[0];
    const std::string kMainFolder = "folder:" + std::to_string(main_folder.fid);
    const std::string kMainShare = "share:" + main_folder.share_hex;

    std::optional<ShareId> wire_share;
    std::string wire_share_hex;
    if (profile == Profile::multi_share_lan) {
        Bytes w = rand_bytes(rng, 32);
        wire_share = share_id_from_bytes(ByteView(w.data(), 32)).take();
        wire_share_hex = lower(wire_share->hex());
        manifest.shares.push_back({wire_share_hex, "W32", "", std::nullopt});
    }

    // --- addresses -------------------------------------------------------
    std::uint8_t net3 = static_cast<std::uint8_t>(1 + rng() % 250);
    NetAddr local_addr{{192, 168, net3, 10}, static_cast<std::uint16_t>(49000 + rng() % 500)};
    NetAddr local_internal{{192, 168, net3, 10}, static_cast<std::uint16_t>(20000 + rng() % 500)};
    NetAddr peer_internal{{192, 168, net3, 20}, static_cast<std::uint16_t>(20000 + rng() % 500)};
    NetAddr peer_found_at{{192, 168, net3, 20}, static_cast<std::uint16_t>(49500 + rng() % 400)};
    NetAddr local_ext{{60, 50, 83, 170}, static_cast<std::uint16_t>(49400 + rng() % 100)};
    NetAddr peer_ext{{60, 50, 83, 171}, static_cast<std::uint16_t>(49400 + rng() % 100)};
    NetAddr tracker{{52, 1, 1, 135}, 3000};
    NetAddr multicast{{239, 192, 0, 0}, 3838};
    std::string local_ip = local_addr.ip_string();

    // --- times -----------------------------------------------------------
    std::int64_t t = 1420070400 + static_cast<std::int64_t>(rng() % 512) * 43200;
    auto next = [&t]() { return t += 60; };

    std::int64_t t_install = next();
    std::int64_t t_app_added = next(), t_app_modified = next();
    std::vector<std::pair<std::int64_t, std::int64_t>> t_folder; // added, modified per folder
    for (int i = 0; i < data_folder_count; ++i) t_folder.push_back({next(), next()});
    std::int64_t t_req = next();
    std::int64_t t_acl_host = t_app_added;
    std::int64_t t_acl_guest = next();
    std::int64_t t_peer_sync = next(), t_peer_seen = next(), t_peer_sent = next();
    std::int64_t t_file = next();
    std::int64_t t_archive = next();

    // --- dats/settings.dat ------------------------------------------------
    {
        BValue settings = BValue::dict({
            {to_bytes("exe_path"),
             BValue::str("C:\\Program Files\\BitTorrent Sync\\BitTorrent Sync.exe")},
            {to_bytes("install_time"), BValue::integer(t_install)},
            {to_bytes("log_size"), BValue::integer(104857600)},
            {to_bytes("peer_id"), BValue::bin(local_id)},
        });
        Bytes enc = bencode::encode(settings);
        write_file(out_dir / "dats" / "settings.dat", ByteView(enc.data(), enc.size()));
        expect.fact(t_install, 0, false, SourceKind::settings_dat, -1, "dats/settings.dat",
                    "installation");
    }

    // --- dats/sync.dat -----------------------------------------------------
    {
        BValue identity = BValue::dict({
            {to_bytes("fingerprint"), BValue::str(host_fp)},
            {to_bytes("name"), BValue::str(host_ident)},
            {to_bytes("private_keys"), BValue::bin(rand_bytes(rng, 24))},
            {to_bytes("public_keys"), BValue::bin(rand_bytes(rng, 24))},
        });
        BValue::List identities;
        if (two_devices || with_requests)
            identities.push_back(BValue::dict({
                {to_bytes("fingerprint"), BValue::str(guest_fp)},
                {to_bytes("name"), BValue::str(guest_ident)},
                {to_bytes("public_keys"), BValue::bin(rand_bytes(rng, 24))},
            }));

        BValue::List requests;
        if (with_requests) {
            auto addr6 = encode_netaddr(peer_found_at);
            requests.push_back(BValue::dict({
                {to_bytes("addr"), BValue::bin(Bytes(addr6.begin(), addr6.end()))},
                {to_bytes("folder_id"), BValue::integer(main_folder.fid)},
                {to_bytes("invite"), BValue::str(rand_b32(rng, 26))},
                {to_bytes("name"), BValue::str(guest_ident)},
                {to_bytes("public_keys"), BValue::bin(rand_bytes(rng, 24))},
                {to_bytes("req_time"), BValue::integer(t_req)},
                {to_bytes("requested_permissions"), BValue::integer(3)},
            }));
            expect.edge("request-for-folder", kGuest, kMainFolder);
            expect.fact(t_req, 0, false, SourceKind::sync_dat, -1, "dats/sync.dat",
                        "access request from '" + guest_ident + "'");
        }

        BValue::List folders;
        // identity application folder record comes first
        folders.push_back(BValue::dict({
            {to_bytes("acl"), BValue::list({BValue::dict({
                 {to_bytes("linked_time"), BValue::integer(t_acl_host)},
                 {to_bytes("name"), BValue::str(host_ident)},
             })}),
            },
            {to_bytes("date_added"), BValue::integer(t_app_added)},
            {to_bytes("folder_id"), BValue::integer(app_fid)},
            {to_bytes("last_modified"), BValue::integer(t_app_modified)},
            {to_bytes("path"), BValue::str(app_path)},
        }));
        expect.edge("identity-linked-folder", kHost, kAppFolder);
        expect.fact(t_app_added, 0, false, SourceKind::sync_dat, -1, "dats/sync.dat",
                    "folder added: " + kAppFolder);
        expect.fact(t_app_modified, 0, false, SourceKind::sync_dat, -1, "dats/sync.dat",
                    "folder modified: " + kAppFolder);

        for (int i = 0; i < data_folder_count; ++i) {
            const DataFolder& f = data_folders[static_cast<std::size_t>(i)];
            std::string kFolder = "folder:" + std::to_string(f.fid);
            BValue::List acl;
            acl.push_back(BValue::dict({
                {to_bytes("linked_time"), BValue::integer(t_folder[static_cast<std::size_t>(i)].first)},
                {to_bytes("name"), BValue::str(host_ident)},
            }));
            expect.edge("identity-linked-folder", kHost, kFolder);
            if (two_devices && i == 0) {
                acl.push_back(BValue::dict({
                    {to_bytes("linked_time"), BValue::integer(t_acl_guest)},
                    {to_bytes("name"), BValue::str(guest_ident)},
                }));
                expect.edge("identity-linked-folder", kGuest, kFolder);
            }
            BValue::List peers;
            if (two_devices && i == 0) {
                auto addr6 = encode_netaddr(peer_internal);
                peers.push_back(BValue::dict({
                    {to_bytes("last_addr"), BValue::bin(Bytes(addr6.begin(), addr6.end()))},
                    {to_bytes("last_data_sent"), BValue::integer(t_peer_sent)},
                    {to_bytes("last_seen"), BValue::integer(t_peer_seen)},
                    {to_bytes("last_sync_completed"), BValue::integer(t_peer_sync)},
                    {to_bytes("name"), BValue::str(peer_name)},
                }));
                expect.edge("device-has-folder", kPeer, kFolder);
                expect.edge("device-seen-at-endpoint", kPeer,
                            "endpoint:" + peer_internal.to_string());
            }
            folders.push_back(BValue::dict({
                {to_bytes("acl"), BValue::list(std::move(acl))},
                {to_bytes("date_added"),
                 BValue::integer(t_folder[static_cast<std::size_t>(i)].first)},
                {to_bytes("folder_id"), BValue::integer(f.fid)},
                {to_bytes("last_modified"),
                 BValue::integer(t_folder[static_cast<std::size_t>(i)].second)},
                {to_bytes("path"), BValue::str(f.path)},
                {to_bytes("peers"), BValue::list(std::move(peers))},
                {to_bytes("use_lan"), BValue::integer(1)},
                {to_bytes("use_tracker"), BValue::integer(1)},
            }));
            expect.fact(t_folder[static_cast<std::size_t>(i)].first, 0, false,
                        SourceKind::sync_dat, -1, "dats/sync.dat", "folder added: " + kFolder);
            expect.fact(t_folder[static_cast<std::size_t>(i)].second, 0, false,
                        SourceKind::sync_dat, -1, "dats/sync.dat", "folder modified: " + kFolder);
        }

        BValue::Dict root;
        root.emplace_back(to_bytes("device"), BValue::str(local_name));
        root.emplace_back(to_bytes("identity"), identity);
        if (!identities.empty())
            root.emplace_back(to_bytes("identities"), BValue::list(std::move(identities)));
        if (!requests.empty())
            root.emplace_back(to_bytes("access-requests"), BValue::list(std::move(requests)));
        root.emplace_back(to_bytes("folders"), BValue::list(std::move(folders)));
        Bytes enc = bencode::encode(BValue::dict(std::move(root)));
        write_file(out_dir / "dats" / "sync.dat", ByteView(enc.data(), enc.size()));
        expect.edge("identity-owns-device", kHost, kLocal);
    }

    // --- dats/identity.dat -------------------------------------------------
    {
        BValue identity = BValue::dict({
            {to_bytes("fingerprint"), BValue::str(host_fp)},
            {to_bytes("name"), BValue::str(host_ident)},
            {to_bytes("private_keys"), BValue::bin(rand_bytes(rng, 24))},
            {to_bytes("public_keys"), BValue::bin(rand_bytes(rng, 24))},
        });
        Bytes enc = bencode::encode(identity);
        write_file(out_dir / "dats" / "identity.dat", ByteView(enc.data(), enc.size()));
        // same identity-owns-device linkage as sync.dat
    }

    // --- dats/history.dat ---------------------------------------------------
    std::vector<metadata::HistoryEntry> history;
    if (with_history) {
        std::int64_t t_h1 = next(), t_h2 = next();
        history.push_back({1, local_name + " added file Enron3111.txt", t_h1});
        history.push_back({2, peer_name + " updated file Enron3111.txt", t_h2});
        if (with_archive) {
            std::int64_t t_h3 = next();
            history.push_back({3, "Remote peer removed file Enron3111.rtf", t_h3});
        }
        BValue::List entries;
        for (const auto& h : history) {
            entries.push_back(BValue::dict({
                {to_bytes("id"), BValue::integer(h.id)},
                {to_bytes("msg"), BValue::str(h.msg)},
                {to_bytes("time"), BValue::integer(h.time)},
            }));
            expect.fact(h.time, 0, false, SourceKind::history_dat, h.id, "dats/history.dat",
                        "history #" + std::to_string(h.id) + ": " + h.msg);
        }
        Bytes enc = bencode::encode(BValue::list(std::move(entries)));
        write_file(out_dir / "dats" / "history.dat", ByteView(enc.data(), enc.size()));
    }

    // --- logs/sync.log -------------------------------------------------------
    LogBuilder log;
    {
        auto stamp = [&](std::int64_t when) { return "[" + civil_utc(when) + "] "; };
        auto log_fact = [&](std::int64_t when, int line, const std::string& desc) {
            expect.fact(when, 0, true, SourceKind::sync_log, line, "logs/sync.log", desc);
        };

        log.add("platform: Windows workstation 6.3.0 x86 version: 2.0.93");

        std::int64_t t_line = next();
        int line = log.add(stamp(t_line) + "My PeerID: " + local_hex_up);
        log_fact(t_line, line, "local_peer_id: " + local_hex_up);

        t_line = next();
        line = log.add(stamp(t_line) + "MD[init]: Master Folder: create");
        log_fact(t_line, line, "master_folder_create");

        t_line = next();
        line = log.add(stamp(t_line) + "Using IP address " + local_ip);
        log_fact(t_line, line, "ip_assigned: " + local_ip);

        if (two_devices) {
            t_line = next();
            line = log.add(stamp(t_line) + "SD[BBAD]: Got ping (broadcast: 1) from peer " +
                           peer_internal.to_string() + " (" + peer_hex_up + ")");
            log_fact(t_line, line, "ping_received: " + peer_hex_up);
            expect.edge("device-seen-at-endpoint", kPeer,
                        "endpoint:" + peer_internal.to_string());

            t_line = next();
            line = log.add(stamp(t_line) + "SF[1F7E] [A2B5]: Found peer " + peer_hex_up + " " +
                           peer_found_at.to_string() + " direct:1 transport:1 version: 2.0.93");
            log_fact(t_line, line, "peer_found: " + peer_hex_up);
            expect.edge("device-seen-at-endpoint", kPeer,
                        "endpoint:" + peer_found_at.to_string());

            t_line = next();
            line = log.add(stamp(t_line) + "SF[B5E2] [A2B5]: Got id message from peer " +
                           peer_name + " (" + peer_hex_up + ") 2.0.93");
            log_fact(t_line, line, "id_message: " + peer_name);

            t_line = next();
            line = log.add(stamp(t_line) + "MD[A965]: new device found " + peer_name + " (" +
                           peer_b32 + ")");
            log_fact(t_line, line, "new_device_found: " + peer_name);
        }

        t_line = next();
        line = log.add(stamp(t_line) + "SSLEH[0x15fa28b0]: hello packet { share:" +
                       main_folder.share_hex_up + " } has been sent");
        log_fact(t_line, line, "hello_sent: " + main_folder.share_hex_up);

        t_line = next();
        line = log.add(stamp(t_line) + "Requesting peers from tracker " + tracker.to_string() +
                       " for share " + main_folder.share_hex_up);
        log_fact(t_line, line, "tracker_request: " + tracker.to_string());
        expect.edge("share-at-endpoint", kMainShare, "endpoint:" + tracker.to_string());

        t_line = next();
        line = log.add(stamp(t_line) + "FC[B5E2]: started periodic scan for \"\\\\?\\" +
                       main_folder.path + "\"");
        log_fact(t_line, line, "periodic_scan: \\\\?\\" + main_folder.path);

        t_line = next();
        line = log.add(stamp(t_line) + "MD[A965]: [apply] Processing folder \"" +
                       main_folder.name + "\" (" + std::to_string(main_folder.fid) + ")");
        log_fact(t_line, line, "folder_processing: " + main_folder.name + " (" +
                                   std::to_string(main_folder.fid) + ")");

        if (with_api_lines) {
            // getsyncfolders response body (valid JSON, unlike the raw logs)
            nlohmann::ordered_json body;
            body["folders"] = nlohmann::ordered_json::array();
            nlohmann::ordered_json jf;
            jf["access"] = 4;
            jf["date_added"] = t_folder[0].first;
            jf["folderid"] = std::to_string(main_folder.fid);
            jf["last_modified"] = t_folder[0].second;
            jf["name"] = main_folder.name;
            jf["path"] = main_folder.path;
            jf["peers"] = nlohmann::ordered_json::array(
                {{{"direct", true},
                  {"id", peer_hex_up},
                  {"lastsyncntime", t_peer_sync},
                  {"name", peer_name},
                  {"userid", guest_fp}}});
            jf["users"] = nlohmann::ordered_json::array(
                {{{"access", 3}, {"id", guest_fp}, {"name", guest_ident}}});
            body["folders"].push_back(std::move(jf));
            t_line = next();
            line = log.add(stamp(t_line) + "API: <-- getsyncfolders(" + body.dump() + ")");
            log_fact(t_line, line, "api_response: getsyncfolders");
            expect.edge("device-has-folder", kPeer, kMainFolder);
            expect.edge("identity-owns-device", kGuest, kPeer);
            expect.edge("identity-linked-folder", kGuest, kMainFolder);

            nlohmann::ordered_json mf;
            mf["status"] = 200;
            mf["value"] = nlohmann::ordered_json::array(
                {{{"devicename", peer_name},
                  {"folders", nlohmann::ordered_json::array(
                                  {{{"added", true}, {"id", main_folder.fid}, {"mode", 1}}})},
                  {"id", peer_b32},
                  {"lastseen", t_peer_seen},
                  {"name", peer_name},
                  {"self", false}}});
            t_line = next();
            line = log.add(stamp(t_line) + "API: <-- getmfdevices(" + mf.dump() + ")");
            log_fact(t_line, line, "api_response: getmfdevices");

            nlohmann::ordered_json pending;
            pending["status"] = 200;
            pending["value"] = nlohmann::ordered_json::array(
                {{{"access_level", 3},
                  {"id", std::to_string(main_folder.fid)},
                  {"ip", peer_found_at.ip_string()},
                  {"time", t_req},
                  {"user_identity",
                   {{"devicename", peer_name},
                    {"fingerprint", guest_fp},
                    {"username", guest_ident}}}}});
            t_line = next();
            line = log.add(stamp(t_line) + "API: <-- getpendingrequests(" + pending.dump() + ")");
            log_fact(t_line, line, "api_response: getpendingrequests");
            expect.fact(t_req, 0, false, SourceKind::sync_log, line, "logs/sync.log",
                        "pending access request from '" + guest_ident + "'");

            nlohmann::ordered_json hist;
            hist["status"] = 200;
            hist["value"] = nlohmann::ordered_json::array();
            for (const auto& h : history)
                hist["value"].push_back({{"id", h.id}, {"msg", h.msg}, {"time", h.time}});
            t_line = next();
            line = log.add(stamp(t_line) + "API: <-- history(" + hist.dump() + ")");
            log_fact(t_line, line, "api_response: history");
            for (const auto& h : history)
                expect.fact(h.time, 0, false, SourceKind::sync_log, line, "logs/sync.log",
                            "history #" + std::to_string(h.id) + ": " + h.msg);

            t_line = next();
            line = log.add(stamp(t_line) + "API: --> addsyncfolder(path=" + main_folder.name +
                           "&selectivesync=false&t=" + std::to_string(t_line) + "927)");
            log_fact(t_line, line, "api_request: addsyncfolder");
        }

        if (with_archive) {
            std::string win_file = "\\\\?\\" + main_folder.path + "\\Enron3111.txt";
            t_line = next();
            line = log.add(stamp(t_line) + "JOURNAL[22F5]: new torrent created for file "
                           "Enron3111.txt mt:" +
                           std::to_string(t_file) + " " +
                           to_hex(ByteView(rand_bytes(rng, 20).data(), 20)));
            log_fact(t_line, line, "torrent_created: Enron3111.txt");

            t_line = next();
            line = log.add(stamp(t_line) + "JOURNAL[22F5]: setting time for file \"" + win_file +
                           "\" to " + std::to_string(t_file));
            log_fact(t_line, line, "file_time_set: " + win_file);

            t_line = next();
            line = log.add(stamp(t_line) + "JOURNAL[22F5]: insert file \"" + win_file +
                           "\" = 131072:22982");
            log_fact(t_line, line, "file_inserted: " + win_file);

            t_line = next();
            line = log.add(stamp(t_line) + "Folder being removed from this device and the files "
                           "at \"\\\\?\\" +
                           main_folder.path + "\" are being removed.");
            log_fact(t_line, line, "folder_removed: \\\\?\\" + main_folder.path);
        }

        write_file(out_dir / "logs" / "sync.log", log.text());
        manifest.log_lines = log.lines.size();
        manifest.log_recognized = log.lines.size(); // every generated line parses
    }

    // --- tree/ ------------------------------------------------------------
    {
        for (int i = 0; i < data_folder_count; ++i) {
            const DataFolder& f = data_folders[static_cast<std::size_t>(i)];
            std::string kFolder = "folder:" + std::to_string(f.fid);
            fs::path folder_dir = out_dir / "tree" / f.name;
            write_file(folder_dir / ".sync" / "ID", f.share_hex_up);
            expect.edge("folder-has-share", kFolder, "share:" + f.share_hex);

            std::string content = "Subject: enron case sample " + rand_b32(rng, 12) + "\n";
            write_file(folder_dir / "Enron3111.txt", content, t_file);
            manifest.files.push_back(
                {f.fid, "Enron3111.txt", false, t_file, content.size()});
            expect.edge("file-in-folder", "file:" + std::to_string(f.fid) + "/Enron3111.txt",
                        kFolder);
            expect.fact(t_file, 0, false, SourceKind::tree_scan, -1,
                        "tree/" + f.name + "/Enron3111.txt", "file modified: Enron3111.txt");

            if (with_archive && i == 0) {
                std::string archived = "Subject: removed enron sample " + rand_b32(rng, 8) + "\n";
                write_file(folder_dir / ".sync" / "Archive" / "Enron3111.rtf", archived,
                           t_archive);
                manifest.files.push_back(
                    {f.fid, "Enron3111.rtf", true, t_archive, archived.size()});
                expect.edge("file-in-folder",
                            "file:" + std::to_string(f.fid) + "/Enron3111.rtf|deleted", kFolder);
                expect.fact(t_archive, 0, false, SourceKind::tree_scan, -1,
                            "tree/" + f.name + "/.sync/Archive/Enron3111.rtf",
                            "archived (deleted) file: Enron3111.rtf");
            }
        }
        fs::path app_dir = out_dir / "tree" / app_name;
        fs::create_directories(app_dir);
        if (two_devices) {
            fs::path mapping =
                app_dir / "devices" / peer_b32 / "folders" / std::to_string(main_folder.fid);
            write_file(mapping, std::string(""));
            expect.edge("device-has-folder", kPeer, kMainFolder);
        }
    }

    // --- captures/ ----------------------------------------------------------
    if (with_captures) {
        std::vector<UdpPacket> packets;
        auto local_peer = peer_id_from_bytes(ByteView(local_id.data(), 20)).take();
        auto remote_peer = peer_id_from_bytes(ByteView(peer_id.data(), 20)).take();

        if (profile == Profile::two_peer_sync) {
            std::int64_t t0 = next();
            TrackerGetPeers gp;
            gp.la = local_internal;
            gp.lp = local_internal.port;
            gp.peer = local_peer;
            gp.share = main_folder.share;
            packets.push_back({t0, 101, local_addr, tracker, build_get_peers_payload(gp)});
            expect.edge("device-announces-share", kLocal, kMainShare);
            expect.edge("device-seen-at-endpoint", kLocal, "endpoint:" + local_addr.to_string());
            expect.edge("device-seen-at-endpoint", kLocal,
                        "endpoint:" + local_internal.to_string());
            expect.edge("share-at-endpoint", kMainShare, "endpoint:" + tracker.to_string());
            expect.fact(t0, 101, false, SourceKind::capture, 0, "captures/discovery.pcap",
                        "tracker get_peers from " + local_addr.to_string() + " for share " +
                            main_folder.share_hex_up);

            std::int64_t t1 = next();
            TrackerPeersResponse resp;
            resp.ea = local_ext;
            resp.peers.push_back({local_ext, local_internal, local_peer});
            resp.peers.push_back({peer_ext, peer_internal, remote_peer});
            resp.share = main_folder.share;
            resp.time = t1;
            packets.push_back({t1, 202, tracker, local_addr, build_peers_response_payload(resp)});
            expect.edge("device-seen-at-endpoint", kLocal, "endpoint:" + local_ext.to_string());
            expect.edge("device-announces-share", kPeer, kMainShare);
            expect.edge("device-seen-at-endpoint", kPeer, "endpoint:" + peer_ext.to_string());
            expect.edge("device-seen-at-endpoint", kPeer,
                        "endpoint:" + peer_internal.to_string());
            expect.fact(t1, 202, false, SourceKind::capture, 1, "captures/discovery.pcap",
                        "tracker peers response for share " + main_folder.share_hex_up +
                            " (2 peers)");

            std::int64_t t2 = next();
            LanPing ping;
            ping.port = peer_internal.port;
            ping.peer = remote_peer;
            ping.shares.push_back(main_folder.share);
            packets.push_back({t2, 303, peer_internal, multicast, build_lan_ping_payload(ping)});
            expect.edge("device-seen-at-endpoint", kPeer,
                        "endpoint:" + peer_internal.to_string());
            expect.edge("device-announces-share", kPeer, kMainShare);
            expect.fact(t2, 303, false, SourceKind::capture, 2, "captures/discovery.pcap",
                        "lan ping from " + peer_internal.to_string() + " announcing 1 share(s)");
        } else {
            // MultiShareLan: one multi-share ping from the peer, one from the
            // local device
            std::int64_t t0 = next();
            LanPing ping;
            ping.port = peer_internal.port;
            ping.peer = remote_peer;
            for (const DataFolder& f : data_folders) ping.shares.push_back(f.share);
            ping.shares.push_back(*wire_share);
            packets.push_back({t0, 111, peer_internal, multicast, build_lan_ping_payload(ping)});
            expect.edge("device-seen-at-endpoint", kPeer,
                        "endpoint:" + peer_internal.to_string());
            for (const DataFolder& f : data_folders)
                expect.edge("device-announces-share", kPeer, "share:" + f.share_hex);
            expect.edge("device-announces-share", kPeer, "share:" + wire_share_hex);
            expect.fact(t0, 111, false, SourceKind::capture, 0, "captures/discovery.pcap",
                        "lan ping from " + peer_internal.to_string() + " announcing " +
                            std::to_string(ping.shares.size()) + " share(s)");

            std::int64_t t1 = next();
            LanPing local_ping;
            local_ping.port = local_internal.port;
            local_ping.peer = local_peer;
            for (const DataFolder& f : data_folders) local_ping.shares.push_back(f.share);
            packets.push_back(
                {t1, 222, local_internal, multicast, build_lan_ping_payload(local_ping)});
            expect.edge("device-seen-at-endpoint", kLocal,
                        "endpoint:" + local_internal.to_string());
            for (const DataFolder& f : data_folders)
                expect.edge("device-announces-share", kLocal, "share:" + f.share_hex);
            expect.fact(t1, 222, false, SourceKind::capture, 1, "captures/discovery.pcap",
                        "lan ping from " + local_internal.to_string() + " announcing " +
                            std::to_string(local_ping.shares.size()) + " share(s)");
        }
        manifest.capture_messages = packets.size();
        auto w = write_pcap(out_dir / "captures" / "discovery.pcap", packets);
        if (!w.ok()) return w.error();
    }

    // --- hints.json -----------------------------------------------------------
    if (with_hints) {
        std::int64_t t_hint = next();
        nlohmann::ordered_json hints = nlohmann::ordered_json::array();
        hints.push_back({{"entity_kind", "Device"},
                         {"attributes",
                          {{"name", peer_name}, {"note", "recycle-bin filename reference"}}},
                         {"timestamp", t_hint}});
        write_file(out_dir / "hints.json", hints.dump(2) + "\n");
        expect.fact(t_hint, 0, false, SourceKind::external_hint, 0, "hints.json",
                    "hint: Device device:name:" + peer_name);
    }

    manifest.expected_edges = expect.edges();
    manifest.expected_timeline = expect.timeline();
    write_file(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    return manifest;
}

} // namespace btsf::fixtures
