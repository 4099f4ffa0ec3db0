#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "btsf/fixtures.hpp"
#include "btsf/netdissect.hpp"
#include "gen.hpp"

using namespace btsf;
using namespace btsf::netdissect;

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("btsf-net-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

PeerId rand_peer(std::mt19937_64& rng) {
    PeerId p;
    for (auto& b : p.bytes) b = static_cast<std::uint8_t>(rng() & 0xFF);
    return p;
}

ShareId rand_share(std::mt19937_64& rng, bool wide) {
    Bytes b = testgen::random_bytes(rng, wide ? 32 : 20);
    return share_id_from_bytes(ByteView(b.data(), b.size())).take();
}

NetAddr rand_addr(std::mt19937_64& rng) {
    NetAddr a;
    for (auto& b : a.ip) b = static_cast<std::uint8_t>(rng() & 0xFF);
    a.port = static_cast<std::uint16_t>(rng() & 0xFFFF);
    return a;
}

} // namespace

TEST_CASE("dissect: lan ping") {
    std::mt19937_64 rng(0xd15c1);
    LanPing ping;
    ping.port = 3838;
    ping.peer = rand_peer(rng);
    ping.shares.push_back(rand_share(rng, false));
    Bytes payload = fixtures::build_lan_ping_payload(ping);
    REQUIRE(payload.size() > 6);
    CHECK(std::string(payload.begin(), payload.begin() + 5) == "BSYNC");
    CHECK(payload[5] == 0x00);

    auto got = dissect_udp_payload(ByteView(payload.data(), payload.size()));
    REQUIRE(got.has_value());
    const auto* parsed = std::get_if<LanPing>(&*got);
    REQUIRE(parsed != nullptr);
    CHECK(parsed->port == 3838);
    CHECK(parsed->peer == ping.peer);
    REQUIRE(parsed->shares.size() == 1);
    CHECK(parsed->shares[0] == ping.shares[0]);
}

TEST_CASE("dissect: get_peers behind the transport header") {
    std::mt19937_64 rng(0xd15c2);
    TrackerGetPeers msg;
    msg.la = rand_addr(rng);
    msg.lp = 49734;
    msg.peer = rand_peer(rng);
    msg.share = rand_share(rng, false);
    Bytes payload = fixtures::build_get_peers_payload(msg);
    CHECK(payload[0] == 0x01);

    auto got = dissect_udp_payload(ByteView(payload.data(), payload.size()));
    REQUIRE(got.has_value());
    const auto* parsed = std::get_if<TrackerGetPeers>(&*got);
    REQUIRE(parsed != nullptr);
    CHECK(parsed->la == msg.la);
    CHECK(parsed->lp == msg.lp);
    CHECK(parsed->peer == msg.peer);
    CHECK(parsed->share == msg.share);
}

TEST_CASE("dissect: peers response with null filler on either side") {
    std::mt19937_64 rng(0xd15c3);
    TrackerPeersResponse msg;
    msg.ea = rand_addr(rng);
    msg.peers.push_back({rand_addr(rng), rand_addr(rng), rand_peer(rng)});
    msg.share = rand_share(rng, true);
    msg.time = 1428051108;
    Bytes payload = fixtures::build_peers_response_payload(msg); // null after header

    auto got = dissect_udp_payload(ByteView(payload.data(), payload.size()));
    REQUIRE(got.has_value());
    const auto* parsed = std::get_if<TrackerPeersResponse>(&*got);
    REQUIRE(parsed != nullptr);
    CHECK(parsed->ea == msg.ea);
    CHECK(parsed->time == msg.time);
    CHECK(parsed->share.width == ShareWidth::w32);
    REQUIRE(parsed->peers.size() == 1);
    CHECK(parsed->peers[0].p == msg.peers[0].p);

    // null before the header instead
    Bytes shifted;
    shifted.push_back(0x00);
    shifted.insert(shifted.end(), payload.begin(), payload.begin() + 20);
    shifted.insert(shifted.end(), payload.begin() + 21, payload.end());
    auto got2 = dissect_udp_payload(ByteView(shifted.data(), shifted.size()));
    REQUIRE(got2.has_value());
    CHECK(std::get_if<TrackerPeersResponse>(&*got2) != nullptr);
}

TEST_CASE("dissect: empty peer list is rejected") {
    std::mt19937_64 rng(0xd15c4);
    TrackerPeersResponse msg;
    msg.ea = rand_addr(rng);
    msg.share = rand_share(rng, false);
    msg.time = 1;
    Bytes payload = fixtures::build_peers_response_payload(msg);
    std::string reason;
    auto got = dissect_udp_payload(ByteView(payload.data(), payload.size()), &reason);
    CHECK(!got.has_value());
    CHECK(reason.find("empty peer list") != std::string::npos);
}

TEST_CASE("dissect: non-discovery payloads yield nothing") {
    std::string hello = "hello";
    CHECK(!dissect_udp_payload(
               ByteView(reinterpret_cast<const std::uint8_t*>(hello.data()), hello.size()))
               .has_value());
    CHECK(!dissect_udp_payload(ByteView{}).has_value());

    // a bencode dict with an unknown message type
    std::string unknown = "d1:m5:helloe";
    std::string reason;
    CHECK(!dissect_udp_payload(
               ByteView(reinterpret_cast<const std::uint8_t*>(unknown.data()), unknown.size()),
               &reason)
               .has_value());
    CHECK(reason.find("unknown message type") != std::string::npos);
}

TEST_CASE("dissect: bare dict is found by the fallback scan") {
    std::mt19937_64 rng(0xd15c5);
    LanPing ping;
    ping.port = 20566;
    ping.peer = rand_peer(rng);
    ping.shares.push_back(rand_share(rng, false));
    Bytes framed = fixtures::build_lan_ping_payload(ping);
    // strip the BSYNC framing; the dict alone must still dissect
    Bytes bare(framed.begin() + 6, framed.end());
    auto got = dissect_udp_payload(ByteView(bare.data(), bare.size()));
    REQUIRE(got.has_value());
    CHECK(std::get_if<LanPing>(&*got) != nullptr);
}

TEST_CASE("dissect: key order does not matter") {
    std::mt19937_64 rng(0xd15c6);
    PeerId peer = rand_peer(rng);
    Bytes share = testgen::random_bytes(rng, 20);
    // keys deliberately out of canonical order
    Bytes payload = to_bytes("BSYNC");
    payload.push_back(0x00);
    std::string dict = "d4:port" + std::string("i3838e") + "6:sharesl20:" +
                       std::string(share.begin(), share.end()) + "e4:peer20:" +
                       std::string(peer.bytes.begin(), peer.bytes.end()) + "1:m4:pinge";
    payload.insert(payload.end(), dict.begin(), dict.end());
    auto got = dissect_udp_payload(ByteView(payload.data(), payload.size()));
    REQUIRE(got.has_value());
    const auto* parsed = std::get_if<LanPing>(&*got);
    REQUIRE(parsed != nullptr);
    CHECK(parsed->peer == peer);
    CHECK(parsed->port == 3838);
}

TEST_CASE("dissect: no crash over random payloads") {
    std::mt19937_64 rng(0xd15c7);
    for (int i = 0; i < 20000; ++i) {
        Bytes payload = testgen::random_bytes(rng, testgen::rng_below(rng, 64));
        dissect_udp_payload(ByteView(payload.data(), payload.size()));
    }
}

TEST_CASE("classify_endpoint: builtin registry") {
    EndpointRegistry reg = EndpointRegistry::builtin();
    CHECK(reg.classify({{52, 1, 1, 135}, 3000}) == EndpointClass::tracker);
    CHECK(reg.classify({{52, 0, 104, 40}, 3000}) == EndpointClass::tracker);
    CHECK(reg.classify({{67, 215, 229, 106}, 3000}) == EndpointClass::relay);
    CHECK(reg.classify({{239, 192, 0, 0}, 3838}) == EndpointClass::lan_multicast);
    CHECK(reg.classify({{239, 255, 255, 250}, 1900}) == EndpointClass::upnp_ssdp);
    CHECK(reg.classify({{192, 168, 1, 1}, 5351}) == EndpointClass::nat_pmp);
    CHECK(reg.classify({{54, 235, 182, 157}, 3000}) == EndpointClass::mobile_push_proxy);
    CHECK(reg.classify({{8, 8, 8, 8}, 53}) == EndpointClass::unknown);
    // registered IP at a different port is not a match
    CHECK(reg.classify({{52, 1, 1, 135}, 3001}) == EndpointClass::unknown);
}

TEST_CASE("classify_endpoint: registry file override") {
    nlohmann::json doc = nlohmann::json::array(
        {{{"ip", "10.0.0.1"}, {"port", 4000}, {"class", "Tracker"}, {"url", "t.example"}},
         {{"port", 5351}, {"class", "NatPmp"}}});
    auto reg = EndpointRegistry::from_json(doc);
    REQUIRE(reg.ok());
    CHECK(reg.value().classify({{10, 0, 0, 1}, 4000}) == EndpointClass::tracker);
    CHECK(reg.value().classify({{52, 1, 1, 135}, 3000}) == EndpointClass::unknown);

    CHECK(!EndpointRegistry::from_json(nlohmann::json::object()).ok());
    nlohmann::json bad_class = nlohmann::json::array({{{"class", "Bogus"}}});
    CHECK(!EndpointRegistry::from_json(bad_class).ok());
}

TEST_CASE("read_capture: round trip through the writer") {
    TempDir tmp;
    std::mt19937_64 rng(0xcab1e);
    std::vector<fixtures::UdpPacket> packets;
    for (int i = 0; i < 3; ++i) {
        fixtures::UdpPacket pkt;
        pkt.ts_sec = 1428000000 + i;
        pkt.ts_usec = i * 100;
        pkt.src = rand_addr(rng);
        pkt.dst = rand_addr(rng);
        pkt.payload = testgen::random_bytes(rng, 20 + testgen::rng_below(rng, 40));
        packets.push_back(std::move(pkt));
    }
    fs::path file = tmp.path / "t.pcap";
    REQUIRE(fixtures::write_pcap(file, packets).ok());

    auto cap = read_capture(file);
    REQUIRE(cap.ok());
    REQUIRE(cap.value().records.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const CaptureRecord& rec = cap.value().records[i];
        CHECK(rec.ts_sec == packets[i].ts_sec);
        CHECK(rec.ts_usec == packets[i].ts_usec);
        CHECK(rec.src == packets[i].src);
        CHECK(rec.dst == packets[i].dst);
        CHECK(rec.transport == Transport::udp);
        CHECK(rec.payload == packets[i].payload);
        CHECK(rec.index == i);
    }
}

TEST_CASE("read_capture: empty capture and bad magic") {
    TempDir tmp;
    fs::path empty = tmp.path / "empty.pcap";
    REQUIRE(fixtures::write_pcap(empty, {}).ok());
    auto cap = read_capture(empty);
    REQUIRE(cap.ok());
    CHECK(cap.value().records.empty());

    fs::path bad = tmp.path / "bad.pcap";
    std::ofstream(bad, std::ios::binary) << "this is not a capture file at all.....";
    auto r = read_capture(bad);
    REQUIRE(!r.ok());
    CHECK(r.error().code == Errc::bad_magic);
}

TEST_CASE("read_capture: truncated tail stops at last whole record") {
    TempDir tmp;
    std::mt19937_64 rng(0xcab2e);
    std::vector<fixtures::UdpPacket> packets;
    for (int i = 0; i < 2; ++i) {
        fixtures::UdpPacket pkt;
        pkt.ts_sec = 1428000000 + i;
        pkt.src = rand_addr(rng);
        pkt.dst = rand_addr(rng);
        pkt.payload = testgen::random_bytes(rng, 30);
        packets.push_back(std::move(pkt));
    }
    fs::path file = tmp.path / "t.pcap";
    REQUIRE(fixtures::write_pcap(file, packets).ok());
    auto size = fs::file_size(file);
    fs::resize_file(file, size - 10); // cut into the second record

    auto cap = read_capture(file);
    REQUIRE(cap.ok());
    CHECK(cap.value().records.size() == 1);
    CHECK(cap.value().truncated_tail);
}

TEST_CASE("extract_discovery: fixture capture with noise") {
    TempDir tmp;
    std::mt19937_64 rng(0xcab3e);
    NetAddr local{{192, 168, 1, 10}, 49740};
    NetAddr tracker{{52, 1, 1, 135}, 3000};
    NetAddr multicast{{239, 192, 0, 0}, 3838};

    std::vector<fixtures::UdpPacket> packets;
    LanPing ping1{20566, rand_peer(rng), {rand_share(rng, false)}};
    packets.push_back({1428000001, 0, local, multicast, fixtures::build_lan_ping_payload(ping1)});
    LanPing ping2{20567, rand_peer(rng), {rand_share(rng, false), rand_share(rng, true)}};
    packets.push_back({1428000002, 0, local, multicast, fixtures::build_lan_ping_payload(ping2)});
    TrackerGetPeers gp{rand_addr(rng), 49740, rand_peer(rng), rand_share(rng, false)};
    packets.push_back({1428000003, 0, local, tracker, fixtures::build_get_peers_payload(gp)});
    packets.push_back({1428000004, 0, local, tracker, to_bytes("encrypted noise payload")});

    fs::path file = tmp.path / "mix.pcap";
    REQUIRE(fixtures::write_pcap(file, packets).ok());

    auto ex = extract_discovery(file, EndpointRegistry::builtin());
    REQUIRE(ex.ok());
    CHECK(ex.value().messages.size() == 3);
    CHECK(ex.value().stats.total == 4);
    CHECK(ex.value().stats.udp == 4);
    CHECK(ex.value().stats.dissected == 3);
    CHECK(ex.value().stats.undissected_udp == 1);
    CHECK(ex.value().stats.total >= ex.value().stats.udp);
    CHECK(ex.value().stats.udp >= ex.value().stats.dissected);
    CHECK(ex.value().stats.by_class.at("LanMulticast") == 2);
    CHECK(ex.value().stats.by_class.at("Tracker") == 1);
    // every message keeps its origin record index
    CHECK(ex.value().messages[0].record_index == 0);
    CHECK(ex.value().messages[2].record_index == 2);
}
