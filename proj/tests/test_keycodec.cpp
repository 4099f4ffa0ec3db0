#include <doctest.h>

#include <random>

#include "btsf/keycodec.hpp"
#include "gen.hpp"

using namespace btsf;

static Bytes hexb(std::string_view h) {
    auto b = from_hex(h);
    REQUIRE(b.has_value());
    return *b;
}

TEST_CASE("base32: golden encoding of a device ID") {
    Bytes id = hexb("10DEC8109E524439D9454ABE2BB1475BF7D5A2B5");
    std::string b32 = base32_encode(ByteView(id.data(), id.size()));
    CHECK(b32.size() == 32);
    CHECK(b32.substr(0, 8) == "CDPMQEE6");
    // full value pinned from an independent base-32 oracle
    CHECK(b32 == "CDPMQEE6KJCDTWKFJK7CXMKHLP35LIVV");
    auto back = base32_decode(b32);
    REQUIRE(back.ok());
    CHECK(back.value() == id);
}

TEST_CASE("base32: empty input") {
    CHECK(base32_encode(ByteView{}) == "");
    auto d = base32_decode("");
    REQUIRE(d.ok());
    CHECK(d.value().empty());
}

TEST_CASE("base32: errors") {
    auto bad_symbol = base32_decode("ABCDEFG1"); // '1' is outside A-Z,2-7
    REQUIRE(!bad_symbol.ok());
    CHECK(bad_symbol.error().code == Errc::invalid_symbol);
    CHECK(bad_symbol.error().offset == 7);

    for (std::size_t n : {1u, 3u, 6u, 9u, 11u}) {
        auto bad_len = base32_decode(std::string(n, 'A'));
        REQUIRE(!bad_len.ok());
        CHECK(bad_len.error().code == Errc::invalid_length);
    }
}

TEST_CASE("base32: properties") {
    std::mt19937_64 rng(0x5eedb32);
    for (int i = 0; i < 2000; ++i) {
        Bytes b = testgen::random_bytes(rng, testgen::rng_below(rng, 65));
        std::string enc = base32_encode(ByteView(b.data(), b.size()));
        CHECK(enc.size() == (b.size() * 8 + 4) / 5);
        auto dec = base32_decode(enc);
        REQUIRE(dec.ok());
        CHECK(dec.value() == b);
    }
}

TEST_CASE("sha1: standard vectors") {
    auto hex_of = [](ByteView b) { return to_hex(b, false); };
    auto d0 = sha1_digest(ByteView{});
    CHECK(hex_of(ByteView(d0.data(), d0.size())) == "da39a3ee5e6b4b0d3255bfef95601890afd80709");

    Bytes abc = to_bytes("abc");
    auto d1 = sha1_digest(ByteView(abc.data(), abc.size()));
    CHECK(hex_of(ByteView(d1.data(), d1.size())) == "a9993e364706816aba3e25717850c26c9cd0d89d");

    Bytes two = to_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq");
    auto d2 = sha1_digest(ByteView(two.data(), two.size()));
    CHECK(hex_of(ByteView(d2.data(), d2.size())) == "84983e441c3bd26ebaae4aa1f95129e5e54670f1");

    // block-boundary lengths
    Bytes b55(55, 'a'), b56(56, 'a'), b64(64, 'a'), b119(119, 'a');
    CHECK(sha1_digest(ByteView(b55.data(), b55.size())) != sha1_digest(ByteView(b56.data(), b56.size())));
    CHECK(sha1_digest(ByteView(b64.data(), b64.size())) != sha1_digest(ByteView(b119.data(), b119.size())));
}

TEST_CASE("classify_key: taxonomy") {
    const std::string body32(32, 'A');
    struct Row {
        char type;
        Permission perm;
    };
    const Row rows[] = {
        {'A', Permission::read_write},   {'B', Permission::read_only},
        {'C', Permission::time_limited}, {'D', Permission::read_write},
        {'E', Permission::read_only},    {'F', Permission::encrypted_node},
        {'R', Permission::legacy_read_only},
    };
    for (const Row& row : rows) {
        auto mk = classify_key(std::string(1, row.type) + body32);
        REQUIRE(mk.ok());
        CHECK(mk.value().key_type == row.type);
        CHECK(mk.value().permission == row.perm);
        CHECK(mk.value().body == body32);
        CHECK(!mk.value().extra.has_value());
    }
}

TEST_CASE("classify_key: long read-only form") {
    std::string body = "QRSTUVWXYZ234567ABCDEFGHIJKLMNOP";
    std::string extra = "ABCDEFGHIJKLMNOP234567QRSTUVWXYZ";
    auto mk = classify_key("B" + body + extra);
    REQUIRE(mk.ok());
    CHECK(mk.value().key_type == 'B');
    CHECK(mk.value().body == body);
    REQUIRE(mk.value().extra.has_value());
    CHECK(*mk.value().extra == extra);
    CHECK(mk.value().permission == Permission::read_only);
    CHECK(mk.value().text() == "B" + body + extra);
}

TEST_CASE("classify_key: errors") {
    CHECK(classify_key("Z" + std::string(32, 'A')).error().code == Errc::unknown_key_type);
    CHECK(classify_key("A" + std::string(31, 'A')).error().code == Errc::bad_length);
    CHECK(classify_key("A" + std::string(33, 'A')).error().code == Errc::bad_length);
    CHECK(classify_key("A" + std::string(31, 'A') + "1").error().code == Errc::bad_alphabet);
    CHECK(classify_key("").error().code == Errc::bad_length);
}

TEST_CASE("share_id_of_key: golden values from independent SHA-1 oracle") {
    auto s1 = share_id_of_key("A" + std::string(32, 'A'));
    REQUIRE(s1.ok());
    CHECK(s1.value().width == ShareWidth::w20);
    CHECK(s1.value().bytes.size() == 20);
    CHECK(to_hex(ByteView(s1.value().bytes.data(), 20), false) ==
          "e04976c6e1ce44aa1840b07b57021c158a11eafc");

    auto s2 = share_id_of_key("BQRSTUVWXYZ234567ABCDEFGHIJKLMNOPABCDEFGHIJKLMNOP234567QRSTUVWXYZ");
    REQUIRE(s2.ok());
    CHECK(to_hex(ByteView(s2.value().bytes.data(), 20), false) ==
          "178fe2f10641bfdf6a5e48e12ad0ada107716de8");

    auto s3 = share_id_of_key("R22222222222222222222222222222222");
    REQUIRE(s3.ok());
    CHECK(to_hex(ByteView(s3.value().bytes.data(), 20), false) ==
          "6653c671f8f58ab9eca06d6d56254cdf98d08e9d");

    CHECK(share_id_of_key("Q" + std::string(32, 'A')).error().code == Errc::unknown_key_type);
}

TEST_CASE("parse_sync_link: full link") {
    Bytes folder(20, 0x11);
    PeerId pid;
    pid.bytes.fill(0x22);
    std::string url = "https://link.example/invite#f=Sync&sz=3E5&s=" +
                      base32_encode(ByteView(folder.data(), folder.size())) +
                      "&i=ABCDEFGHIJKLMNOP&e=1428051108&p=" +
                      base32_encode(ByteView(pid.bytes.data(), pid.bytes.size()));
    auto link = parse_sync_link(url);
    REQUIRE(link.ok());
    const SyncLink& l = link.value();
    CHECK(l.folder_name == "Sync");
    CHECK(l.size_approx == "3E5");
    REQUIRE(l.folder_id.has_value());
    CHECK(*l.folder_id == folder);
    CHECK(l.temp_key == "ABCDEFGHIJKLMNOP");
    CHECK(l.expiry == 1428051108);
    REQUIRE(l.peer_id.has_value());
    CHECK(l.peer_id->bytes == pid.bytes);
    CHECK(l.extras.empty());
    CHECK(l.raw_params.size() == 6);
}

TEST_CASE("parse_sync_link: optional and unknown params") {
    auto link = parse_sync_link("https://x/?f=My%20Docs&zz=1");
    REQUIRE(link.ok());
    CHECK(link.value().folder_name == "My Docs");
    CHECK(!link.value().expiry.has_value());
    REQUIRE(link.value().extras.size() == 1);
    CHECK(link.value().extras[0].first == "zz");
}

TEST_CASE("parse_sync_link: losslessness of the parameter multiset") {
    std::string q = "f=Sync&e=5&zz=1&f=Dup";
    auto link = parse_sync_link("https://x/#" + q);
    REQUIRE(link.ok());
    std::string rebuilt;
    for (const auto& [k, v] : link.value().raw_params) {
        if (!rebuilt.empty()) rebuilt += "&";
        rebuilt += k + "=" + v;
    }
    CHECK(rebuilt == q);
}

TEST_CASE("parse_sync_link: errors") {
    CHECK(parse_sync_link("https://x/nothing").error().code == Errc::no_params);

    // folder ID decodes to 19 bytes
    Bytes short_id(19, 0x01);
    std::string url = "https://x/#s=" + base32_encode(ByteView(short_id.data(), short_id.size()));
    CHECK(parse_sync_link(url).error().code == Errc::bad_base32_param);

    CHECK(parse_sync_link("https://x/#p=1111").error().code == Errc::bad_base32_param);
}

TEST_CASE("decode_netaddr: layout") {
    Bytes raw = hexb("C0A8DCB0C246");
    auto addr = decode_netaddr(ByteView(raw.data(), raw.size()));
    REQUIRE(addr.ok());
    CHECK(addr.value().to_string() == "192.168.220.176:49734");

    Bytes zero(6, 0);
    CHECK(decode_netaddr(ByteView(zero.data(), zero.size())).value().to_string() == "0.0.0.0:0");

    Bytes five(5, 0);
    CHECK(decode_netaddr(ByteView(five.data(), five.size())).error().code == Errc::bad_length);
}

TEST_CASE("decode_netaddr: exhaustive port round-trip") {
    NetAddr a;
    a.ip = {10, 0, 0, 1};
    for (unsigned p = 0; p <= 65535; ++p) {
        a.port = static_cast<std::uint16_t>(p);
        auto raw = encode_netaddr(a);
        auto back = decode_netaddr(ByteView(raw.data(), raw.size()));
        REQUIRE(back.ok());
        if (back.value() != a) {
            REQUIRE(back.value() == a); // report the failing port once
        }
    }
}

TEST_CASE("parse_ip_port") {
    auto a = parse_ip_port("192.168.220.176:49734");
    REQUIRE(a.has_value());
    CHECK(a->ip == std::array<std::uint8_t, 4>{192, 168, 220, 176});
    CHECK(a->port == 49734);
    CHECK(!parse_ip_port("300.1.1.1:5").has_value());
    CHECK(!parse_ip_port("1.2.3.4").has_value());
    CHECK(!parse_ip_port("1.2.3.4:99999").has_value());
}
