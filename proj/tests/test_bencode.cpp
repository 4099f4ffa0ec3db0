#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "btsf/bencode.hpp"
#include "gen.hpp"

using namespace btsf;
using namespace btsf::bencode;

static Decoded must_decode(std::string_view text) {
    auto r = decode(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    REQUIRE(r.ok());
    return r.take();
}

static Error must_fail(std::string_view text) {
    auto r = decode(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    REQUIRE(!r.ok());
    return r.error();
}

TEST_CASE("decode: byte string") {
    auto d = must_decode("9:get_peers");
    CHECK(d.value.is_bytes());
    CHECK(d.value.as_text() == "get_peers");
    CHECK(d.consumed == 11);
}

TEST_CASE("decode: empty list and integer") {
    auto l = must_decode("le");
    CHECK(l.value.is_list());
    CHECK(l.value.as_list().empty());

    auto i = must_decode("i3838e");
    CHECK(i.value.as_int() == 3838);
}

TEST_CASE("decode: dict") {
    auto d = must_decode("d1:m4:pinge");
    REQUIRE(d.value.is_dict());
    const BValue* m = d.value.find("m");
    REQUIRE(m != nullptr);
    CHECK(m->as_text() == "ping");
}

TEST_CASE("decode: trailing bytes reported, not an error") {
    auto d = must_decode("i3e trailing garbage");
    CHECK(d.value.as_int() == 3);
    CHECK(d.consumed == 3);
}

TEST_CASE("decode: integer edge rules") {
    CHECK(must_decode("i0e").value.as_int() == 0);
    CHECK(must_decode("i-7e").value.as_int() == -7);
    CHECK(must_decode("i-2775350472753142605e").value.as_int() == -2775350472753142605LL);

    CHECK(must_fail("i03e").code == Errc::malformed);
    CHECK(must_fail("i-0e").code == Errc::malformed);
    CHECK(must_fail("ie").code == Errc::malformed);
    CHECK(must_fail("i99999999999999999999e").code == Errc::malformed);
}

TEST_CASE("decode: truncation") {
    CHECK(must_fail("").code == Errc::truncated);
    CHECK(must_fail("5:ab").code == Errc::truncated);
    CHECK(must_fail("i12").code == Errc::truncated);
    CHECK(must_fail("l4:spam").code == Errc::truncated);
    CHECK(must_fail("d1:m").code == Errc::truncated);
}

TEST_CASE("decode: malformed reports offset") {
    auto e = must_fail("li1exe");
    CHECK(e.code == Errc::malformed);
    REQUIRE(e.offset.has_value());
    CHECK(*e.offset == 4);
}

TEST_CASE("decode: depth limit") {
    std::string deep(65, 'l');
    CHECK(must_fail(deep).code == Errc::depth_exceeded);
    std::string ok_depth = std::string(64, 'l') + std::string(64, 'e');
    CHECK(decode(ByteView(reinterpret_cast<const std::uint8_t*>(ok_depth.data()), ok_depth.size())).ok());
}

TEST_CASE("decode: duplicate dict keys keep first and warn") {
    auto d = must_decode("d1:ai1e1:ai2ee");
    REQUIRE(d.value.is_dict());
    CHECK(d.value.as_dict().size() == 1);
    CHECK(d.value.find("a")->as_int() == 1);
    REQUIRE(d.warnings.size() == 1);
    CHECK(d.warnings[0].message.find("duplicate dict key") != std::string::npos);
}

TEST_CASE("decode: unsorted dict keys accepted") {
    auto d = must_decode("d1:bi1e1:ai2ee");
    CHECK(d.value.as_dict().size() == 2);
    // decode order is preserved
    CHECK(to_string(d.value.as_dict()[0].first) == "b");
}

TEST_CASE("encode: canonical forms") {
    CHECK(to_string(encode(BValue::integer(0))) == "i0e");
    BValue dict = BValue::dict({{to_bytes("m"), BValue::str("ping")}});
    CHECK(to_string(encode(dict)) == "d1:m4:pinge");
    // keys are emitted in raw byte order regardless of construction order
    BValue unsorted = BValue::dict({{to_bytes("b"), BValue::integer(1)},
                                    {to_bytes("a"), BValue::integer(2)}});
    CHECK(to_string(encode(unsorted)) == "d1:ai2e1:bi1ee");
}

TEST_CASE("get_path") {
    BValue dict = BValue::dict({{to_bytes("m"), BValue::str("ping")}});
    auto got = get_path(dict, {std::string("m")});
    REQUIRE(got != nullptr);
    CHECK(got->as_text() == "ping");

    CHECK(get_path(BValue::dict({}), {std::string("x")}) == nullptr);

    BValue list = BValue::list({BValue::integer(7)});
    auto item = get_path(list, {std::size_t{0}});
    REQUIRE(item != nullptr);
    CHECK(item->as_int() == 7);
    CHECK(get_path(list, {std::size_t{1}}) == nullptr);

    BValue wrapper = BValue::dict({{to_bytes("l"), list}});
    auto nested = get_path(wrapper, {std::string("l"), std::size_t{0}});
    REQUIRE(nested != nullptr);
    CHECK(nested->as_int() == 7);
}

TEST_CASE("property: decode(encode(v)) == v and re-encode is stable") {
    std::mt19937_64 rng(0x5eed0001);
    for (int i = 0; i < 500; ++i) {
        BValue v = testgen::random_bvalue(rng);
        Bytes wire = encode(v);
        auto back = decode(ByteView(wire.data(), wire.size()));
        REQUIRE(back.ok());
        CHECK(back.value().value == v);
        CHECK(back.value().consumed == wire.size());
        CHECK(encode(back.value().value) == wire);
    }
}

static void check_spans(const BValue& v, ByteView buffer) {
    // every value's span re-decodes to that value
    auto sub = decode(buffer.subspan(v.span.begin, v.span.end - v.span.begin));
    REQUIRE(sub.ok());
    CHECK(sub.value().value == v);
    CHECK(sub.value().consumed == v.span.size());
    if (v.is_list()) {
        std::size_t prev_end = v.span.begin;
        for (const BValue& item : v.as_list()) {
            CHECK(item.span.begin >= prev_end);
            CHECK(item.span.end <= v.span.end);
            prev_end = item.span.end;
            check_spans(item, buffer);
        }
    } else if (v.is_dict()) {
        std::size_t prev_end = v.span.begin;
        for (const auto& [k, item] : v.as_dict()) {
            CHECK(item.span.begin >= prev_end);
            CHECK(item.span.end <= v.span.end);
            prev_end = item.span.end;
            check_spans(item, buffer);
        }
    }
}

TEST_CASE("property: span soundness") {
    std::mt19937_64 rng(0x5eed0002);
    for (int i = 0; i < 200; ++i) {
        BValue v = testgen::random_bvalue(rng);
        Bytes wire = encode(v);
        auto d = decode(ByteView(wire.data(), wire.size()));
        REQUIRE(d.ok());
        check_spans(d.value().value, ByteView(wire.data(), wire.size()));
    }
}

TEST_CASE("property: no crash on random buffers") {
    std::mt19937_64 rng(0x5eed0003);
    for (int i = 0; i < 20000; ++i) {
        Bytes buf = testgen::random_bytes(rng, testgen::rng_below(rng, 32));
        auto r = decode(ByteView(buf.data(), buf.size()));
        if (r.ok()) CHECK(r.value().consumed <= buf.size());
    }
}
