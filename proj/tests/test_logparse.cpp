#include <doctest.h>

#include <nlohmann/json.hpp>

#include "btsf/keycodec.hpp"
#include "btsf/logparse.hpp"
#include "log_goldens.hpp"

using namespace btsf::logparse;

TEST_CASE("every golden line parses to its expected kind and fields") {
    for (const auto& row : loggolden::table()) {
        LogEvent ev = parse_line(row.line, 1);
        INFO("line: ", row.line);
        CHECK(log_event_kind_name(ev.kind) == log_event_kind_name(row.kind));
        for (const auto& [field, want] : row.fields) {
            auto got = loggolden::field_of(ev, field);
            INFO("field: ", field);
            REQUIRE(got.has_value());
            CHECK(*got == want);
        }
    }
}

TEST_CASE("timestamp parsing and epoch conversion") {
    LogEvent ev = parse_line("[2015-04-03 16:18:32] My PeerID: ABCD", 1);
    REQUIRE(ev.timestamp.has_value());
    CHECK(ev.timestamp->as_utc_epoch() == 1428077912);
    CHECK(ev.timestamp->text() == "2015-04-03 16:18:32");

    LogTimestamp epoch{1970, 1, 1, 0, 0, 0};
    CHECK(epoch.as_utc_epoch() == 0);
    LogTimestamp y2038{2038, 1, 19, 3, 14, 8};
    CHECK(y2038.as_utc_epoch() == 2147483648LL);
    LogTimestamp later{2015, 4, 17, 12, 51, 19};
    CHECK(later.as_utc_epoch() == 1429275079);
}

TEST_CASE("off-width IDs are captured verbatim and flagged") {
    LogEvent ping = parse_line(
        "[2015-04-15 12:30:31] SD[4F11]: Got ping (broadcast: 1) from peer "
        "192.168.220.146:50523 (107C1CFB546B56559FE2929E7B7C8804E7302F0)",
        1);
    CHECK(ping.kind == LogEventKind::ping_received);
    CHECK(ping.peer_id_hex == "107C1CFB546B56559FE2929E7B7C8804E7302F0");
    REQUIRE(!ping.notes.empty());
    CHECK(ping.notes[0].find("39") != std::string::npos);

    LogEvent dev = parse_line(
        "[2015-04-17 12:51:19] MD[A965]: new device found WIN-KMM6MUN4701 "
        "(CDPMQEE6KJCDTWKFJK7CXMKHL35LIVV)",
        1);
    REQUIRE(!dev.notes.empty());
    CHECK(dev.notes[0].find("31") != std::string::npos);
}

TEST_CASE("context tags are preserved") {
    LogEvent ev = parse_line(
        "[2015-04-05 08:23:56] SF[1F7E] [A2B5]: Found peer "
        "10DEC8109E524439D9454ABE2BB1475BF7D5A2B5 192.168.220.176:49759 direct:1 transport:1 "
        "version: 2.0.93",
        7);
    REQUIRE(ev.tags.size() == 2);
    CHECK(ev.tags[0] == "SF[1F7E]");
    CHECK(ev.tags[1] == "[A2B5]");
    CHECK(ev.tag == "A2B5");
    CHECK(ev.line_no == 7);
}

TEST_CASE("parse_log: order, stats, losslessness") {
    std::string stream;
    for (const auto& row : loggolden::table()) stream += row.line + "\n";
    stream += "last line without newline";

    ParsedLog log = parse_log(stream);
    CHECK(log.stats.total == loggolden::table().size() + 1);
    CHECK(log.stats.total == log.stats.recognized + log.stats.unrecognized);
    CHECK(log.stats.unrecognized == 5); // 4 golden unrecognized rows + trailer

    std::string rebuilt;
    for (const LogEvent& ev : log.events) rebuilt += ev.raw;
    CHECK(rebuilt == stream);

    for (std::size_t i = 0; i < log.events.size(); ++i)
        CHECK(log.events[i].line_no == static_cast<int>(i) + 1);
}

TEST_CASE("parse_log: empty input") {
    ParsedLog log = parse_log("");
    CHECK(log.events.empty());
    CHECK(log.stats.total == 0);
    CHECK(log.stats.recognized == 0);
    CHECK(log.stats.unrecognized == 0);
}

TEST_CASE("parse_log: windows line endings are preserved") {
    ParsedLog log = parse_log("[2015-04-03 16:18:30] Using IP address 10.0.0.1\r\nplain\r\n");
    REQUIRE(log.events.size() == 2);
    CHECK(log.events[0].kind == LogEventKind::ip_assigned);
    CHECK(log.events[0].ip == "10.0.0.1");
    CHECK(log.events[0].raw.ends_with("\r\n"));
}

TEST_CASE("extract_api_json") {
    auto got = extract_api_json("[t] API: <-- getpendingrequests({ \"time\": 1428051108 })...");
    REQUIRE(got.has_value());
    CHECK(got->api_name == "getpendingrequests");
    CHECK(got->body_text == "{ \"time\": 1428051108 }");
    CHECK(got->complete);
    CHECK(got->body_text.find("\"time\": 1428051108") != std::string::npos);

    CHECK(!extract_api_json("no api marker here").has_value());

    auto truncated = extract_api_json("API: <-- getsyncfolders({ \"folders\": [{ ...");
    REQUIRE(truncated.has_value());
    CHECK(!truncated->complete);
    CHECK(truncated->api_name == "getsyncfolders");
}

TEST_CASE("api bodies parse as JSON only when complete and valid") {
    // complete and valid
    LogEvent ok = parse_line(
        "[2015-04-05 08:33:06] API: <-- history({ \"status\": 200, \"value\": [{ \"id\": 39, "
        "\"msg\": \"x\", \"time\": 1428193777 }]})...",
        1);
    REQUIRE(ok.api_body.has_value());
    auto parsed = nlohmann::json::parse(*ok.api_body, nullptr, false);
    REQUIRE(!parsed.is_discarded());
    CHECK(parsed["value"][0]["id"] == 39);

    // complete but invalid JSON (unescaped Windows paths)
    LogEvent bad = parse_line(
        "[2015-04-03 16:43:13] API: <-- getfoldersstoragepath({ \"status\": 200, \"value\": "
        "\"C:\\Users\\anonymous\\BitTorrent Sync\" })",
        1);
    REQUIRE(bad.api_complete == true);
    CHECK(nlohmann::json::parse(*bad.api_body, nullptr, false).is_discarded());
}

TEST_CASE("id message and new device found agree through base32") {
    // fixture-style pair: both forms derived from the same 20 bytes
    LogEvent id_msg = parse_line(
        "[2015-04-05 09:05:32] SF[B5E2] [A2B5]: Got id message from peer HOSTBOX "
        "(10DEC8109E524439D9454ABE2BB1475BF7D5A2B5) 2.0.93",
        1);
    LogEvent found = parse_line(
        "[2015-04-17 12:51:19] MD[A965]: new device found HOSTBOX "
        "(CDPMQEE6KJCDTWKFJK7CXMKHLP35LIVV)",
        2);
    auto raw = btsf::from_hex(*id_msg.peer_id_hex);
    REQUIRE(raw.has_value());
    CHECK(btsf::base32_encode(btsf::ByteView(raw->data(), raw->size())) == *found.peer_id_b32);
    CHECK(found.notes.empty());
}

TEST_CASE("kind names round-trip") {
    CHECK(log_event_kind_of("ping_received") == LogEventKind::ping_received);
    CHECK(log_event_kind_of("unrecognized") == LogEventKind::unrecognized);
    CHECK(!log_event_kind_of("bogus").has_value());
}
