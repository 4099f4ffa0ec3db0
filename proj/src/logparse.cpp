#include "btsf/logparse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "btsf/bytes.hpp"

namespace btsf::logparse {

namespace {

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

std::string_view take_hex_run(std::string_view s) {
    std::size_t n = 0;
    while (n < s.size() && is_hex_digit(s[n])) ++n;
    return s.substr(0, n);
}

std::string_view take_b32_run(std::string_view s) {
    std::size_t n = 0;
    while (n < s.size() && ((s[n] >= 'A' && s[n] <= 'Z') || (s[n] >= '2' && s[n] <= '7'))) ++n;
    return s.substr(0, n);
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

// "ip:port" starting at s; returns the token and its length in s.
std::string_view take_addr(std::string_view s) {
    std::size_t n = 0;
    while (n < s.size() && (is_digit(s[n]) || s[n] == '.' || s[n] == ':')) ++n;
    while (n > 0 && (s[n - 1] == '.' || s[n - 1] == ':')) --n;
    return s.substr(0, n);
}

std::optional<std::string> take_quoted(std::string_view s) {
    std::size_t open = s.find('"');
    if (open == std::string_view::npos) return std::nullopt;
    std::size_t close = s.find('"', open + 1);
    if (close == std::string_view::npos) return std::nullopt;
    return std::string(s.substr(open + 1, close - open - 1));
}

std::optional<LogTimestamp> parse_timestamp(std::string_view line, std::size_t& consumed) {
    // "[YYYY-MM-DD HH:MM:SS] "
    if (line.size() < 21 || line[0] != '[') return std::nullopt;
    LogTimestamp ts;
    int n = std::sscanf(std::string(line.substr(0, 21)).c_str(), "[%4d-%2d-%2d %2d:%2d:%2d]",
                        &ts.year, &ts.month, &ts.day, &ts.hour, &ts.minute, &ts.second);
    if (n != 6 || line[20] != ']') return std::nullopt;
    if (ts.month < 1 || ts.month > 12 || ts.day < 1 || ts.day > 31 || ts.hour > 23 ||
        ts.minute > 59 || ts.second > 60)
        return std::nullopt;
    consumed = 21;
    if (consumed < line.size() && line[consumed] == ' ') ++consumed;
    return ts;
}

// Context tags: leading "NAME[..]" / "[..]" groups terminated by ": ".
std::size_t strip_tags(std::string_view body, std::vector<std::string>& tags,
                       std::optional<std::string>& bare_tag) {
    std::size_t pos = 0;
    std::vector<std::string> found;
    std::optional<std::string> bare;
    while (true) {
        std::size_t p = pos;
        std::size_t name_begin = p;
        while (p < body.size() && (std::isalnum(static_cast<unsigned char>(body[p])) || body[p] == '_'))
            ++p;
        if (p >= body.size() || body[p] != '[') break;
        std::size_t close = body.find(']', p);
        if (close == std::string_view::npos) break;
        std::string group(body.substr(name_begin, close + 1 - name_begin));
        std::size_t after = close + 1;
        if (after < body.size() && body[after] == ':') {
            found.push_back(group);
            if (name_begin == p) bare = std::string(body.substr(p + 1, close - p - 1));
            pos = after + 1;
            if (pos < body.size() && body[pos] == ' ') ++pos;
            tags = std::move(found);
            bare_tag = bare;
            return pos;
        }
        if (after < body.size() && body[after] == ' ') {
            found.push_back(group);
            if (name_begin == p) bare = std::string(body.substr(p + 1, close - p - 1));
            pos = after + 1;
            continue;
        }
        break;
    }
    if (!found.empty()) {
        // tag groups not closed by ':' are left in the body
        return 0;
    }
    return 0;
}

void note_hex_width(LogEvent& ev, std::string_view what, std::string_view hex,
                    std::initializer_list<std::size_t> expected) {
    for (std::size_t want : expected)
        if (hex.size() == want) return;
    std::string msg(what);
    msg += " has " + std::to_string(hex.size()) + " hex digits, expected ";
    bool first = true;
    for (std::size_t want : expected) {
        if (!first) msg += " or ";
        msg += std::to_string(want);
        first = false;
    }
    ev.notes.push_back(std::move(msg));
}

} // namespace

std::int64_t LogTimestamp::as_utc_epoch() const {
    // days-from-civil, proleptic Gregorian
    int y = year;
    int m = month;
    int d = day;
    y -= m <= 2;
    int era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    std::int64_t days = static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
    return days * 86400 + hour * 3600 + minute * 60 + second;
}

std::string LogTimestamp::text() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", year, month, day, hour, minute,
                  second);
    return buf;
}

const char* log_event_kind_name(LogEventKind k) {
    switch (k) {
        case LogEventKind::platform_version: return "platform_version";
        case LogEventKind::local_peer_id: return "local_peer_id";
        case LogEventKind::master_folder_create: return "master_folder_create";
        case LogEventKind::master_folder_disconnect: return "master_folder_disconnect";
        case LogEventKind::ip_assigned: return "ip_assigned";
        case LogEventKind::ip_changed: return "ip_changed";
        case LogEventKind::incoming_connection: return "incoming_connection";
        case LogEventKind::ping_received: return "ping_received";
        case LogEventKind::peer_found: return "peer_found";
        case LogEventKind::id_message: return "id_message";
        case LogEventKind::new_device_found: return "new_device_found";
        case LogEventKind::hello_sent: return "hello_sent";
        case LogEventKind::hello_received: return "hello_received";
        case LogEventKind::tracker_request: return "tracker_request";
        case LogEventKind::periodic_scan: return "periodic_scan";
        case LogEventKind::folder_processing: return "folder_processing";
        case LogEventKind::torrent_created: return "torrent_created";
        case LogEventKind::file_time_set: return "file_time_set";
        case LogEventKind::file_inserted: return "file_inserted";
        case LogEventKind::folder_removed: return "folder_removed";
        case LogEventKind::api_response: return "api_response";
        case LogEventKind::api_request: return "api_request";
        case LogEventKind::unrecognized: return "unrecognized";
    }
    return "unrecognized";
}

std::optional<LogEventKind> log_event_kind_of(std::string_view name) {
    for (int k = 0; k <= static_cast<int>(LogEventKind::unrecognized); ++k) {
        auto kind = static_cast<LogEventKind>(k);
        if (name == log_event_kind_name(kind)) return kind;
    }
    return std::nullopt;
}

std::optional<ApiExtract> extract_api_json(std::string_view line) {
    std::size_t at = line.find("API: <-- ");
    if (at == std::string_view::npos) return std::nullopt;
    std::size_t name_begin = at + 9;
    std::size_t paren = line.find('(', name_begin);
    if (paren == std::string_view::npos) return std::nullopt;
    ApiExtract out;
    out.api_name = std::string(line.substr(name_begin, paren - name_begin));
    int depth = 0;
    std::size_t body_begin = paren + 1;
    for (std::size_t i = paren; i < line.size(); ++i) {
        if (line[i] == '(') ++depth;
        if (line[i] == ')') {
            --depth;
            if (depth == 0) {
                out.body_text = std::string(line.substr(body_begin, i - body_begin));
                out.complete = true;
                return out;
            }
        }
    }
    out.body_text = std::string(line.substr(body_begin));
    out.complete = false;
    return out;
}

LogEvent parse_line(std::string_view line, int line_no) {
    LogEvent ev;
    ev.line_no = line_no;
    ev.raw = std::string(line);

    std::string_view rest = line;
    if (!rest.empty() && rest.back() == '\n') rest.remove_suffix(1);
    if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);

    std::size_t ts_len = 0;
    ev.timestamp = parse_timestamp(rest, ts_len);
    rest.remove_prefix(ts_len);

    std::size_t tag_len = strip_tags(rest, ev.tags, ev.tag);
    std::string_view body = rest.substr(tag_len);

    auto set_kind = [&](LogEventKind k) { ev.kind = k; };

    if (starts_with(body, "platform: ")) {
        std::size_t ver = body.find(" version: ");
        if (ver != std::string_view::npos) {
            set_kind(LogEventKind::platform_version);
            ev.platform = std::string(body.substr(10, ver - 10));
            ev.version = std::string(body.substr(ver + 10));
            return ev;
        }
    }
    if (starts_with(body, "My PeerID: ")) {
        std::string_view hex = take_hex_run(body.substr(11));
        if (!hex.empty()) {
            set_kind(LogEventKind::local_peer_id);
            ev.peer_id_hex = std::string(hex);
            note_hex_width(ev, "peer ID", hex, {40});
            return ev;
        }
    }
    if (body == "Master Folder: create") {
        set_kind(LogEventKind::master_folder_create);
        return ev;
    }
    if (body.find("disconnect master folder") != std::string_view::npos) {
        set_kind(LogEventKind::master_folder_disconnect);
        return ev;
    }
    if (starts_with(body, "Using IP address ")) {
        set_kind(LogEventKind::ip_assigned);
        ev.ip = std::string(take_addr(body.substr(17)));
        return ev;
    }
    if (starts_with(body, "Changing IP address from ")) {
        std::string_view tail = body.substr(25);
        std::size_t to = tail.find(" to ");
        if (to != std::string_view::npos) {
            set_kind(LogEventKind::ip_changed);
            ev.ip_from = std::string(take_addr(tail.substr(0, to)));
            ev.ip_to = std::string(take_addr(tail.substr(to + 4)));
            return ev;
        }
    }
    if (starts_with(body, "Incoming connection from ")) {
        set_kind(LogEventKind::incoming_connection);
        ev.addr = std::string(take_addr(body.substr(25)));
        return ev;
    }
    if (std::size_t ping = body.find("Got ping (broadcast: "); ping != std::string_view::npos) {
        std::string_view tail = body.substr(ping + 21);
        std::size_t close = tail.find(')');
        std::size_t from = tail.find(" from peer ");
        if (close != std::string_view::npos && from != std::string_view::npos) {
            set_kind(LogEventKind::ping_received);
            if (auto b = parse_int(tail.substr(0, close))) ev.broadcast = static_cast<int>(*b);
            std::string_view after = tail.substr(from + 11);
            std::string_view addr = take_addr(after);
            ev.addr = std::string(addr);
            std::size_t paren = after.find('(');
            if (paren != std::string_view::npos) {
                std::string_view hex = take_hex_run(after.substr(paren + 1));
                if (!hex.empty()) {
                    ev.peer_id_hex = std::string(hex);
                    note_hex_width(ev, "peer ID", hex, {40});
                }
            }
            return ev;
        }
    }
    if (starts_with(body, "Found peer ")) {
        std::string_view tail = body.substr(11);
        std::string_view hex = take_hex_run(tail);
        if (!hex.empty()) {
            set_kind(LogEventKind::peer_found);
            ev.peer_id_hex = std::string(hex);
            note_hex_width(ev, "peer ID", hex, {40});
            tail.remove_prefix(hex.size());
            if (starts_with(tail, " ")) tail.remove_prefix(1);
            ev.addr = std::string(take_addr(tail));
            if (std::size_t d = tail.find("direct:"); d != std::string_view::npos)
                if (auto v = parse_int(take_addr(tail.substr(d + 7)))) ev.direct = static_cast<int>(*v);
            if (std::size_t t = tail.find("transport:"); t != std::string_view::npos)
                if (auto v = parse_int(take_addr(tail.substr(t + 10)))) ev.transport = static_cast<int>(*v);
            if (std::size_t v = tail.find("version: "); v != std::string_view::npos)
                ev.version = std::string(tail.substr(v + 9));
            return ev;
        }
    }
    if (starts_with(body, "Got id message from peer ")) {
        std::string_view tail = body.substr(25);
        std::size_t paren = tail.find(" (");
        std::size_t close = paren == std::string_view::npos ? paren : tail.find(')', paren);
        if (paren != std::string_view::npos && close != std::string_view::npos) {
            set_kind(LogEventKind::id_message);
            ev.device_name = std::string(tail.substr(0, paren));
            std::string_view hex = take_hex_run(tail.substr(paren + 2, close - paren - 2));
            ev.peer_id_hex = std::string(hex);
            note_hex_width(ev, "peer ID", hex, {40});
            std::string_view ver = tail.substr(close + 1);
            while (!ver.empty() && ver.front() == ' ') ver.remove_prefix(1);
            if (!ver.empty()) ev.version = std::string(ver);
            return ev;
        }
    }
    if (starts_with(body, "new device found ")) {
        std::string_view tail = body.substr(17);
        std::size_t paren = tail.find(" (");
        std::size_t close = paren == std::string_view::npos ? paren : tail.find(')', paren);
        if (paren != std::string_view::npos && close != std::string_view::npos) {
            set_kind(LogEventKind::new_device_found);
            ev.device_name = std::string(tail.substr(0, paren));
            std::string_view b32 = take_b32_run(tail.substr(paren + 2, close - paren - 2));
            ev.peer_id_b32 = std::string(b32);
            if (b32.size() != 32)
                ev.notes.push_back("encoded peer ID has " + std::to_string(b32.size()) +
                                   " symbols, expected 32");
            return ev;
        }
    }
    if (std::size_t share = body.find("share:");
        share != std::string_view::npos && body.find("hello packet") != std::string_view::npos) {
        std::string_view hex = take_hex_run(body.substr(share + 6));
        if (!hex.empty()) {
            bool received = body.find("received hello packet") != std::string_view::npos;
            set_kind(received ? LogEventKind::hello_received : LogEventKind::hello_sent);
            ev.share_id_hex = std::string(hex);
            note_hex_width(ev, "share ID", hex, {40, 64});
            return ev;
        }
    }
    if (starts_with(body, "Requesting peers from tracker ")) {
        std::string_view tail = body.substr(30);
        std::size_t sep = tail.find(" for share ");
        if (sep != std::string_view::npos) {
            set_kind(LogEventKind::tracker_request);
            ev.addr = std::string(take_addr(tail.substr(0, sep)));
            std::string_view hex = take_hex_run(tail.substr(sep + 11));
            ev.share_id_hex = std::string(hex);
            note_hex_width(ev, "share ID", hex, {40, 64});
            return ev;
        }
    }
    if (starts_with(body, "started periodic scan for ")) {
        if (auto path = take_quoted(body)) {
            set_kind(LogEventKind::periodic_scan);
            ev.path = *path;
            return ev;
        }
    }
    if (std::size_t proc = body.find("Processing folder \""); proc != std::string_view::npos) {
        std::string_view tail = body.substr(proc + 18);
        auto name = take_quoted(tail);
        std::size_t paren = tail.find('(');
        if (name && paren != std::string_view::npos) {
            std::size_t close = tail.find(')', paren);
            if (close != std::string_view::npos) {
                if (auto id = parse_int(tail.substr(paren + 1, close - paren - 1))) {
                    set_kind(LogEventKind::folder_processing);
                    ev.folder_name = *name;
                    ev.folder_id = *id;
                    return ev;
                }
            }
        }
    }
    if (starts_with(body, "new torrent created for file ")) {
        std::string_view tail = body.substr(29);
        std::size_t mt = tail.find(" mt:");
        if (mt != std::string_view::npos) {
            set_kind(LogEventKind::torrent_created);
            ev.file = std::string(tail.substr(0, mt));
            std::string_view after = tail.substr(mt + 4);
            std::size_t sp = after.find(' ');
            if (auto m = parse_int(after.substr(0, sp))) ev.mtime = *m;
            if (sp != std::string_view::npos) {
                std::string_view hex = take_hex_run(after.substr(sp + 1));
                if (!hex.empty()) ev.hash_hex = std::string(hex);
            }
            return ev;
        }
    }
    if (starts_with(body, "setting time for file ")) {
        auto path = take_quoted(body);
        std::size_t to = body.rfind(" to ");
        if (path && to != std::string_view::npos) {
            if (auto t = parse_int(body.substr(to + 4))) {
                set_kind(LogEventKind::file_time_set);
                ev.path = *path;
                ev.time_value = *t;
                return ev;
            }
        }
    }
    if (starts_with(body, "insert file ")) {
        if (auto path = take_quoted(body)) {
            set_kind(LogEventKind::file_inserted);
            ev.path = *path;
            std::size_t eq = body.rfind(" = ");
            if (eq != std::string_view::npos) ev.insert_suffix = std::string(body.substr(eq + 3));
            return ev;
        }
    }
    if (starts_with(body, "Folder being removed")) {
        if (auto path = take_quoted(body)) {
            set_kind(LogEventKind::folder_removed);
            ev.path = *path;
            return ev;
        }
    }
    if (body.find("API: <-- ") != std::string_view::npos) {
        if (auto api = extract_api_json(body)) {
            set_kind(LogEventKind::api_response);
            ev.api_name = api->api_name;
            ev.api_body = api->body_text;
            ev.api_complete = api->complete;
            return ev;
        }
    }
    if (std::size_t req = body.find("API: --> "); req != std::string_view::npos) {
        std::string_view tail = body.substr(req + 9);
        std::size_t paren = tail.find('(');
        if (paren != std::string_view::npos) {
            set_kind(LogEventKind::api_request);
            ev.api_name = std::string(tail.substr(0, paren));
            std::size_t close = tail.rfind(')');
            if (close != std::string_view::npos && close > paren)
                ev.api_params = std::string(tail.substr(paren + 1, close - paren - 1));
            else
                ev.api_params = std::string(tail.substr(paren + 1));
            return ev;
        }
    }

    ev.kind = LogEventKind::unrecognized;
    return ev;
}

ParsedLog parse_log(std::string_view stream) {
    ParsedLog out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < stream.size()) {
        std::size_t nl = stream.find('\n', pos);
        std::size_t end = nl == std::string_view::npos ? stream.size() : nl + 1;
        ++line_no;
        out.events.push_back(parse_line(stream.substr(pos, end - pos), line_no));
        pos = end;
    }
    out.stats.total = out.events.size();
    for (const LogEvent& ev : out.events) {
        if (ev.kind == LogEventKind::unrecognized)
            ++out.stats.unrecognized;
        else
            ++out.stats.recognized;
    }
    return out;
}

} // namespace btsf::logparse
