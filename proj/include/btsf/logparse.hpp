#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace btsf::logparse {

// sync.log timestamps carry no zone; they stay naive and only the report
// layer may anchor them with a user-supplied offset.
struct LogTimestamp {
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;

    // Naive civil time read as if UTC; used only as an ordering key.
    std::int64_t as_utc_epoch() const;
    std::string text() const; // "YYYY-MM-DD HH:MM:SS"
    bool operator==(const LogTimestamp&) const = default;
};

enum class LogEventKind {
    platform_version,
    local_peer_id,
    master_folder_create,
    master_folder_disconnect,
    ip_assigned,
    ip_changed,
    incoming_connection,
    ping_received,
    peer_found,
    id_message,
    new_device_found,
    hello_sent,
    hello_received,
    tracker_request,
    periodic_scan,
    folder_processing,
    torrent_created,
    file_time_set,
    file_inserted,
    folder_removed,
    api_response,
    api_request,
    unrecognized,
};

const char* log_event_kind_name(LogEventKind k);
std::optional<LogEventKind> log_event_kind_of(std::string_view name);

struct LogEvent {
    std::optional<LogTimestamp> timestamp;
    int line_no = 0;
    std::string raw; // exact input line, terminator included
    LogEventKind kind = LogEventKind::unrecognized;

    std::vector<std::string> tags;  // opaque context tags, e.g. "MD[A965]"
    std::optional<std::string> tag; // bare secondary tag, e.g. "A2B5"

    // Extracted fields; which ones are set depends on the kind.
    std::optional<std::string> platform;
    std::optional<std::string> version;
    std::optional<std::string> peer_id_hex;
    std::optional<std::string> peer_id_b32;
    std::optional<std::string> device_name;
    std::optional<std::string> ip;      // bare IP
    std::optional<std::string> ip_from; // IpChanged
    std::optional<std::string> ip_to;
    std::optional<std::string> addr; // "ip:port"
    std::optional<std::string> share_id_hex;
    std::optional<std::string> path;
    std::optional<std::string> folder_name;
    std::optional<std::int64_t> folder_id;
    std::optional<std::string> file;
    std::optional<std::int64_t> mtime;
    std::optional<std::string> hash_hex;
    std::optional<std::int64_t> time_value;
    std::optional<int> broadcast;
    std::optional<int> direct;
    std::optional<int> transport;
    std::optional<std::string> insert_suffix; // raw "131072:22982"-style tail

    std::optional<std::string> api_name;
    std::optional<std::string> api_body;
    std::optional<std::string> api_params;
    std::optional<bool> api_complete;

    std::vector<std::string> notes; // anomalies, e.g. off-width hex IDs
};

struct LogStats {
    std::size_t total = 0;
    std::size_t recognized = 0;
    std::size_t unrecognized = 0;
};

struct ParsedLog {
    std::vector<LogEvent> events;
    LogStats stats;
};

LogEvent parse_line(std::string_view line, int line_no);
ParsedLog parse_log(std::string_view stream);

struct ApiExtract {
    std::string api_name;
    std::string body_text;
    bool complete = false;
};

// Extracts the parenthesized body following "API: <-- name(" by balanced
// parenthesis scan; incomplete bodies (excerpts cut off mid-line) are
// returned with complete=false.
std::optional<ApiExtract> extract_api_json(std::string_view line);

} // namespace btsf::logparse
