// Verbatim sync.log lines and the fields each must yield. Shared between the
// unit tests and the acceptance suite.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "btsf/logparse.hpp"

namespace loggolden {

using btsf::logparse::LogEventKind;

struct Expect {
    std::string line;
    LogEventKind kind;
    // field name -> expected value; names mirror LogEvent members
    std::vector<std::pair<std::string, std::string>> fields;
};

inline const std::vector<Expect>& table() {
    static const std::vector<Expect> rows = {
        {"platform: Windows workstation 6.3.0 x86 version: 2.0.93",
         LogEventKind::platform_version,
         {{"platform", "Windows workstation 6.3.0 x86"}, {"version", "2.0.93"}}},
        {"[2015-04-03 16:18:32] My PeerID: 103B760A3674FE44C4A512B4EF802D452F633F99",
         LogEventKind::local_peer_id,
         {{"peer_id_hex", "103B760A3674FE44C4A512B4EF802D452F633F99"},
          {"timestamp", "2015-04-03 16:18:32"}}},
        {"[2015-04-03 16:19:50] MD[init]: Master Folder: create",
         LogEventKind::master_folder_create,
         {}},
        {"[2015-04-03 16:18:30] Using IP address 192.168.220.176",
         LogEventKind::ip_assigned,
         {{"ip", "192.168.220.176"}}},
        {"[2015-04-03 16:31:03] Changing IP address from 192.168.220.176 to 192.168.220.143",
         LogEventKind::ip_changed,
         {{"ip_from", "192.168.220.176"}, {"ip_to", "192.168.220.143"}}},
        {"[2015-04-04 09:05:32] Incoming connection from 192.168.220.176:49734",
         LogEventKind::incoming_connection,
         {{"addr", "192.168.220.176:49734"}}},
        {"[2015-04-03 16:51:47] SD[BBAD]: Got ping (broadcast: 1) from peer "
         "192.168.220.176:20566 (10DEC8109E524439D9454ABE2BB1475BF7D5A2B5)",
         LogEventKind::ping_received,
         {{"addr", "192.168.220.176:20566"},
          {"peer_id_hex", "10DEC8109E524439D9454ABE2BB1475BF7D5A2B5"},
          {"broadcast", "1"}}},
        {"[2015-04-15 12:30:31] SD[4F11]: Got ping (broadcast: 1) from peer "
         "192.168.220.146:50523 (107C1CFB546B56559FE2929E7B7C8804E7302F0)",
         LogEventKind::ping_received,
         {{"addr", "192.168.220.146:50523"},
          {"peer_id_hex", "107C1CFB546B56559FE2929E7B7C8804E7302F0"}}},
        {"[2015-04-05 08:23:56] SF[1F7E] [A2B5]: Found peer "
         "10DEC8109E524439D9454ABE2BB1475BF7D5A2B5 192.168.220.176:49759 direct:1 transport:1 "
         "version: 2.0.93",
         LogEventKind::peer_found,
         {{"peer_id_hex", "10DEC8109E524439D9454ABE2BB1475BF7D5A2B5"},
          {"addr", "192.168.220.176:49759"},
          {"direct", "1"},
          {"transport", "1"},
          {"version", "2.0.93"},
          {"tag", "A2B5"}}},
        {"[2015-04-05 09:05:32] SF[B5E2] [A2B5]: Got id message from peer WIN-KMM6MUN4701 "
         "(10DEC8109E524439D9454ABE2BB1475BF7D5A2B5) 2.0.93",
         LogEventKind::id_message,
         {{"device_name", "WIN-KMM6MUN4701"},
          {"peer_id_hex", "10DEC8109E524439D9454ABE2BB1475BF7D5A2B5"},
          {"version", "2.0.93"}}},
        {"[2015-04-17 12:51:19] MD[A965]: new device found WIN-KMM6MUN4701 "
         "(CDPMQEE6KJCDTWKFJK7CXMKHL35LIVV)",
         LogEventKind::new_device_found,
         {{"device_name", "WIN-KMM6MUN4701"},
          {"peer_id_b32", "CDPMQEE6KJCDTWKFJK7CXMKHL35LIVV"}}},
        {"[2015-04-05 11:37:54] SSLEH[0x15fa28b0]: hello packet { "
         "share:6C25389E651AC160F91ECA3D9A249C58F6BED15 } has been sent",
         LogEventKind::hello_sent,
         {{"share_id_hex", "6C25389E651AC160F91ECA3D9A249C58F6BED15"}}},
        {"[2015-04-05 11:37:54] SSLEH[0x08e849e8]: received hello packet, { "
         "share:6C25389E651AC160F91ECA3D9A249C58F6BED15 }",
         LogEventKind::hello_received,
         {{"share_id_hex", "6C25389E651AC160F91ECA3D9A249C58F6BED15"}}},
        {"[2015-04-05 11:47:58] Requesting peers from tracker 52.1.1.135:3000 for share "
         "6C25389E651AC160F91ECA3D9A249C58F6BED15",
         LogEventKind::tracker_request,
         {{"addr", "52.1.1.135:3000"},
          {"share_id_hex", "6C25389E651AC160F91ECA3D9A249C58F6BED15"}}},
        {"[2015-04-04 20:36:45] FC[B5E2]: started periodic scan for \"\\\\?\\C:\\Sync\"",
         LogEventKind::periodic_scan,
         {{"path", "\\\\?\\C:\\Sync"}}},
        {"[2015-04-05 11:37:57] MD[A965]: [apply] Processing folder \"Sync\" "
         "(-2775350472753142605)",
         LogEventKind::folder_processing,
         {{"folder_name", "Sync"}, {"folder_id", "-2775350472753142605"}}},
        {"[2015-04-05 08:24:17] JOURNAL[22F5]: new torrent created for file Enron3111.txt "
         "mt:1418488391 9603FC44BB0F59A822FA3331A1802F880ABA583B",
         LogEventKind::torrent_created,
         {{"file", "Enron3111.txt"},
          {"mtime", "1418488391"},
          {"hash_hex", "9603FC44BB0F59A822FA3331A1802F880ABA583B"}}},
        {"[2015-04-05 08:24:17] JOURNAL[22F5]: setting time for file "
         "\"\\\\?\\C:\\Sync\\Enron3111.txt\" to 1428193457",
         LogEventKind::file_time_set,
         {{"path", "\\\\?\\C:\\Sync\\Enron3111.txt"}, {"time_value", "1428193457"}}},
        {"[2015-04-05 08:24:17] JOURNAL[22F5]: insert file \"\\\\?\\C:\\Sync\\Enron3111.txt\" = "
         "131072:22982",
         LogEventKind::file_inserted,
         {{"path", "\\\\?\\C:\\Sync\\Enron3111.txt"}, {"insert_suffix", "131072:22982"}}},
        {"[2015-06-28 23:41:17] Folder being removed from this device and the files at "
         "\"\\\\?\\C:\\Sync\" are being removed.",
         LogEventKind::folder_removed,
         {{"path", "\\\\?\\C:\\Sync"}}},
        {"[2015-04-05 09:12:01] Master Folder Controller: disconnect master folder",
         LogEventKind::master_folder_disconnect,
         {}},
        {"[2015-04-05 09:11:53] API: <-- getmfdevices({ \"status\": 200, \"value\": [{ \"aod\": "
         "false, \"devicename\": \"WIN-KMM6MUN4701\", \"folders\": [{ \"added\": true, \"id\": "
         "-7338009380596345790, \"mode\": 1 }, { \"added\": true, \"id\": 3964779361527927184, "
         "\"mode\": 1 }, { \"added\": true, \"id\": 4780923171276619705, \"mode\": 1 }, { "
         "\"added\": true, \"id\": 5471258729987051831, \"mode\": 1 }], \"id\": "
         "\"CDPMQEE6KJCDTWKFJK7CXMKHL35LIVV\", \"lastseen\": 1428196287, \"lastsynccompleted\": "
         "1428196287, \"name\": \"WIN-KMM6MUN4701\", \"online\": true, \"self\": false, "
         "\"syncerr\": 0, \"syncerrmsg\": \"\", \"userid\": \"\" }]})...",
         LogEventKind::api_response,
         {{"api_name", "getmfdevices"}, {"api_complete", "1"}}},
        {"[2015-04-03 16:51:48] API: <-- getpendingrequests({ \"status\": 200, \"value\": [{ "
         "\"access_level\": 3, \"id\": \"5471258729987051831\", \"ip\": \"192.168.220.176\", "
         "\"license\": false, \"readwrite\": true, \"time\": 1428051108, \"user_identity\": { "
         "\"devicename\": \"device\", \"fingerprint\": "
         "\"2UMI566O3XAE7BB2V3N3YWWECJ3TCGJHMRGZTVLN2SZY276QI4AQ\", \"username\": \"Guest\" } "
         "}]})...",
         LogEventKind::api_response,
         {{"api_name", "getpendingrequests"}, {"api_complete", "1"}}},
        {"[2015-04-05 09:05:37] API: <-- getsyncfolders({ \"folders\": [{ \"access\": 4, "
         "\"archive\": \"C:\\Sync\\.\\sync\\Archive\", \"archive_files\": 3, \"archive_size\": "
         "153187, \"date_added\": 1428049323, \"down_eta\": 0, \"down_speed\": 0, "
         "\"down_status\": 100, \"error\": 0, \"files\": 3, \"folderid\": "
         "\"5471258729987051831\", \"has_key\": true, \"indexing\": false, \"ismanaged\": true, "
         "\"iswritable\": true, \"last_modified\": 1428053450, \"name\": \"Sync\", \"path\": "
         "\"C:\\Sync\", \"paused\": false, \"peers\": [{ \"direct\": true, \"downdiff\": 0, "
         "\"id\": \"10DEC8109E524439D9454ABE2BB1475BF7D5A2B5\", \"isonline\": true, "
         "\"lastreceivedtime\": 0, \"lastsenttime\": 1428051120, \"lastsyncntime\": 1428051129, "
         "\"name\": \"WIN-KMM6MUN4701\", \"updiff\": 0, \"userid\": "
         "\"UQO52P4G5O2QU6OOGX3AS7R6RUAU22JBBWJ4H2CYNXHRO3KIRVBQ\" }], \"size\": 321638, "
         "\"status\": \"314.0 kB in 3 files\", \"stopped\": false, \"synclevel\": 2, \"up_eta\": "
         "0, \"up_speed\": 0, \"up_status\": 100, \"users\": [{ \"access\": 3, \"id\": "
         "\"2UMI566O3XAE7BB2V3N3YWWECJ3TCGJHMRGZTVLN2SZY276QI4AQ\", \"name\": \"Guest\" }] }, ...",
         LogEventKind::api_response,
         {{"api_name", "getsyncfolders"}, {"api_complete", "0"}}},
        {"[2015-04-03 16:43:13] API: <-- getfoldersstoragepath({ \"status\": 200, \"value\": "
         "\"C:\\Users\\anonymous\\BitTorrent Sync\" })",
         LogEventKind::api_response,
         {{"api_name", "getfoldersstoragepath"}, {"api_complete", "1"}}},
        {"[2015-04-05 09:05:33] API: <-- setfoldersstoragepath({ \"path\": "
         "\"C:\\Users\\anonymous\\BitTorrent Sync\", \"status\": 200 })",
         LogEventKind::api_response,
         {{"api_name", "setfoldersstoragepath"}, {"api_complete", "1"}}},
        {"[2015-04-04 20:27:22] API: --> addsyncfolder(path=C%3A%5C\\Syn&selectivesync=false&t="
         "1428150442927)",
         LogEventKind::api_request,
         {{"api_name", "addsyncfolder"},
          {"api_params", "path=C%3A%5C\\Syn&selectivesync=false&t=1428150442927"}}},
        {"[2015-04-05 08:33:06] API: <-- history({ \"status\": 200, \"value\": [{ \"id\": 39, "
         "\"msg\": \"WIN-KMM6MUN4701 updated file Enron3111.zip\", \"time\": 1428193777 }, { "
         "\"id\": 38, \"msg\": \"WIN-KMM6MUN4701 updated file Enron3111.txt\", \"time\": "
         "1428193777 }, { \"id\": 37, \"msg\": \"Remote peer removed file Enron3111.rtf\", "
         "\"time\": 1428193777 }, { \"id\": 13, \"msg\": \"Added file Enron3111.docx\", \"time\": "
         "1428153859 }]})...",
         LogEventKind::api_response,
         {{"api_name", "history"}, {"api_complete", "1"}}},
        // lines outside the recognized grammar stay unrecognized
        {"[2015-04-03 16:51:58] SD[BBAD]: Peer 1: local IP 192.168.220.176:20566",
         LogEventKind::unrecognized,
         {}},
        {"Peer 1: 60.50.83.170:49449 10DEC8109E524439D9454ABE2BB1475BF7D5A2B5",
         LogEventKind::unrecognized,
         {}},
        {"[2015-04-17 12:51:19] API: callback id=19, value=\"{ \"value\": {\"peerid\": "
         "\"CDPMQEE6KJCDTWKFJK7CXMKHL35LIVV\"}, \" can_deferred=0, delegate=0x1c57d48...",
         LogEventKind::unrecognized,
         {}},
        {"hello world", LogEventKind::unrecognized, {}},
    };
    return rows;
}

// Renders the field of an event by the golden table's field name.
inline std::optional<std::string> field_of(const btsf::logparse::LogEvent& ev,
                                           const std::string& name) {
    auto opt_int = [](const std::optional<std::int64_t>& v) -> std::optional<std::string> {
        if (!v) return std::nullopt;
        return std::to_string(*v);
    };
    if (name == "timestamp") {
        if (!ev.timestamp) return std::nullopt;
        return ev.timestamp->text();
    }
    if (name == "platform") return ev.platform;
    if (name == "version") return ev.version;
    if (name == "peer_id_hex") return ev.peer_id_hex;
    if (name == "peer_id_b32") return ev.peer_id_b32;
    if (name == "device_name") return ev.device_name;
    if (name == "ip") return ev.ip;
    if (name == "ip_from") return ev.ip_from;
    if (name == "ip_to") return ev.ip_to;
    if (name == "addr") return ev.addr;
    if (name == "share_id_hex") return ev.share_id_hex;
    if (name == "path") return ev.path;
    if (name == "folder_name") return ev.folder_name;
    if (name == "folder_id") return opt_int(ev.folder_id);
    if (name == "file") return ev.file;
    if (name == "mtime") return opt_int(ev.mtime);
    if (name == "hash_hex") return ev.hash_hex;
    if (name == "time_value") return opt_int(ev.time_value);
    if (name == "insert_suffix") return ev.insert_suffix;
    if (name == "api_name") return ev.api_name;
    if (name == "api_params") return ev.api_params;
    if (name == "tag") return ev.tag;
    if (name == "broadcast") {
        if (!ev.broadcast) return std::nullopt;
        return std::to_string(*ev.broadcast);
    }
    if (name == "direct") {
        if (!ev.direct) return std::nullopt;
        return std::to_string(*ev.direct);
    }
    if (name == "transport") {
        if (!ev.transport) return std::nullopt;
        return std::to_string(*ev.transport);
    }
    if (name == "api_complete") {
        if (!ev.api_complete) return std::nullopt;
        return *ev.api_complete ? "1" : "0";
    }
    return std::nullopt;
}

} // namespace loggolden
