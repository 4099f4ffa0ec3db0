#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "btsf/error.hpp"
#include "btsf/netdissect.hpp"

namespace btsf::fixtures {

enum class Profile { minimal, two_peer_sync, deletion_case, multi_share_lan };

const char* profile_name(Profile p);
std::optional<Profile> profile_of(std::string_view name);

// Ground truth for a generated case. Edge strings are
// "<type>|<from-key>|<to-key>"; timeline strings are
// "<ts>|<usec>|<naive>|<source>|<description>" in expected order.
struct CaseManifest {
    std::uint64_t seed = 0;
    Profile profile = Profile::minimal;

    struct Device {
        std::string name;
        std::string peer_id_hex; // lowercase
        std::string peer_id_b32;
    };
    struct Identity {
        std::string name;
        std::string fingerprint;
    };
    struct Folder {
        std::int64_t folder_id = 0;
        std::string path;
        std::string name;
    };
    struct Share {
        std::string hex; // lowercase
        std::string width;
        std::string key; // empty for wire-only shares
        std::optional<std::int64_t> folder_id;
    };
    struct File {
        std::int64_t folder_id = 0;
        std::string name;
        bool deleted = false;
        std::int64_t mtime = 0;
        std::uint64_t size = 0;
    };

    std::vector<Device> devices;
    std::vector<Identity> identities;
    std::vector<Folder> folders;
    std::vector<Share> shares;
    std::vector<File> files;
    std::vector<std::string> expected_edges;    // sorted, unique triples
    std::vector<std::string> expected_timeline; // in expected order
    std::size_t log_lines = 0;
    std::size_t log_recognized = 0;
    std::size_t capture_messages = 0;

    nlohmann::ordered_json to_json() const;
    static Result<CaseManifest> from_json(const nlohmann::json& doc);
};

// Writes dats/, logs/, tree/, captures/, hints.json and manifest.json under
// out_dir. Deterministic per (seed, profile), including file mtimes.
Result<CaseManifest> gen_case(std::uint64_t seed, Profile profile,
                              const std::filesystem::path& out_dir);

// Wire builders shared with the dissector round-trip tests.
Bytes build_lan_ping_payload(const netdissect::LanPing& msg);
Bytes build_get_peers_payload(const netdissect::TrackerGetPeers& msg);
Bytes build_peers_response_payload(const netdissect::TrackerPeersResponse& msg);

struct UdpPacket {
    std::int64_t ts_sec = 0;
    std::int32_t ts_usec = 0;
    NetAddr src;
    NetAddr dst;
    Bytes payload;
};

Result<bool> write_pcap(const std::filesystem::path& file, const std::vector<UdpPacket>& packets);

} // namespace btsf::fixtures
