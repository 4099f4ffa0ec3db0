#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btsf/bencode.hpp"
#include "btsf/keycodec.hpp"

namespace btsf::metadata {

using bencode::BValue;

struct SettingsRecord {
    std::optional<std::string> exe_path;
    std::optional<std::int64_t> install_time;
    std::optional<PeerId> peer_id;
    std::optional<std::int64_t> log_size;
    std::optional<BValue> search_list;  // opaque
    std::optional<BValue> tracker_last; // opaque
    std::map<std::string, BValue> unknown;
    std::vector<std::string> warnings;
};

enum class IdentitySource {
    sync_dat_identity,
    sync_dat_identities,
    identity_dat_file,
    identities_dir_file,
};

const char* identity_source_name(IdentitySource s);

struct IdentityRecord {
    std::string name;
    std::optional<BValue> public_keys;  // opaque
    std::optional<BValue> private_keys; // opaque; local sources only
    IdentitySource source = IdentitySource::sync_dat_identity;
    std::optional<std::string> fingerprint; // from identities/[fingerprint] filename
    std::map<std::string, BValue> unknown;
};

enum class PermissionLabel { read_only = 2, read_write = 3, owner = 4, unknown = -1 };

// The 2/3/4 meaning is a hypothesis, not a verified protocol fact; reports
// label it as such.
PermissionLabel permission_label_of(std::int64_t code);
const char* permission_label_name(PermissionLabel p);

struct AccessRequest {
    std::optional<NetAddr> addr;
    std::string name;
    std::optional<BValue> public_keys;
    std::optional<std::string> invite; // base32 temporary key
    std::optional<std::int64_t> folder_id;
    std::optional<std::int64_t> req_time;
    std::optional<std::int64_t> requested_permissions;
    std::optional<std::int64_t> granted_permissions;
    PermissionLabel permission_label = PermissionLabel::unknown;
};

struct PeerStatus {
    std::string name;
    std::optional<NetAddr> last_addr;
    std::optional<std::int64_t> last_sync_completed;
    std::optional<std::int64_t> last_seen;
    std::optional<std::int64_t> last_data_sent;
};

enum class DiscoveryMethod { relay_server, tracker_server, lan_search, dht_search, predefined_hosts };

const char* discovery_method_name(DiscoveryMethod m);

struct AclEntry {
    std::string name;
    std::optional<BValue> public_keys;
    std::optional<std::string> issuer;
    std::optional<std::int64_t> linked_time;
};

struct FolderRecord {
    std::optional<std::int64_t> folder_id;
    std::optional<std::string> path;
    std::optional<std::int64_t> date_added;
    std::optional<std::int64_t> last_modified;
    std::vector<DiscoveryMethod> discovery_flags;
    bool in_trash = false;
    std::vector<AclEntry> acl;
    std::vector<PeerStatus> peers;
    std::map<std::string, BValue> unknown;
};

struct SyncDatRecord {
    std::optional<std::string> device;
    std::optional<IdentityRecord> identity;
    std::vector<IdentityRecord> identities;
    std::vector<AccessRequest> access_requests;
    std::vector<FolderRecord> folders;
    std::vector<std::string> warnings;
};

struct HistoryEntry {
    std::int64_t id = 0;
    std::string msg;
    std::int64_t time = 0;
};

Result<SettingsRecord> parse_settings(const BValue& v);
Result<SyncDatRecord> parse_sync_dat(const BValue& v);
Result<std::vector<HistoryEntry>> parse_history(const BValue& v);
Result<IdentityRecord> parse_identity(const BValue& v, IdentitySource source,
                                      std::optional<std::string> fingerprint = std::nullopt);
// info.dat carries folder metadata (acl and friends) in the same shape as a
// sync.dat 'folders' element.
Result<FolderRecord> parse_info(const BValue& v);
Result<ShareId> parse_id_file(ByteView raw);
Result<std::int64_t> parse_pid(ByteView raw);

struct FileEntry {
    std::string name; // relative to the evidence folder, '/'-separated
    std::uint64_t size = 0;
    std::int64_t mtime = 0;
};

enum class EvidenceKind { shared_folder, identity_app_folder, device_folders_dir };

const char* evidence_kind_name(EvidenceKind k);

struct FolderEvidence {
    std::string root_path; // relative to the scanned root
    std::optional<ShareId> share_id;
    std::vector<FileEntry> archived_files;
    std::vector<FileEntry> live_files;
    EvidenceKind kind = EvidenceKind::shared_folder;
};

struct DeviceFolderMapping {
    std::string peer_id_b32;
    std::vector<std::int64_t> folder_ids;
};

struct TreeScan {
    std::vector<FolderEvidence> folders;
    std::vector<DeviceFolderMapping> device_folders;
    std::vector<std::string> warnings;
};

// Read-only walk; results are path-sorted and deterministic.
TreeScan scan_tree(const std::filesystem::path& root);

std::int64_t mtime_epoch(const std::filesystem::path& p);

} // namespace btsf::metadata
