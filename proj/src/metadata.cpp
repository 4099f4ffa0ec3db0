#include "btsf/metadata.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>

namespace btsf::metadata {

namespace fs = std::filesystem;

const char* identity_source_name(IdentitySource s) {
    switch (s) {
        case IdentitySource::sync_dat_identity: return "SyncDatIdentity";
        case IdentitySource::sync_dat_identities: return "SyncDatIdentities";
        case IdentitySource::identity_dat_file: return "IdentityDatFile";
        case IdentitySource::identities_dir_file: return "IdentitiesDirFile";
    }
    return "Unknown";
}

PermissionLabel permission_label_of(std::int64_t code) {
    switch (code) {
        case 2: return PermissionLabel::read_only;
        case 3: return PermissionLabel::read_write;
        case 4: return PermissionLabel::owner;
        default: return PermissionLabel::unknown;
    }
}

const char* permission_label_name(PermissionLabel p) {
    switch (p) {
        case PermissionLabel::read_only: return "ReadOnly";
        case PermissionLabel::read_write: return "ReadWrite";
        case PermissionLabel::owner: return "Owner";
        case PermissionLabel::unknown: return "Unknown";
    }
    return "Unknown";
}

const char* discovery_method_name(DiscoveryMethod m) {
    switch (m) {
        case DiscoveryMethod::relay_server: return "RelayServer";
        case DiscoveryMethod::tracker_server: return "TrackerServer";
        case DiscoveryMethod::lan_search: return "LanSearch";
        case DiscoveryMethod::dht_search: return "DhtSearch";
        case DiscoveryMethod::predefined_hosts: return "PredefinedHosts";
    }
    return "Unknown";
}

const char* evidence_kind_name(EvidenceKind k) {
    switch (k) {
        case EvidenceKind::shared_folder: return "SharedFolder";
        case EvidenceKind::identity_app_folder: return "IdentityAppFolder";
        case EvidenceKind::device_folders_dir: return "DeviceFoldersDir";
    }
    return "Unknown";
}

namespace {

std::optional<std::string> get_text(const BValue& dict, std::string_view key) {
    const BValue* v = dict.find(key);
    if (!v || !v->is_bytes()) return std::nullopt;
    return v->as_text();
}

std::optional<std::int64_t> get_int(const BValue& dict, std::string_view key) {
    const BValue* v = dict.find(key);
    if (!v || !v->is_int()) return std::nullopt;
    return v->as_int();
}

std::optional<NetAddr> get_addr(const BValue& dict, std::string_view key,
                                std::vector<std::string>* warnings, const char* where) {
    const BValue* v = dict.find(key);
    if (!v) return std::nullopt;
    if (v->is_bytes()) {
        auto a = decode_netaddr(ByteView(v->as_bytes().data(), v->as_bytes().size()));
        if (a.ok()) return a.take();
    }
    if (warnings)
        warnings->push_back(std::string(where) + ": '" + std::string(key) +
                            "' is not a 6-byte network-order address");
    return std::nullopt;
}

bool known_key(std::string_view key, std::initializer_list<std::string_view> known) {
    for (auto k : known)
        if (k == key) return true;
    return false;
}

// Folder flag names observed for the peer-discovery options; matching is
// case-insensitive with '_'/'-'/' ' treated alike.
std::optional<DiscoveryMethod> discovery_method_of_key(std::string_view raw) {
    std::string k;
    for (char c : raw) {
        if (c == '-' || c == ' ') c = '_';
        k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (k == "use_relay" || k == "use_relay_server" || k == "relay")
        return DiscoveryMethod::relay_server;
    if (k == "use_tracker" || k == "use_tracker_server" || k == "tracker")
        return DiscoveryMethod::tracker_server;
    if (k == "use_lan" || k == "search_lan" || k == "lan" || k == "use_lan_broadcast")
        return DiscoveryMethod::lan_search;
    if (k == "use_dht" || k == "search_dht" || k == "dht")
        return DiscoveryMethod::dht_search;
    if (k == "use_hosts" || k == "predefined_hosts" || k == "use_known_hosts" || k == "known_hosts")
        return DiscoveryMethod::predefined_hosts;
    return std::nullopt;
}

AclEntry parse_acl_entry(const BValue& v) {
    AclEntry e;
    if (auto name = get_text(v, "name")) e.name = *name;
    if (const BValue* pk = v.find("public_keys")) e.public_keys = *pk;
    // issuer / linked-time spellings are not pinned down; read defensively
    for (const char* key : {"issuer", "signature_issuer", "issued_by"}) {
        if (auto t = get_text(v, key)) {
            e.issuer = *t;
            break;
        }
    }
    for (const char* key : {"linked_time", "link_time", "time"}) {
        if (auto t = get_int(v, key)) {
            e.linked_time = *t;
            break;
        }
    }
    return e;
}

PeerStatus parse_peer_status(const BValue& v, std::vector<std::string>* warnings) {
    PeerStatus p;
    if (auto name = get_text(v, "name")) p.name = *name;
    p.last_addr = get_addr(v, "last_addr", warnings, "peers");
    p.last_sync_completed = get_int(v, "last_sync_completed");
    p.last_seen = get_int(v, "last_seen");
    p.last_data_sent = get_int(v, "last_data_sent");
    return p;
}

FolderRecord parse_folder_record(const BValue& v, std::vector<std::string>* warnings) {
    FolderRecord f;
    f.folder_id = get_int(v, "folder_id");
    f.path = get_text(v, "path");
    f.date_added = get_int(v, "date_added");
    f.last_modified = get_int(v, "last_modified");
    if (auto trash = get_int(v, "in_trash")) f.in_trash = *trash != 0;

    if (const BValue* acl = v.find("acl"); acl && acl->is_list()) {
        for (const BValue& e : acl->as_list()) {
            if (e.is_dict())
                f.acl.push_back(parse_acl_entry(e));
            else if (warnings)
                warnings->push_back("acl entry is not a dict, skipped");
        }
    }
    if (const BValue* peers = v.find("peers"); peers && peers->is_list()) {
        for (const BValue& e : peers->as_list()) {
            if (e.is_dict())
                f.peers.push_back(parse_peer_status(e, warnings));
            else if (warnings)
                warnings->push_back("peers entry is not a dict, skipped");
        }
    }
    for (const auto& [kb, val] : v.as_dict()) {
        std::string key = to_string(kb);
        if (known_key(key, {"folder_id", "path", "date_added", "last_modified", "in_trash", "acl",
                            "peers"}))
            continue;
        if (auto method = discovery_method_of_key(key)) {
            if (val.is_int() && val.as_int() != 0) f.discovery_flags.push_back(*method);
            continue;
        }
        f.unknown.emplace(key, val);
    }
    std::sort(f.discovery_flags.begin(), f.discovery_flags.end());
    f.discovery_flags.erase(std::unique(f.discovery_flags.begin(), f.discovery_flags.end()),
                            f.discovery_flags.end());
    return f;
}

AccessRequest parse_access_request(const BValue& v, std::vector<std::string>* warnings) {
    AccessRequest r;
    r.addr = get_addr(v, "addr", warnings, "access-requests");
    if (auto name = get_text(v, "name")) r.name = *name;
    if (const BValue* pk = v.find("public_keys")) r.public_keys = *pk;
    r.invite = get_text(v, "invite");
    r.folder_id = get_int(v, "folder_id");
    r.req_time = get_int(v, "req_time");
    r.requested_permissions = get_int(v, "requested_permissions");
    r.granted_permissions = get_int(v, "granted_permissions");
    if (r.requested_permissions)
        r.permission_label = permission_label_of(*r.requested_permissions);
    return r;
}

} // namespace

Result<SettingsRecord> parse_settings(const BValue& v) {
    if (!v.is_dict()) return make_error(Errc::not_a_dict, "settings.dat root is not a dict");
    SettingsRecord rec;
    rec.exe_path = get_text(v, "exe_path");
    rec.install_time = get_int(v, "install_time");
    if (rec.install_time && *rec.install_time < 0) {
        rec.warnings.push_back("install_time is negative, ignored");
        rec.install_time.reset();
    }
    if (const BValue* pid = v.find("peer_id")) {
        if (pid->is_bytes()) {
            auto p = peer_id_from_bytes(ByteView(pid->as_bytes().data(), pid->as_bytes().size()));
            if (p.ok())
                rec.peer_id = p.take();
            else
                rec.warnings.push_back("peer_id: " + p.error().to_string());
        } else {
            rec.warnings.push_back("peer_id is not a byte string");
        }
    }
    rec.log_size = get_int(v, "log_size");
    if (const BValue* sl = v.find("search_list")) rec.search_list = *sl;
    if (const BValue* tl = v.find("tracker_last")) rec.tracker_last = *tl;
    for (const auto& [kb, val] : v.as_dict()) {
        std::string key = to_string(kb);
        if (known_key(key, {"exe_path", "install_time", "peer_id", "log_size", "search_list",
                            "tracker_last"}))
            continue;
        rec.unknown.emplace(key, val);
    }
    return rec;
}

Result<IdentityRecord> parse_identity(const BValue& v, IdentitySource source,
                                      std::optional<std::string> fingerprint) {
    if (!v.is_dict()) return make_error(Errc::not_a_dict, "identity record is not a dict");
    IdentityRecord rec;
    rec.source = source;
    rec.fingerprint = std::move(fingerprint);
    if (auto name = get_text(v, "name")) rec.name = *name;
    if (const BValue* pk = v.find("public_keys")) rec.public_keys = *pk;
    bool private_allowed = source == IdentitySource::sync_dat_identity ||
                           source == IdentitySource::identity_dat_file;
    for (const auto& [kb, val] : v.as_dict()) {
        std::string key = to_string(kb);
        if (key == "name" || key == "public_keys") continue;
        if (key == "private_keys") {
            if (private_allowed)
                rec.private_keys = val;
            else
                rec.unknown.emplace(key, val); // peer records must not carry it
            continue;
        }
        if (key == "fingerprint" && val.is_bytes() && !rec.fingerprint) {
            rec.fingerprint = val.as_text();
            continue;
        }
        rec.unknown.emplace(key, val);
    }
    return rec;
}

Result<SyncDatRecord> parse_sync_dat(const BValue& v) {
    if (!v.is_dict()) return make_error(Errc::not_a_dict, "sync.dat root is not a dict");
    SyncDatRecord rec;
    rec.device = get_text(v, "device");

    if (const BValue* ident = v.find("identity")) {
        auto r = parse_identity(*ident, IdentitySource::sync_dat_identity);
        if (r.ok())
            rec.identity = r.take();
        else
            rec.warnings.push_back("identity: " + r.error().to_string());
    }
    if (const BValue* idents = v.find("identities")) {
        if (idents->is_list()) {
            for (const BValue& e : idents->as_list()) {
                auto r = parse_identity(e, IdentitySource::sync_dat_identities);
                if (r.ok())
                    rec.identities.push_back(r.take());
                else
                    rec.warnings.push_back("identities entry: " + r.error().to_string());
            }
        } else if (idents->is_dict()) {
            // also seen keyed by certificate fingerprint
            for (const auto& [kb, e] : idents->as_dict()) {
                auto r = parse_identity(e, IdentitySource::sync_dat_identities, to_string(kb));
                if (r.ok())
                    rec.identities.push_back(r.take());
                else
                    rec.warnings.push_back("identities entry: " + r.error().to_string());
            }
        } else {
            rec.warnings.push_back("identities is neither list nor dict");
        }
    }
    if (const BValue* reqs = v.find("access-requests")) {
        if (reqs->is_list()) {
            for (const BValue& e : reqs->as_list()) {
                if (e.is_dict())
                    rec.access_requests.push_back(parse_access_request(e, &rec.warnings));
                else
                    rec.warnings.push_back("access-requests entry is not a dict, skipped");
            }
        } else {
            rec.warnings.push_back("access-requests is not a list");
        }
    }
    if (const BValue* folders = v.find("folders")) {
        if (folders->is_list()) {
            for (const BValue& e : folders->as_list()) {
                if (e.is_dict())
                    rec.folders.push_back(parse_folder_record(e, &rec.warnings));
                else
                    rec.warnings.push_back("folders entry is not a dict, skipped");
            }
        } else {
            rec.warnings.push_back("folders is not a list");
        }
    }
    if (rec.folders.empty())
        rec.warnings.push_back("EmptyFolders: 'folders' is empty; real artifacts always carry at "
                               "least the identity application folder");
    return rec;
}

Result<std::vector<HistoryEntry>> parse_history(const BValue& v) {
    const bencode::BValue* list = nullptr;
    if (v.is_list()) {
        list = &v;
    } else if (v.is_dict()) {
        // tolerate a wrapping dict; take the first list of entry-shaped dicts
        for (const auto& [kb, val] : v.as_dict()) {
            if (val.is_list()) {
                list = &val;
                break;
            }
        }
    }
    if (!list) return make_error(Errc::not_parseable, "history.dat holds no entry list");
    std::vector<HistoryEntry> out;
    for (const BValue& e : list->as_list()) {
        if (!e.is_dict()) continue;
        HistoryEntry h;
        if (auto id = get_int(e, "id")) h.id = *id;
        if (auto msg = get_text(e, "msg")) h.msg = *msg;
        if (auto t = get_int(e, "time")) h.time = *t;
        out.push_back(std::move(h));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const HistoryEntry& a, const HistoryEntry& b) { return a.id < b.id; });
    return out;
}

Result<FolderRecord> parse_info(const BValue& v) {
    if (!v.is_dict()) return make_error(Errc::not_a_dict, "info.dat root is not a dict");
    std::vector<std::string> warnings;
    return parse_folder_record(v, &warnings);
}

Result<ShareId> parse_id_file(ByteView raw) {
    if (raw.empty()) return make_error(Errc::bad_share_id_length, "ID file is empty");
    // hex dump reading first: strip whitespace, expect 40 or 64 digits
    std::string stripped;
    bool hexish = true;
    for (std::uint8_t b : raw) {
        if (std::isspace(b)) continue;
        if (!is_hex_digit(static_cast<char>(b))) {
            hexish = false;
            break;
        }
        stripped.push_back(static_cast<char>(b));
    }
    if (hexish && (stripped.size() == 40 || stripped.size() == 64)) {
        auto bytes = from_hex(stripped);
        return share_id_from_bytes(ByteView(bytes->data(), bytes->size()));
    }
    if (raw.size() == 20 || raw.size() == 32) return share_id_from_bytes(raw);
    if (hexish)
        return make_error(Errc::bad_share_id_length,
                          "hex share ID has " + std::to_string(stripped.size()) +
                              " digits, expected 40 or 64");
    return make_error(Errc::bad_share_id_length,
                      "ID file is " + std::to_string(raw.size()) + " bytes, expected 20 or 32");
}

Result<std::int64_t> parse_pid(ByteView raw) {
    std::string text;
    for (std::uint8_t b : raw) {
        if (std::isspace(b)) continue;
        text.push_back(static_cast<char>(b));
    }
    if (text.empty() || text.size() > 18)
        return make_error(Errc::not_parseable, "sync.pid does not hold a PID");
    std::int64_t pid = 0;
    for (char c : text) {
        if (c < '0' || c > '9')
            return make_error(Errc::not_parseable, "sync.pid does not hold a PID");
        pid = pid * 10 + (c - '0');
    }
    return pid;
}

std::int64_t mtime_epoch(const fs::path& p) {
    auto ft = fs::last_write_time(p);
    auto sys = std::chrono::file_clock::to_sys(ft);
    return std::chrono::duration_cast<std::chrono::seconds>(sys.time_since_epoch()).count();
}

namespace {

std::string relative_of(const fs::path& p, const fs::path& base) {
    return fs::relative(p, base).generic_string();
}

bool is_identity_app_dir(const std::string& name) {
    static const std::regex re(R"(^\.?SyncUser\d+$)");
    return std::regex_match(name, re);
}

bool valid_b32_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name)
        if (!((c >= 'A' && c <= 'Z') || (c >= '2' && c <= '7'))) return false;
    return true;
}

void collect_files(const fs::path& dir, const fs::path& rel_base, bool skip_dot_sync,
                   std::vector<FileEntry>& out, std::vector<std::string>& warnings) {
    std::error_code ec;
    std::vector<fs::directory_entry> entries;
    for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec))
        entries.push_back(*it);
    if (ec) {
        warnings.push_back("Unreadable: " + dir.string() + ": " + ec.message());
        return;
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.path() < b.path(); });
    for (const auto& e : entries) {
        std::error_code tec;
        if (e.is_directory(tec)) {
            if (skip_dot_sync && e.path().filename() == ".sync") continue;
            collect_files(e.path(), rel_base, skip_dot_sync, out, warnings);
        } else if (e.is_regular_file(tec)) {
            FileEntry f;
            f.name = relative_of(e.path(), rel_base);
            f.size = fs::file_size(e.path(), tec);
            f.mtime = mtime_epoch(e.path());
            out.push_back(std::move(f));
        }
        if (tec) warnings.push_back("Unreadable: " + e.path().string() + ": " + tec.message());
    }
}

void scan_identity_app_dir(const fs::path& dir, const fs::path& root, TreeScan& scan) {
    fs::path devices = dir / "devices";
    std::error_code ec;
    if (!fs::is_directory(devices, ec)) return;
    std::vector<fs::path> peers;
    for (fs::directory_iterator it(devices, ec), end; !ec && it != end; it.increment(ec))
        if (it->is_directory()) peers.push_back(it->path());
    std::sort(peers.begin(), peers.end());
    for (const fs::path& peer_dir : peers) {
        std::string b32 = peer_dir.filename().string();
        if (!valid_b32_name(b32)) {
            scan.warnings.push_back("devices entry is not base32: " + peer_dir.string());
            continue;
        }
        fs::path folders = peer_dir / "folders";
        if (!fs::is_directory(folders, ec)) continue;

        FolderEvidence ev;
        ev.root_path = relative_of(folders, root);
        ev.kind = EvidenceKind::device_folders_dir;
        scan.folders.push_back(std::move(ev));

        DeviceFolderMapping mapping;
        mapping.peer_id_b32 = b32;
        std::vector<fs::path> ids;
        for (fs::directory_iterator it(folders, ec), end; !ec && it != end; it.increment(ec))
            ids.push_back(it->path());
        std::sort(ids.begin(), ids.end());
        for (const fs::path& idp : ids) {
            std::string name = idp.filename().string();
            errno = 0;
            char* endp = nullptr;
            long long fid = std::strtoll(name.c_str(), &endp, 10);
            if (endp && *endp == '\0' && errno == 0)
                mapping.folder_ids.push_back(fid);
            else
                scan.warnings.push_back("folder mapping entry is not an ID: " + idp.string());
        }
        scan.device_folders.push_back(std::move(mapping));
    }
}

void scan_dir(const fs::path& dir, const fs::path& root, TreeScan& scan) {
    std::error_code ec;
    std::string name = dir.filename().string();

    if (is_identity_app_dir(name)) {
        FolderEvidence ev;
        ev.root_path = relative_of(dir, root);
        ev.kind = EvidenceKind::identity_app_folder;
        scan.folders.push_back(std::move(ev));
        scan_identity_app_dir(dir, root, scan);
        // still descend: identity folders can hold regular subtrees as well
    } else if (fs::is_directory(dir / ".sync", ec)) {
        FolderEvidence ev;
        ev.root_path = relative_of(dir, root);
        ev.kind = EvidenceKind::shared_folder;
        fs::path id_file = dir / ".sync" / "ID";
        if (fs::is_regular_file(id_file, ec)) {
            std::ifstream in(id_file, std::ios::binary);
            Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            auto sid = parse_id_file(ByteView(raw.data(), raw.size()));
            if (sid.ok())
                ev.share_id = sid.take();
            else
                scan.warnings.push_back(id_file.string() + ": " + sid.error().to_string());
        }
        fs::path archive = dir / ".sync" / "Archive";
        if (fs::is_directory(archive, ec))
            collect_files(archive, archive, false, ev.archived_files, scan.warnings);
        collect_files(dir, dir, true, ev.live_files, scan.warnings);
        scan.folders.push_back(std::move(ev));
    }

    std::vector<fs::path> subdirs;
    for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
        std::error_code tec;
        if (it->is_directory(tec) && it->path().filename() != ".sync") subdirs.push_back(it->path());
    }
    if (ec) scan.warnings.push_back("Unreadable: " + dir.string() + ": " + ec.message());
    std::sort(subdirs.begin(), subdirs.end());
    for (const fs::path& sub : subdirs) scan_dir(sub, root, scan);
}

} // namespace

TreeScan scan_tree(const fs::path& root) {
    TreeScan scan;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        scan.warnings.push_back("Unreadable: " + root.string() + " is not a directory");
        return scan;
    }
    scan_dir(root, root, scan);
    std::sort(scan.folders.begin(), scan.folders.end(),
              [](const FolderEvidence& a, const FolderEvidence& b) {
                  return a.root_path < b.root_path;
              });
    std::sort(scan.device_folders.begin(), scan.device_folders.end(),
              [](const DeviceFolderMapping& a, const DeviceFolderMapping& b) {
                  return a.peer_id_b32 < b.peer_id_b32;
              });
    return scan;
}

} // namespace btsf::metadata
