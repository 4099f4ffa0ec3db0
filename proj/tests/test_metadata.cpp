#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "btsf/metadata.hpp"

using namespace btsf;
using namespace btsf::metadata;
using bencode::BValue;

namespace fs = std::filesystem;

static BValue bstr(std::string_view s) { return BValue::str(s); }
static BValue bint(std::int64_t v) { return BValue::integer(v); }

TEST_CASE("parse_settings: known keys and unknown preservation") {
    Bytes pid(20, 0xAB);
    BValue v = BValue::dict({
        {to_bytes("install_time"), bint(1428049110)},
        {to_bytes("peer_id"), BValue::bin(pid)},
        {to_bytes("exe_path"), bstr("C:\\Program Files\\BitTorrent Sync\\BitTorrent Sync.exe")},
        {to_bytes("log_size"), bint(104857600)},
        {to_bytes("mystery"), bint(7)},
    });
    auto r = parse_settings(v);
    REQUIRE(r.ok());
    const SettingsRecord& rec = r.value();
    CHECK(rec.install_time == 1428049110);
    REQUIRE(rec.peer_id.has_value());
    CHECK(rec.peer_id->bytes[0] == 0xAB);
    CHECK(rec.exe_path->find("BitTorrent Sync.exe") != std::string::npos);
    CHECK(rec.log_size == 104857600);
    REQUIRE(rec.unknown.count("mystery") == 1);
    CHECK(rec.unknown.at("mystery").as_int() == 7);
}

TEST_CASE("parse_settings: empty dict and wrong root") {
    auto empty = parse_settings(BValue::dict({}));
    REQUIRE(empty.ok());
    CHECK(!empty.value().install_time.has_value());
    CHECK(!empty.value().peer_id.has_value());
    CHECK(empty.value().unknown.empty());

    auto bad = parse_settings(BValue::list({}));
    REQUIRE(!bad.ok());
    CHECK(bad.error().code == Errc::not_a_dict);
}

TEST_CASE("parse_settings: malformed peer_id becomes a warning") {
    BValue v = BValue::dict({{to_bytes("peer_id"), BValue::bin(Bytes(5, 1))}});
    auto r = parse_settings(v);
    REQUIRE(r.ok());
    CHECK(!r.value().peer_id.has_value());
    REQUIRE(!r.value().warnings.empty());
}

static BValue make_sync_dat() {
    Bytes addr = {192, 168, 220, 176, 0xC2, 0x46};
    BValue request = BValue::dict({
        {to_bytes("addr"), BValue::bin(addr)},
        {to_bytes("name"), bstr("Guest")},
        {to_bytes("invite"), bstr("ABCDEFGH")},
        {to_bytes("folder_id"), bint(5471258729987051831LL)},
        {to_bytes("req_time"), bint(1428051108)},
        {to_bytes("requested_permissions"), bint(3)},
    });
    BValue folder = BValue::dict({
        {to_bytes("folder_id"), bint(-2775350472753142605LL)},
        {to_bytes("path"), bstr("C:\\Sync")},
        {to_bytes("date_added"), bint(1428049323)},
        {to_bytes("last_modified"), bint(1428053450)},
        {to_bytes("use_tracker"), bint(1)},
        {to_bytes("use_relay"), bint(1)},
        {to_bytes("use_lan"), bint(0)},
        {to_bytes("in_trash"), bint(0)},
        {to_bytes("acl"), BValue::list({BValue::dict({
                              {to_bytes("name"), bstr("Host")},
                              {to_bytes("linked_time"), bint(1428049323)},
                          })})},
        {to_bytes("peers"),
         BValue::list({BValue::dict({
             {to_bytes("name"), bstr("WIN-KMM6MUN4701")},
             {to_bytes("last_addr"), BValue::bin(addr)},
             {to_bytes("last_sync_completed"), bint(1428196287)},
             {to_bytes("last_seen"), bint(1428196287)},
         })})},
    });
    return BValue::dict({
        {to_bytes("device"), bstr("HOSTBOX")},
        {to_bytes("identity"),
         BValue::dict({{to_bytes("name"), bstr("Host")},
                       {to_bytes("private_keys"), bstr("opaque-priv")},
                       {to_bytes("public_keys"), bstr("opaque-pub")}})},
        {to_bytes("identities"),
         BValue::list({BValue::dict({{to_bytes("name"), bstr("Guest")},
                                     {to_bytes("public_keys"), bstr("opaque-pub-2")}})})},
        {to_bytes("access-requests"), BValue::list({request})},
        {to_bytes("folders"), BValue::list({folder})},
    });
}

TEST_CASE("parse_sync_dat: full record") {
    auto r = parse_sync_dat(make_sync_dat());
    REQUIRE(r.ok());
    const SyncDatRecord& rec = r.value();
    CHECK(rec.device == "HOSTBOX");
    REQUIRE(rec.identity.has_value());
    CHECK(rec.identity->name == "Host");
    CHECK(rec.identity->private_keys.has_value());
    CHECK(rec.identity->source == IdentitySource::sync_dat_identity);
    REQUIRE(rec.identities.size() == 1);
    CHECK(rec.identities[0].name == "Guest");
    CHECK(!rec.identities[0].private_keys.has_value());

    REQUIRE(rec.access_requests.size() == 1);
    const AccessRequest& req = rec.access_requests[0];
    CHECK(req.name == "Guest");
    CHECK(req.req_time == 1428051108);
    CHECK(req.requested_permissions == 3);
    CHECK(req.permission_label == PermissionLabel::read_write);
    REQUIRE(req.addr.has_value());
    CHECK(req.addr->to_string() == "192.168.220.176:49734");

    REQUIRE(rec.folders.size() == 1);
    const FolderRecord& f = rec.folders[0];
    CHECK(f.folder_id == -2775350472753142605LL);
    CHECK(f.path == "C:\\Sync");
    CHECK(f.date_added == 1428049323);
    CHECK(f.last_modified == 1428053450);
    CHECK(!f.in_trash);
    REQUIRE(f.discovery_flags.size() == 2);
    CHECK(std::count(f.discovery_flags.begin(), f.discovery_flags.end(),
                     DiscoveryMethod::tracker_server) == 1);
    CHECK(std::count(f.discovery_flags.begin(), f.discovery_flags.end(),
                     DiscoveryMethod::relay_server) == 1);
    REQUIRE(f.acl.size() == 1);
    CHECK(f.acl[0].name == "Host");
    CHECK(f.acl[0].linked_time == 1428049323);
    REQUIRE(f.peers.size() == 1);
    CHECK(f.peers[0].name == "WIN-KMM6MUN4701");
    CHECK(f.peers[0].last_seen == 1428196287);
    REQUIRE(f.peers[0].last_addr.has_value());
    CHECK(f.peers[0].last_addr->port == 49734);
    CHECK(rec.warnings.empty());
}

TEST_CASE("parse_sync_dat: permission label codes") {
    CHECK(permission_label_of(2) == PermissionLabel::read_only);
    CHECK(permission_label_of(3) == PermissionLabel::read_write);
    CHECK(permission_label_of(4) == PermissionLabel::owner);
    CHECK(permission_label_of(9) == PermissionLabel::unknown);
}

TEST_CASE("parse_sync_dat: empty dict warns about empty folders") {
    auto r = parse_sync_dat(BValue::dict({}));
    REQUIRE(r.ok());
    CHECK(!r.value().device.has_value());
    CHECK(r.value().folders.empty());
    REQUIRE(!r.value().warnings.empty());
    CHECK(r.value().warnings[0].find("EmptyFolders") != std::string::npos);
}

TEST_CASE("parse_sync_dat: per-entry failures never fail globally") {
    BValue v = BValue::dict({
        {to_bytes("folders"), BValue::list({bint(3)})},
        {to_bytes("access-requests"), bstr("not-a-list")},
    });
    auto r = parse_sync_dat(v);
    REQUIRE(r.ok());
    CHECK(r.value().folders.empty());
    CHECK(r.value().warnings.size() >= 2);
}

TEST_CASE("parse_history: sorted by id") {
    BValue v = BValue::list({
        BValue::dict({{to_bytes("id"), bint(39)},
                      {to_bytes("msg"), bstr("WIN-KMM6MUN4701 updated file Enron3111.zip")},
                      {to_bytes("time"), bint(1428193777)}}),
        BValue::dict({{to_bytes("id"), bint(13)},
                      {to_bytes("msg"), bstr("Added file Enron3111.docx")},
                      {to_bytes("time"), bint(1428153859)}}),
    });
    auto r = parse_history(v);
    REQUIRE(r.ok());
    REQUIRE(r.value().size() == 2);
    CHECK(r.value()[0].id == 13);
    CHECK(r.value()[1].id == 39);
    CHECK(r.value()[1].msg == "WIN-KMM6MUN4701 updated file Enron3111.zip");
    CHECK(r.value()[1].time == 1428193777);
}

TEST_CASE("parse_history: empty and wrapped and unparseable") {
    auto empty = parse_history(BValue::list({}));
    REQUIRE(empty.ok());
    CHECK(empty.value().empty());

    BValue wrapped = BValue::dict({{to_bytes("history"), BValue::list({BValue::dict({
                                       {to_bytes("id"), bint(1)},
                                       {to_bytes("msg"), bstr("m")},
                                       {to_bytes("time"), bint(2)},
                                   })})}});
    auto w = parse_history(wrapped);
    REQUIRE(w.ok());
    CHECK(w.value().size() == 1);

    CHECK(!parse_history(BValue::integer(3)).ok());
}

TEST_CASE("parse_identity: private keys only from local sources") {
    BValue v = BValue::dict({{to_bytes("name"), bstr("Host")},
                             {to_bytes("private_keys"), bstr("p")},
                             {to_bytes("public_keys"), bstr("q")}});
    auto local = parse_identity(v, IdentitySource::identity_dat_file);
    REQUIRE(local.ok());
    CHECK(local.value().private_keys.has_value());

    auto peer = parse_identity(v, IdentitySource::identities_dir_file, "2UMI566O");
    REQUIRE(peer.ok());
    CHECK(!peer.value().private_keys.has_value());
    CHECK(peer.value().unknown.count("private_keys") == 1);
    CHECK(peer.value().fingerprint == "2UMI566O");
}

TEST_CASE("parse_id_file: hex and raw forms") {
    std::string hex40 = "6C25389E651AC160F91ECA3D9A249C58F6BED155";
    auto h = parse_id_file(ByteView(reinterpret_cast<const std::uint8_t*>(hex40.data()), hex40.size()));
    REQUIRE(h.ok());
    CHECK(h.value().width == ShareWidth::w20);
    CHECK(h.value().hex() == hex40);

    std::string spaced = "6C 25 38 9E 65 1A C1 60 F9 1E CA 3D 9A 24 9C 58 F6 BE D1 55\n";
    auto s = parse_id_file(ByteView(reinterpret_cast<const std::uint8_t*>(spaced.data()), spaced.size()));
    REQUIRE(s.ok());
    CHECK(s.value().hex() == hex40);

    Bytes raw32(32, 0x5A);
    auto r32 = parse_id_file(ByteView(raw32.data(), raw32.size()));
    REQUIRE(r32.ok());
    CHECK(r32.value().width == ShareWidth::w32);

    Bytes raw20(20, 0x01);
    raw20[0] = 0xFE; // not hex text
    auto r20 = parse_id_file(ByteView(raw20.data(), raw20.size()));
    REQUIRE(r20.ok());
    CHECK(r20.value().width == ShareWidth::w20);

    Bytes bad(10, 0xFF);
    CHECK(parse_id_file(ByteView(bad.data(), bad.size())).error().code ==
          Errc::bad_share_id_length);
    CHECK(!parse_id_file(ByteView{}).ok());
}

TEST_CASE("parse_pid") {
    std::string txt = "3838\n";
    auto p = parse_pid(ByteView(reinterpret_cast<const std::uint8_t*>(txt.data()), txt.size()));
    REQUIRE(p.ok());
    CHECK(p.value() == 3838);
    std::string bad = "abc";
    CHECK(!parse_pid(ByteView(reinterpret_cast<const std::uint8_t*>(bad.data()), bad.size())).ok());
}

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("btsf-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, std::string_view content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string tree_digest(const fs::path& root) {
    std::vector<std::string> parts;
    for (fs::recursive_directory_iterator it(root), end; it != end; ++it) {
        std::string rec = fs::relative(it->path(), root).generic_string();
        if (it->is_regular_file()) {
            std::ifstream in(it->path(), std::ios::binary);
            std::string body((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            rec += "#" + std::to_string(std::hash<std::string>{}(body));
        }
        parts.push_back(rec);
    }
    std::sort(parts.begin(), parts.end());
    std::string all;
    for (const auto& p : parts) all += p + ";";
    return all;
}

} // namespace

TEST_CASE("scan_tree: shared folder, identity folder, device mappings") {
    TempDir tmp;
    write_file(tmp.path / "Sync" / ".sync" / "ID",
               "6C25389E651AC160F91ECA3D9A249C58F6BED155");
    write_file(tmp.path / "Sync" / ".sync" / "Archive" / "a.txt", "archived");
    write_file(tmp.path / "Sync" / "b.txt", "live");
    write_file(tmp.path / "Sync" / "sub" / "c.txt", "deeper");
    write_file(tmp.path / ".SyncUser123456" / "devices" / "CDPMQEE6KJCDTWKFJK7CXMKHLP35LIVV" /
                   "folders" / "5471258729987051831",
               "");
    write_file(tmp.path / "Unrelated" / "x.txt", "noise");

    std::string before = tree_digest(tmp.path);
    TreeScan scan = scan_tree(tmp.path);
    CHECK(tree_digest(tmp.path) == before); // read-only walk

    REQUIRE(scan.folders.size() == 3);
    // path-sorted: .SyncUser..., .SyncUser.../devices/.../folders, Sync
    CHECK(scan.folders[0].kind == EvidenceKind::identity_app_folder);
    CHECK(scan.folders[0].root_path == ".SyncUser123456");
    CHECK(scan.folders[1].kind == EvidenceKind::device_folders_dir);
    const FolderEvidence* shared = nullptr;
    for (const auto& f : scan.folders)
        if (f.kind == EvidenceKind::shared_folder) shared = &f;
    REQUIRE(shared != nullptr);
    CHECK(shared->root_path == "Sync");
    REQUIRE(shared->share_id.has_value());
    CHECK(shared->share_id->hex() == "6C25389E651AC160F91ECA3D9A249C58F6BED155");
    REQUIRE(shared->archived_files.size() == 1);
    CHECK(shared->archived_files[0].name == "a.txt");
    CHECK(shared->archived_files[0].size == 8);
    REQUIRE(shared->live_files.size() == 2);
    CHECK(shared->live_files[0].name == "b.txt");
    CHECK(shared->live_files[1].name == "sub/c.txt");

    REQUIRE(scan.device_folders.size() == 1);
    CHECK(scan.device_folders[0].peer_id_b32 == "CDPMQEE6KJCDTWKFJK7CXMKHLP35LIVV");
    REQUIRE(scan.device_folders[0].folder_ids.size() == 1);
    CHECK(scan.device_folders[0].folder_ids[0] == 5471258729987051831LL);
}

TEST_CASE("scan_tree: empty root and missing root") {
    TempDir tmp;
    TreeScan scan = scan_tree(tmp.path);
    CHECK(scan.folders.empty());
    CHECK(scan.device_folders.empty());

    TreeScan missing = scan_tree(tmp.path / "nope");
    CHECK(missing.folders.empty());
    REQUIRE(!missing.warnings.empty());
}
