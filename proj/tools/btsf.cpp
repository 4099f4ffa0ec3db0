// btsf: parsing and correlation toolkit for BitTorrent Sync 2.x evidence.
//
// Subcommand map onto the analysis workflow: parse-dat covers steps 1-4 and
// 10 (metadata files), scan covers steps 5 and 8 (exported trees), parse-log
// covers steps 7, 9 and 11 (sync.log), dissect covers step 13 (captures),
// correlate executes steps 1-13 over a case directory, and report renders
// the presentation items 1-6.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "btsf/bencode.hpp"
#include "btsf/correlate.hpp"
#include "btsf/fixtures.hpp"
#include "btsf/keycodec.hpp"
#include "btsf/logparse.hpp"
#include "btsf/metadata.hpp"
#include "btsf/netdissect.hpp"
#include "btsf/report.hpp"

namespace fs = std::filesystem;
using btsf::ByteView;
using btsf::Bytes;
using nlohmann::ordered_json;

namespace {

int fail(const btsf::Error& e) {
    std::cerr << "error: " << e.to_string() << "\n";
    return 1;
}

int fail(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return 1;
}

std::optional<Bytes> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int emit(const std::string& text, const std::string& output) {
    if (output.empty() || output == "-") {
        std::cout << text;
        return 0;
    }
    std::ofstream out(output, std::ios::binary);
    if (!out) return fail("cannot write " + output);
    out << text;
    return out ? 0 : fail("short write to " + output);
}

int emit_json(const ordered_json& doc, const std::string& output) {
    return emit(doc.dump(2) + "\n", output);
}

ordered_json bvalue_json(const btsf::bencode::BValue& v) {
    using btsf::bencode::BValue;
    if (v.is_int()) return v.as_int();
    if (v.is_bytes()) return btsf::printable_or_hex(ByteView(v.as_bytes().data(), v.as_bytes().size()));
    if (v.is_list()) {
        ordered_json arr = ordered_json::array();
        for (const BValue& item : v.as_list()) arr.push_back(bvalue_json(item));
        return arr;
    }
    ordered_json obj = ordered_json::object();
    for (const auto& [k, val] : v.as_dict())
        obj[btsf::printable_or_hex(ByteView(k.data(), k.size()))] = bvalue_json(val);
    return obj;
}

ordered_json opt_json(const std::optional<std::string>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json opt_json(const std::optional<std::int64_t>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json identity_json(const btsf::metadata::IdentityRecord& rec) {
    ordered_json j;
    j["name"] = rec.name;
    j["source"] = btsf::metadata::identity_source_name(rec.source);
    j["fingerprint"] = opt_json(rec.fingerprint);
    j["has_private_keys"] = rec.private_keys.has_value();
    j["has_public_keys"] = rec.public_keys.has_value();
    if (!rec.unknown.empty()) {
        ordered_json u = ordered_json::object();
        for (const auto& [k, v] : rec.unknown) u[k] = bvalue_json(v);
        j["unknown"] = std::move(u);
    }
    return j;
}

ordered_json folder_json(const btsf::metadata::FolderRecord& f) {
    ordered_json j;
    j["folder_id"] = opt_json(f.folder_id);
    j["path"] = opt_json(f.path);
    j["date_added"] = opt_json(f.date_added);
    j["last_modified"] = opt_json(f.last_modified);
    j["in_trash"] = f.in_trash;
    ordered_json discovery = ordered_json::array();
    for (auto m : f.discovery_flags) discovery.push_back(btsf::metadata::discovery_method_name(m));
    j["discovery"] = std::move(discovery);
    ordered_json acl = ordered_json::array();
    for (const auto& e : f.acl) {
        ordered_json je;
        je["name"] = e.name;
        je["issuer"] = opt_json(e.issuer);
        je["linked_time"] = opt_json(e.linked_time);
        acl.push_back(std::move(je));
    }
    j["acl"] = std::move(acl);
    ordered_json peers = ordered_json::array();
    for (const auto& p : f.peers) {
        ordered_json jp;
        jp["name"] = p.name;
        jp["last_addr"] = p.last_addr ? ordered_json(p.last_addr->to_string()) : ordered_json(nullptr);
        jp["last_sync_completed"] = opt_json(p.last_sync_completed);
        jp["last_seen"] = opt_json(p.last_seen);
        jp["last_data_sent"] = opt_json(p.last_data_sent);
        peers.push_back(std::move(jp));
    }
    j["peers"] = std::move(peers);
    if (!f.unknown.empty()) {
        ordered_json u = ordered_json::object();
        for (const auto& [k, v] : f.unknown) u[k] = bvalue_json(v);
        j["unknown"] = std::move(u);
    }
    return j;
}

ordered_json settings_json(const btsf::metadata::SettingsRecord& rec) {
    ordered_json j;
    j["exe_path"] = opt_json(rec.exe_path);
    j["install_time"] = opt_json(rec.install_time);
    j["peer_id_hex"] = rec.peer_id ? ordered_json(rec.peer_id->hex()) : ordered_json(nullptr);
    j["peer_id_b32"] = rec.peer_id ? ordered_json(rec.peer_id->b32()) : ordered_json(nullptr);
    j["log_size"] = opt_json(rec.log_size);
    if (rec.search_list) j["search_list"] = bvalue_json(*rec.search_list);
    if (rec.tracker_last) j["tracker_last"] = bvalue_json(*rec.tracker_last);
    if (!rec.unknown.empty()) {
        ordered_json u = ordered_json::object();
        for (const auto& [k, v] : rec.unknown) u[k] = bvalue_json(v);
        j["unknown"] = std::move(u);
    }
    j["warnings"] = rec.warnings;
    return j;
}

ordered_json sync_dat_json(const btsf::metadata::SyncDatRecord& rec) {
    ordered_json j;
    j["device"] = opt_json(rec.device);
    j["identity"] = rec.identity ? identity_json(*rec.identity) : ordered_json(nullptr);
    ordered_json idents = ordered_json::array();
    for (const auto& i : rec.identities) idents.push_back(identity_json(i));
    j["identities"] = std::move(idents);
    ordered_json reqs = ordered_json::array();
    for (const auto& r : rec.access_requests) {
        ordered_json jr;
        jr["name"] = r.name;
        jr["addr"] = r.addr ? ordered_json(r.addr->to_string()) : ordered_json(nullptr);
        jr["invite"] = opt_json(r.invite);
        jr["folder_id"] = opt_json(r.folder_id);
        jr["req_time"] = opt_json(r.req_time);
        jr["requested_permissions"] = opt_json(r.requested_permissions);
        jr["granted_permissions"] = opt_json(r.granted_permissions);
        jr["permission_label"] =
            std::string(btsf::metadata::permission_label_name(r.permission_label)) +
            " (hypothesized)";
        reqs.push_back(std::move(jr));
    }
    j["access_requests"] = std::move(reqs);
    ordered_json folders = ordered_json::array();
    for (const auto& f : rec.folders) folders.push_back(folder_json(f));
    j["folders"] = std::move(folders);
    j["warnings"] = rec.warnings;
    return j;
}

ordered_json log_event_json(const btsf::logparse::LogEvent& ev) {
    ordered_json j;
    j["line_no"] = ev.line_no;
    j["kind"] = btsf::logparse::log_event_kind_name(ev.kind);
    if (ev.timestamp) j["timestamp"] = ev.timestamp->text();
    auto put = [&](const char* name, const auto& opt) {
        if (opt) j[name] = *opt;
    };
    put("platform", ev.platform);
    put("version", ev.version);
    put("peer_id_hex", ev.peer_id_hex);
    put("peer_id_b32", ev.peer_id_b32);
    put("device_name", ev.device_name);
    put("ip", ev.ip);
    put("ip_from", ev.ip_from);
    put("ip_to", ev.ip_to);
    put("addr", ev.addr);
    put("share_id_hex", ev.share_id_hex);
    put("path", ev.path);
    put("folder_name", ev.folder_name);
    put("folder_id", ev.folder_id);
    put("file", ev.file);
    put("mtime", ev.mtime);
    put("hash_hex", ev.hash_hex);
    put("time_value", ev.time_value);
    put("broadcast", ev.broadcast);
    put("direct", ev.direct);
    put("transport", ev.transport);
    put("insert_suffix", ev.insert_suffix);
    put("api_name", ev.api_name);
    put("api_params", ev.api_params);
    put("tag", ev.tag);
    if (ev.api_complete) {
        j["api_complete"] = *ev.api_complete;
        if (*ev.api_complete && ev.api_body) {
            auto parsed = nlohmann::json::parse(*ev.api_body, nullptr, false);
            if (!parsed.is_discarded()) j["body_parsed"] = parsed;
        }
        if (ev.api_body) j["body_text"] = *ev.api_body;
    }
    if (!ev.tags.empty()) j["tags"] = ev.tags;
    if (!ev.notes.empty()) j["notes"] = ev.notes;
    return j;
}

btsf::Result<btsf::netdissect::EndpointRegistry> load_registry(const std::string& path) {
    if (path.empty()) return btsf::netdissect::EndpointRegistry::builtin();
    auto raw = read_file(path);
    if (!raw) return btsf::make_error(btsf::Errc::io_failure, "cannot read " + path);
    auto doc = nlohmann::json::parse(std::string_view(reinterpret_cast<const char*>(raw->data()),
                                                      raw->size()),
                                     nullptr, false);
    if (doc.is_discarded())
        return btsf::make_error(btsf::Errc::not_parseable, path + " is not valid JSON");
    return btsf::netdissect::EndpointRegistry::from_json(doc);
}

// ---------------------------------------------------------------------------

int cmd_parse_dat(const std::string& file, std::string kind, bool raw,
                  const std::string& output) {
    auto bytes = read_file(file);
    if (!bytes) return fail("cannot read " + file);

    std::string name = fs::path(file).filename().string();
    bool superseded = false;
    if (name.size() > 4 && name.ends_with(".OLD")) {
        superseded = true;
        name = name.substr(0, name.size() - 4);
    }
    if (kind == "auto") {
        if (name == "settings.dat") kind = "settings";
        else if (name == "sync.dat") kind = "sync";
        else if (name == "history.dat") kind = "history";
        else if (name == "identity.dat") kind = "identity";
        else if (name == "info.dat") kind = "info";
        else if (name == "sync.pid") kind = "pid";
    }

    if (kind == "pid") {
        auto pid = btsf::metadata::parse_pid(ByteView(bytes->data(), bytes->size()));
        if (!pid.ok()) return fail(pid.error());
        ordered_json j;
        j["kind"] = "pid";
        j["pid"] = pid.value();
        return emit_json(j, output);
    }

    auto decoded = btsf::bencode::decode(ByteView(bytes->data(), bytes->size()));
    if (!decoded.ok()) return fail({decoded.error().code, file + ": " + decoded.error().message,
                                    decoded.error().offset});
    const btsf::bencode::BValue& v = decoded.value().value;

    ordered_json j;
    if (superseded) j["superseded"] = true;
    for (const auto& w : decoded.value().warnings)
        j["decode_warnings"].push_back(w.message + " (offset " + std::to_string(w.offset) + ")");

    if (raw || kind == "auto") {
        // auto without a filename match falls back to the raw tree
        j["kind"] = "raw";
        j["consumed"] = decoded.value().consumed;
        j["trailing_bytes"] = bytes->size() - decoded.value().consumed;
        j["value"] = bvalue_json(v);
        return emit_json(j, output);
    }
    if (kind == "settings") {
        auto rec = btsf::metadata::parse_settings(v);
        if (!rec.ok()) return fail(rec.error());
        j["kind"] = "settings";
        j["record"] = settings_json(rec.value());
        return emit_json(j, output);
    }
    if (kind == "sync") {
        auto rec = btsf::metadata::parse_sync_dat(v);
        if (!rec.ok()) return fail(rec.error());
        j["kind"] = "sync";
        j["record"] = sync_dat_json(rec.value());
        return emit_json(j, output);
    }
    if (kind == "history") {
        auto rec = btsf::metadata::parse_history(v);
        if (!rec.ok()) return fail(rec.error());
        j["kind"] = "history";
        ordered_json entries = ordered_json::array();
        for (const auto& e : rec.value()) {
            entries.push_back(ordered_json{{"id", e.id}, {"msg", e.msg}, {"time", e.time}});
        }
        j["entries"] = std::move(entries);
        return emit_json(j, output);
    }
    if (kind == "identity") {
        auto rec = btsf::metadata::parse_identity(
            v, btsf::metadata::IdentitySource::identity_dat_file);
        if (!rec.ok()) return fail(rec.error());
        j["kind"] = "identity";
        j["record"] = identity_json(rec.value());
        return emit_json(j, output);
    }
    if (kind == "info") {
        auto rec = btsf::metadata::parse_info(v);
        if (!rec.ok()) return fail(rec.error());
        j["kind"] = "info";
        j["record"] = folder_json(rec.value());
        return emit_json(j, output);
    }
    return fail("unknown --kind " + kind);
}

int cmd_parse_log(const std::string& file, const std::string& only, const std::string& output) {
    auto bytes = read_file(file);
    if (!bytes) return fail("cannot read " + file);
    std::optional<btsf::logparse::LogEventKind> filter;
    if (!only.empty()) {
        filter = btsf::logparse::log_event_kind_of(only);
        if (!filter) return fail("unknown event kind " + only);
    }
    auto parsed = btsf::logparse::parse_log(
        std::string_view(reinterpret_cast<const char*>(bytes->data()), bytes->size()));
    ordered_json j;
    ordered_json events = ordered_json::array();
    for (const auto& ev : parsed.events) {
        if (filter && ev.kind != *filter) continue;
        events.push_back(log_event_json(ev));
    }
    j["events"] = std::move(events);
    j["stats"] = ordered_json{{"total", parsed.stats.total},
                              {"recognized", parsed.stats.recognized},
                              {"unrecognized", parsed.stats.unrecognized}};
    return emit_json(j, output);
}

int cmd_parse_link(const std::string& url, const std::string& output) {
    auto link = btsf::parse_sync_link(url);
    if (!link.ok()) return fail(link.error());
    const btsf::SyncLink& l = link.value();
    ordered_json j;
    j["folder_name"] = opt_json(l.folder_name);
    j["size_approx"] = opt_json(l.size_approx);
    j["folder_id_hex"] =
        l.folder_id ? ordered_json(btsf::to_hex(ByteView(l.folder_id->data(), l.folder_id->size())))
                    : ordered_json(nullptr);
    j["temp_key"] = opt_json(l.temp_key);
    j["expiry"] = opt_json(l.expiry);
    j["peer_id_hex"] = l.peer_id ? ordered_json(l.peer_id->hex()) : ordered_json(nullptr);
    j["peer_id_b32"] = l.peer_id ? ordered_json(l.peer_id->b32()) : ordered_json(nullptr);
    ordered_json extras = ordered_json::array();
    for (const auto& [k, v] : l.extras) extras.push_back(ordered_json{{"name", k}, {"value", v}});
    j["extras"] = std::move(extras);
    j["warnings"] = l.warnings;
    return emit_json(j, output);
}

int cmd_key_classify(const std::string& key, const std::string& output) {
    auto mk = btsf::classify_key(key);
    if (!mk.ok()) return fail(mk.error());
    auto share = btsf::share_id_of_key(key);
    ordered_json j;
    j["type"] = std::string(1, mk.value().key_type);
    j["permission"] = btsf::permission_name(mk.value().permission);
    j["body"] = mk.value().body;
    if (mk.value().extra) j["extra"] = *mk.value().extra;
    j["share_id_hex"] = share.value().hex();
    return emit_json(j, output);
}

int cmd_scan(const std::string& root, const std::string& output) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) return fail(root + " is not a readable directory");
    auto scan = btsf::metadata::scan_tree(root);
    ordered_json j;
    ordered_json folders = ordered_json::array();
    for (const auto& f : scan.folders) {
        ordered_json jf;
        jf["root_path"] = f.root_path;
        jf["kind"] = btsf::metadata::evidence_kind_name(f.kind);
        jf["share_id_hex"] = f.share_id ? ordered_json(f.share_id->hex()) : ordered_json(nullptr);
        auto files_json = [](const std::vector<btsf::metadata::FileEntry>& files) {
            ordered_json arr = ordered_json::array();
            for (const auto& e : files)
                arr.push_back(
                    ordered_json{{"name", e.name}, {"size", e.size}, {"mtime", e.mtime}});
            return arr;
        };
        jf["live_files"] = files_json(f.live_files);
        jf["archived_files"] = files_json(f.archived_files);
        folders.push_back(std::move(jf));
    }
    j["folders"] = std::move(folders);
    ordered_json mappings = ordered_json::array();
    for (const auto& m : scan.device_folders)
        mappings.push_back(
            ordered_json{{"peer_id_b32", m.peer_id_b32}, {"folder_ids", m.folder_ids}});
    j["device_folders"] = std::move(mappings);
    j["warnings"] = scan.warnings;
    return emit_json(j, output);
}

int cmd_dissect(const std::string& file, const std::string& registry_path,
                const std::string& output) {
    auto registry = load_registry(registry_path);
    if (!registry.ok()) return fail(registry.error());
    auto extraction = btsf::netdissect::extract_discovery(file, registry.value());
    if (!extraction.ok()) return fail(extraction.error());
    const auto& ex = extraction.value();

    ordered_json j;
    ordered_json messages = ordered_json::array();
    for (const auto& msg : ex.messages) {
        ordered_json jm;
        jm["record_index"] = msg.record_index;
        jm["ts_sec"] = msg.ts_sec;
        jm["ts_usec"] = msg.ts_usec;
        jm["src"] = msg.src.to_string();
        jm["dst"] = msg.dst.to_string();
        if (const auto* gp = std::get_if<btsf::netdissect::TrackerGetPeers>(&msg.payload)) {
            jm["type"] = "get_peers";
            jm["la"] = gp->la.to_string();
            jm["lp"] = gp->lp;
            jm["peer_id_hex"] = gp->peer.hex();
            jm["share_id_hex"] = gp->share.hex();
        } else if (const auto* resp =
                       std::get_if<btsf::netdissect::TrackerPeersResponse>(&msg.payload)) {
            jm["type"] = "peers";
            jm["ea"] = resp->ea.to_string();
            jm["share_id_hex"] = resp->share.hex();
            jm["time"] = resp->time;
            ordered_json peers = ordered_json::array();
            for (const auto& p : resp->peers)
                peers.push_back(ordered_json{{"a", p.a.to_string()},
                                             {"la", p.la.to_string()},
                                             {"peer_id_hex", p.p.hex()}});
            jm["peers"] = std::move(peers);
        } else if (const auto* ping = std::get_if<btsf::netdissect::LanPing>(&msg.payload)) {
            jm["type"] = "ping";
            jm["port"] = ping->port;
            jm["peer_id_hex"] = ping->peer.hex();
            ordered_json shares = ordered_json::array();
            for (const auto& s : ping->shares) shares.push_back(s.hex());
            jm["shares"] = std::move(shares);
        }
        messages.push_back(std::move(jm));
    }
    j["messages"] = std::move(messages);
    ordered_json stats;
    stats["total"] = ex.stats.total;
    stats["udp"] = ex.stats.udp;
    stats["tcp"] = ex.stats.tcp;
    stats["other"] = ex.stats.other;
    stats["dissected"] = ex.stats.dissected;
    stats["undissected_udp"] = ex.stats.undissected_udp;
    stats["by_class"] = ex.stats.by_class;
    j["stats"] = std::move(stats);
    ordered_json skipped = ordered_json::array();
    for (const auto& s : ex.skipped)
        skipped.push_back(ordered_json{{"index", s.index}, {"reason", s.reason}});
    j["skipped"] = std::move(skipped);
    j["truncated_tail"] = ex.truncated_tail;
    return emit_json(j, output);
}

int cmd_correlate(const std::string& case_dir, const std::string& registry_path,
                  const std::string& output) {
    auto registry = load_registry(registry_path);
    if (!registry.ok()) return fail(registry.error());
    auto graph = btsf::correlate::correlate_case(case_dir, registry.value());
    if (!graph.ok()) return fail(graph.error());
    return emit_json(graph.value().to_json(), output);
}

int cmd_report(const std::string& graph_file, const std::string& format,
               const std::string& tz_offset, const std::string& output) {
    auto raw = read_file(graph_file);
    if (!raw) return fail("cannot read " + graph_file);
    auto doc = nlohmann::json::parse(
        std::string_view(reinterpret_cast<const char*>(raw->data()), raw->size()), nullptr,
        false);
    if (doc.is_discarded()) return fail(graph_file + " is not valid JSON");
    auto graph = btsf::correlate::EvidenceGraph::from_json(doc);
    if (!graph.ok()) return fail(graph.error());

    btsf::report::RenderOptions options;
    if (!tz_offset.empty()) {
        auto minutes = btsf::report::parse_tz_offset(tz_offset);
        if (!minutes) return fail("--tz-offset must look like +08:00 or -05:30");
        options.tz_offset_minutes = *minutes;
    }
    if (format == "json")
        return emit_json(btsf::report::render_json(graph.value(), options), output);
    if (format == "text")
        return emit(btsf::report::render_text(graph.value(), options), output);
    return fail("unknown --format " + format);
}

int cmd_gen_fixtures(std::uint64_t seed, const std::string& profile_name, const std::string& out,
                     const std::string& output) {
    auto profile = btsf::fixtures::profile_of(profile_name);
    if (!profile) return fail("unknown profile " + profile_name +
                              " (Minimal|TwoPeerSync|DeletionCase|MultiShareLan)");
    auto manifest = btsf::fixtures::gen_case(seed, *profile, out);
    if (!manifest.ok()) return fail(manifest.error());
    return emit_json(manifest.value().to_json(), output);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"BitTorrent Sync 2.x evidence parsing and correlation toolkit"};
    app.require_subcommand(1);
    std::string output;
    app.add_option("--output", output, "write results to a file instead of stdout");

    // parse-dat
    auto* parse_dat = app.add_subcommand(
        "parse-dat", "decode a bencoded metadata file (analysis steps 1-4, 10)");
    std::string dat_file, dat_kind = "auto";
    bool dat_raw = false;
    parse_dat->add_option("file", dat_file, "settings.dat / sync.dat / history.dat / "
                                            "identity.dat / info.dat / sync.pid")
        ->required();
    parse_dat->add_option("--kind", dat_kind, "settings|sync|history|identity|info|pid|auto")
        ->check(CLI::IsMember({"settings", "sync", "history", "identity", "info", "pid", "auto"}));
    parse_dat->add_flag("--raw", dat_raw, "dump the decoded tree without interpretation");

    // parse-log
    auto* parse_log = app.add_subcommand(
        "parse-log", "parse sync.log into typed events (analysis steps 7, 9, 11)");
    std::string log_file, log_only;
    parse_log->add_option("file", log_file, "sync.log or sync.log.old")->required();
    parse_log->add_option("--only", log_only, "emit only events of this kind");

    // parse-link
    auto* parse_link = app.add_subcommand("parse-link", "decode a folder sharing link");
    std::string link_url;
    parse_link->add_option("url", link_url, "https link or its parameter section")->required();

    // key
    auto* key = app.add_subcommand("key", "master key utilities");
    auto* key_classify = key->add_subcommand("classify", "classify a key and derive its share ID");
    std::string key_text;
    key_classify->add_option("key", key_text, "33- or 65-symbol key")->required();

    // scan
    auto* scan = app.add_subcommand(
        "scan", "walk an exported directory tree for sync folders (analysis steps 5, 8)");
    std::string scan_root;
    scan->add_option("root", scan_root, "exported/mounted image subtree")->required();

    // dissect
    auto* dissect = app.add_subcommand(
        "dissect", "extract peer-discovery messages from a capture (analysis step 13)");
    std::string cap_file, registry_path;
    dissect->add_option("capture", cap_file, "classic .pcap file")->required();
    dissect->add_option("--registry", registry_path,
                        "endpoint registry JSON overriding the built-in table");

    // correlate
    auto* correlate = app.add_subcommand(
        "correlate", "run analysis steps 1-13 over a case directory into an evidence graph");
    std::string case_dir, correlate_registry;
    correlate->add_option("--case", case_dir,
                          "directory holding dats/, logs/, tree/, captures/, hints.json")
        ->required();
    correlate->add_option("--registry", correlate_registry, "endpoint registry JSON");

    // report
    auto* report = app.add_subcommand("report",
                                      "render presentation items 1-6 from an evidence graph");
    std::string graph_file, format = "json", tz_offset;
    report->add_option("graph", graph_file, "graph JSON produced by correlate")->required();
    report->add_option("--format", format, "json|text")
        ->check(CLI::IsMember({"json", "text"}));
    report->add_option("--tz-offset", tz_offset,
                       "anchor naive log times, e.g. +08:00 or -05:30");

    // gen-fixtures
    auto* gen = app.add_subcommand("gen-fixtures",
                                   "synthesize a self-consistent test case with ground truth");
    std::uint64_t seed = 1;
    std::string profile = "Minimal", out_dir;
    gen->add_option("--seed", seed, "generator seed")->required();
    gen->add_option("--profile", profile, "Minimal|TwoPeerSync|DeletionCase|MultiShareLan")
        ->required();
    gen->add_option("--out", out_dir, "output case directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    if (parse_dat->parsed()) return cmd_parse_dat(dat_file, dat_kind, dat_raw, output);
    if (parse_log->parsed()) return cmd_parse_log(log_file, log_only, output);
    if (parse_link->parsed()) return cmd_parse_link(link_url, output);
    if (key->parsed() && key_classify->parsed()) return cmd_key_classify(key_text, output);
    if (scan->parsed()) return cmd_scan(scan_root, output);
    if (dissect->parsed()) return cmd_dissect(cap_file, registry_path, output);
    if (correlate->parsed()) return cmd_correlate(case_dir, correlate_registry, output);
    if (report->parsed()) return cmd_report(graph_file, format, tz_offset, output);
    if (gen->parsed()) return cmd_gen_fixtures(seed, profile, out_dir, output);
    std::cerr << app.help();
    return 2;
}
