#include <charconv>
#include <fstream>

#include "btsf/bencode.hpp"
#include "btsf/correlate.hpp"

namespace btsf::correlate {

using logparse::LogEvent;
using logparse::LogEventKind;
using metadata::HistoryEntry;

namespace {

std::optional<std::int64_t> to_int(std::string_view s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

void folder_paths(EvidenceGraph& g, std::size_t folder, const std::string& raw, std::size_t prov) {
    std::string norm = normalize_path(raw);
    g.set_attr(folder, "path", raw, prov);
    g.set_attr(folder, "basename", path_basename(norm), prov);
    g.set_attr(folder, "path_norm", std::move(norm), prov);
}

struct HistoryMsg {
    std::string device; // empty when the actor is unnamed or "Remote peer"
    std::string action;
    std::string file;
};

std::optional<HistoryMsg> parse_history_msg(const std::string& msg) {
    static const std::pair<const char*, const char*> verbs[] = {
        {" added file ", "added"},
        {" updated file ", "updated"},
        {" removed file ", "removed"},
    };
    for (const auto& [needle, action] : verbs) {
        std::size_t at = msg.find(needle);
        if (at == std::string::npos) continue;
        HistoryMsg out;
        out.device = msg.substr(0, at);
        out.action = action;
        out.file = msg.substr(at + std::string(needle).size());
        if (out.device == "Remote peer" || out.device == "Added") out.device.clear();
        return out;
    }
    if (msg.rfind("Added file ", 0) == 0) return HistoryMsg{"", "added", msg.substr(11)};
    if (msg.rfind("Removed file ", 0) == 0) return HistoryMsg{"", "removed", msg.substr(13)};
    return std::nullopt;
}

void ingest_history_entries(EvidenceGraph& g, const std::vector<HistoryEntry>& entries,
                            SourceKind source, const std::string& path,
                            std::int64_t line_locator) {
    for (const HistoryEntry& e : entries) {
        std::int64_t locator = line_locator >= 0 ? line_locator : e.id;
        std::size_t prov = g.provenance(source, path, locator);
        if (auto msg = parse_history_msg(e.msg); msg && !msg->device.empty())
            g.upsert_device_by_name(msg->device, prov);
        TimelineEntry t;
        t.ts = e.time;
        t.naive = false;
        t.source = source;
        t.path = path;
        t.locator = locator;
        t.description = "history #" + std::to_string(e.id) + ": " + e.msg;
        t.prov = {prov};
        g.add_timeline(std::move(t));
    }
}

void timeline_fact(EvidenceGraph& g, std::int64_t ts, bool naive, SourceKind source,
                   const std::string& path, std::int64_t locator, std::string description,
                   std::size_t prov) {
    TimelineEntry t;
    t.ts = ts;
    t.naive = naive;
    t.source = source;
    t.path = path;
    t.locator = locator;
    t.description = std::move(description);
    t.prov = {prov};
    g.add_timeline(std::move(t));
}

} // namespace

void ingest_metadata(EvidenceGraph& g, const MetadataBundle& bundle) {
    if (bundle.settings) {
        const metadata::SettingsRecord& s = *bundle.settings;
        std::size_t prov = g.provenance(SourceKind::settings_dat, bundle.settings_path);
        std::size_t local = s.peer_id ? g.upsert_device_by_hex(to_hex(ByteView(s.peer_id->bytes.data(), 20), false), prov)
                                      : g.upsert_local_device(prov);
        g.set_attr(local, "local", "true", prov);
        if (s.install_time) {
            g.set_attr(local, "install_time", std::to_string(*s.install_time), prov);
            timeline_fact(g, *s.install_time, false, SourceKind::settings_dat,
                          bundle.settings_path, -1, "installation", prov);
        }
        if (s.exe_path) g.set_attr(local, "exe_path", *s.exe_path, prov);
        for (const std::string& w : s.warnings) g.add_warning(bundle.settings_path + ": " + w);
        if (bundle.superseded) g.add_warning(bundle.settings_path + ": superseded (.OLD) source");
    }

    if (bundle.sync) {
        const metadata::SyncDatRecord& s = *bundle.sync;
        std::size_t prov = g.provenance(SourceKind::sync_dat, bundle.sync_path);
        std::size_t local = g.upsert_local_device(prov);
        if (s.device) g.set_attr(local, "name", *s.device, prov);

        if (s.identity) {
            std::size_t ident =
                g.upsert_identity(s.identity->name, s.identity->fingerprint, prov);
            if (s.identity->private_keys)
                g.set_attr(ident, "has_private_keys", "true", prov);
            g.add_edge(EdgeType::identity_owns_device, ident, local, prov);
        }
        for (const metadata::IdentityRecord& rec : s.identities)
            g.upsert_identity(rec.name, rec.fingerprint, prov);

        for (const metadata::AccessRequest& req : s.access_requests) {
            std::size_t ident = g.upsert_identity(req.name, std::nullopt, prov);
            if (req.folder_id) {
                std::size_t folder = g.upsert_folder_by_id(*req.folder_id, prov);
                std::size_t edge = g.add_edge(EdgeType::request_for_folder, ident, folder, prov,
                                              req.req_time, false);
                if (req.requested_permissions) {
                    g.set_edge_attr(edge, "requested_permissions",
                                    std::to_string(*req.requested_permissions));
                    g.set_edge_attr(
                        edge, "permission_label",
                        metadata::permission_label_name(req.permission_label));
                    // the 2/3/4 reading is a working hypothesis
                    g.set_edge_attr(edge, "permission_label_basis", "hypothesized");
                }
                if (req.granted_permissions)
                    g.set_edge_attr(edge, "granted_permissions",
                                    std::to_string(*req.granted_permissions));
                if (req.addr) g.set_edge_attr(edge, "addr", req.addr->to_string());
                if (req.invite) g.set_edge_attr(edge, "invite", *req.invite);
            } else {
                g.add_warning(bundle.sync_path + ": access request from '" + req.name +
                              "' carries no folder id; no edge");
            }
            if (req.req_time)
                timeline_fact(g, *req.req_time, false, SourceKind::sync_dat, bundle.sync_path, -1,
                              "access request from '" + req.name + "'", prov);
        }

        for (const metadata::FolderRecord& rec : s.folders) {
            std::size_t folder;
            if (rec.folder_id)
                folder = g.upsert_folder_by_id(*rec.folder_id, prov);
            else if (rec.path)
                folder = g.upsert_folder_by_path(*rec.path, prov);
            else {
                g.add_warning(bundle.sync_path + ": folder record with neither id nor path");
                continue;
            }
            if (rec.path) {
                folder_paths(g, folder, *rec.path, prov);
                g.set_attr(folder, "name", raw_basename(*rec.path), prov);
            }
            if (rec.date_added) {
                g.set_attr(folder, "date_added", std::to_string(*rec.date_added), prov);
                timeline_fact(g, *rec.date_added, false, SourceKind::sync_dat, bundle.sync_path,
                              -1, "folder added: " + g.node_key(folder), prov);
            }
            if (rec.last_modified) {
                g.set_attr(folder, "last_modified", std::to_string(*rec.last_modified), prov);
                timeline_fact(g, *rec.last_modified, false, SourceKind::sync_dat,
                              bundle.sync_path, -1, "folder modified: " + g.node_key(folder),
                              prov);
            }
            if (rec.in_trash) g.set_attr(folder, "in_trash", "true", prov);
            for (metadata::DiscoveryMethod m : rec.discovery_flags)
                g.set_attr(folder, "discovery", metadata::discovery_method_name(m), prov);

            for (const metadata::AclEntry& acl : rec.acl) {
                if (acl.name.empty()) continue;
                std::size_t ident = g.upsert_identity(acl.name, std::nullopt, prov);
                std::size_t edge = g.add_edge(EdgeType::identity_linked_folder, ident, folder,
                                              prov, acl.linked_time, false);
                if (acl.issuer) g.set_edge_attr(edge, "issuer", *acl.issuer);
            }
            for (const metadata::PeerStatus& peer : rec.peers) {
                if (peer.name.empty()) continue;
                std::size_t dev = g.upsert_device_by_name(peer.name, prov);
                std::size_t edge = g.add_edge(EdgeType::device_has_folder, dev, folder, prov);
                if (peer.last_sync_completed)
                    g.set_edge_attr(edge, "last_sync_completed",
                                    std::to_string(*peer.last_sync_completed));
                if (peer.last_seen)
                    g.set_edge_attr(edge, "last_seen", std::to_string(*peer.last_seen));
                if (peer.last_data_sent)
                    g.set_edge_attr(edge, "last_data_sent", std::to_string(*peer.last_data_sent));
                if (peer.last_addr) {
                    std::size_t ep = g.upsert_endpoint(*peer.last_addr, prov);
                    g.add_edge(EdgeType::device_seen_at_endpoint, dev, ep, prov, peer.last_seen,
                               false);
                }
            }
        }
        for (const std::string& w : s.warnings) g.add_warning(bundle.sync_path + ": " + w);
        if (bundle.superseded) g.add_warning(bundle.sync_path + ": superseded (.OLD) source");
    }

    if (!bundle.history.empty())
        ingest_history_entries(g, bundle.history, SourceKind::history_dat, bundle.history_path,
                               -1);

    for (std::size_t i = 0; i < bundle.identities.size(); ++i) {
        const metadata::IdentityRecord& rec = bundle.identities[i];
        std::string path = i < bundle.identity_paths.size() ? bundle.identity_paths[i] : "";
        std::size_t prov = g.provenance(SourceKind::identity_dat, path);
        std::size_t ident = g.upsert_identity(rec.name, rec.fingerprint, prov);
        if (rec.private_keys) g.set_attr(ident, "has_private_keys", "true", prov);
        if (rec.source == metadata::IdentitySource::identity_dat_file) {
            std::size_t local = g.upsert_local_device(prov);
            g.add_edge(EdgeType::identity_owns_device, ident, local, prov);
        }
    }

    if (bundle.info) {
        std::size_t prov = g.provenance(SourceKind::info_dat, bundle.info_path);
        const metadata::FolderRecord& rec = *bundle.info;
        if (rec.folder_id) {
            std::size_t folder = g.upsert_folder_by_id(*rec.folder_id, prov);
            if (rec.path) folder_paths(g, folder, *rec.path, prov);
            for (const metadata::AclEntry& acl : rec.acl) {
                if (acl.name.empty()) continue;
                std::size_t ident = g.upsert_identity(acl.name, std::nullopt, prov);
                g.add_edge(EdgeType::identity_linked_folder, ident, folder, prov, acl.linked_time,
                           false);
            }
        }
    }
}

void ingest_tree(EvidenceGraph& g, const metadata::TreeScan& scan, const std::string& tree_path) {
    for (const metadata::FolderEvidence& ev : scan.folders) {
        std::string ev_path = tree_path + "/" + ev.root_path;
        std::size_t prov = g.provenance(SourceKind::tree_scan, ev_path);
        if (ev.kind == metadata::EvidenceKind::device_folders_dir) continue;
        std::size_t folder = g.upsert_folder_by_tree_path(ev.root_path, prov);
        if (ev.kind == metadata::EvidenceKind::identity_app_folder)
            g.set_attr(folder, "identity_app_folder", "true", prov);

        if (ev.share_id) {
            std::size_t id_prov =
                g.provenance(SourceKind::id_file, ev_path + "/.sync/ID");
            std::size_t share = g.upsert_share(ev.share_id->hex(), id_prov);
            g.add_edge(EdgeType::folder_has_share, folder, share, id_prov);
        }
        for (const metadata::FileEntry& f : ev.live_files) {
            std::size_t fprov = g.provenance(SourceKind::tree_scan, ev_path + "/" + f.name);
            std::size_t file = g.add_file(folder, f.name, false, fprov);
            g.set_attr(file, "size", std::to_string(f.size), fprov);
            g.set_attr(file, "mtime", std::to_string(f.mtime), fprov);
            g.add_edge(EdgeType::file_in_folder, file, folder, fprov, f.mtime, false);
            timeline_fact(g, f.mtime, false, SourceKind::tree_scan, ev_path + "/" + f.name, -1,
                          "file modified: " + f.name, fprov);
        }
        for (const metadata::FileEntry& f : ev.archived_files) {
            std::size_t fprov = g.provenance(SourceKind::tree_scan,
                                             ev_path + "/.sync/Archive/" + f.name);
            std::size_t file = g.add_file(folder, f.name, true, fprov);
            g.set_attr(file, "size", std::to_string(f.size), fprov);
            g.set_attr(file, "mtime", std::to_string(f.mtime), fprov);
            g.add_edge(EdgeType::file_in_folder, file, folder, fprov, f.mtime, false);
            timeline_fact(g, f.mtime, false, SourceKind::tree_scan,
                          ev_path + "/.sync/Archive/" + f.name, -1,
                          "archived (deleted) file: " + f.name, fprov);
        }
    }
    for (const metadata::DeviceFolderMapping& m : scan.device_folders) {
        std::size_t prov = g.provenance(SourceKind::tree_scan, tree_path);
        std::size_t dev = g.upsert_device_by_b32(m.peer_id_b32, prov);
        for (std::int64_t fid : m.folder_ids) {
            std::size_t folder = g.upsert_folder_by_id(fid, prov);
            g.add_edge(EdgeType::device_has_folder, dev, folder, prov);
        }
    }
    for (const std::string& w : scan.warnings) g.add_warning(tree_path + ": " + w);
}

namespace {

void ingest_api_body(EvidenceGraph& g, const LogEvent& ev, const std::string& path,
                     std::size_t prov) {
    if (!ev.api_complete.value_or(false) || !ev.api_body) return;
    nlohmann::json body = nlohmann::json::parse(*ev.api_body, nullptr, false);
    if (body.is_discarded()) return;
    const std::string& api = *ev.api_name;

    if (api == "getmfdevices" && body.contains("value") && body["value"].is_array()) {
        for (const auto& jdev : body["value"]) {
            if (!jdev.is_object()) continue;
            std::size_t dev;
            if (jdev.contains("id") && jdev["id"].is_string())
                dev = g.upsert_device_by_b32(jdev["id"].get<std::string>(), prov);
            else if (jdev.contains("devicename"))
                dev = g.upsert_device_by_name(jdev["devicename"].get<std::string>(), prov);
            else
                continue;
            if (jdev.contains("devicename") && jdev["devicename"].is_string())
                g.set_attr(dev, "name", jdev["devicename"].get<std::string>(), prov);
            if (jdev.value("self", false)) g.set_attr(dev, "local", "true", prov);
            if (jdev.contains("lastseen") && jdev["lastseen"].is_number_integer())
                g.set_attr(dev, "last_seen", std::to_string(jdev["lastseen"].get<std::int64_t>()),
                           prov);
            if (jdev.contains("folders") && jdev["folders"].is_array()) {
                for (const auto& jf : jdev["folders"]) {
                    if (!jf.is_object() || !jf.contains("id") || !jf["id"].is_number_integer())
                        continue;
                    std::size_t folder = g.upsert_folder_by_id(jf["id"].get<std::int64_t>(), prov);
                    g.add_edge(EdgeType::device_has_folder, dev, folder, prov);
                }
            }
        }
        return;
    }

    if (api == "getpendingrequests" && body.contains("value") && body["value"].is_array()) {
        for (const auto& jreq : body["value"]) {
            if (!jreq.is_object() || !jreq.contains("user_identity")) continue;
            const auto& ju = jreq["user_identity"];
            std::string username = ju.value("username", "");
            if (username.empty()) continue;
            std::optional<std::string> fp;
            if (ju.contains("fingerprint") && ju["fingerprint"].is_string())
                fp = ju["fingerprint"].get<std::string>();
            std::size_t ident = g.upsert_identity(username, fp, prov);
            std::optional<std::int64_t> folder_id;
            if (jreq.contains("id") && jreq["id"].is_string())
                folder_id = to_int(jreq["id"].get<std::string>());
            else if (jreq.contains("id") && jreq["id"].is_number_integer())
                folder_id = jreq["id"].get<std::int64_t>();
            if (!folder_id) continue;
            std::size_t folder = g.upsert_folder_by_id(*folder_id, prov);
            std::optional<std::int64_t> when;
            if (jreq.contains("time") && jreq["time"].is_number_integer())
                when = jreq["time"].get<std::int64_t>();
            std::size_t edge =
                g.add_edge(EdgeType::request_for_folder, ident, folder, prov, when, false);
            if (jreq.contains("access_level") && jreq["access_level"].is_number_integer()) {
                std::int64_t level = jreq["access_level"].get<std::int64_t>();
                g.set_edge_attr(edge, "requested_permissions", std::to_string(level));
                g.set_edge_attr(edge, "permission_label",
                                metadata::permission_label_name(
                                    metadata::permission_label_of(level)));
                g.set_edge_attr(edge, "permission_label_basis", "hypothesized");
            }
            if (jreq.contains("ip") && jreq["ip"].is_string())
                g.set_edge_attr(edge, "ip", jreq["ip"].get<std::string>());
            if (when)
                timeline_fact(g, *when, false, SourceKind::sync_log, path, ev.line_no,
                              "pending access request from '" + username + "'", prov);
        }
        return;
    }

    if (api == "getsyncfolders" && body.contains("folders") && body["folders"].is_array()) {
        for (const auto& jf : body["folders"]) {
            if (!jf.is_object()) continue;
            std::optional<std::int64_t> folder_id;
            if (jf.contains("folderid") && jf["folderid"].is_string())
                folder_id = to_int(jf["folderid"].get<std::string>());
            if (!folder_id) continue;
            std::size_t folder = g.upsert_folder_by_id(*folder_id, prov);
            if (jf.contains("name") && jf["name"].is_string())
                g.set_attr(folder, "name", jf["name"].get<std::string>(), prov);
            if (jf.contains("path") && jf["path"].is_string())
                folder_paths(g, folder, jf["path"].get<std::string>(), prov);
            if (jf.contains("date_added") && jf["date_added"].is_number_integer())
                g.set_attr(folder, "date_added",
                           std::to_string(jf["date_added"].get<std::int64_t>()), prov);
            if (jf.contains("last_modified") && jf["last_modified"].is_number_integer())
                g.set_attr(folder, "last_modified",
                           std::to_string(jf["last_modified"].get<std::int64_t>()), prov);
            if (jf.contains("peers") && jf["peers"].is_array()) {
                for (const auto& jp : jf["peers"]) {
                    if (!jp.is_object() || !jp.contains("id") || !jp["id"].is_string()) continue;
                    std::size_t dev = g.upsert_device_by_hex(jp["id"].get<std::string>(), prov);
                    if (jp.contains("name") && jp["name"].is_string())
                        g.set_attr(dev, "name", jp["name"].get<std::string>(), prov);
                    g.add_edge(EdgeType::device_has_folder, dev, folder, prov);
                    if (jp.contains("userid") && jp["userid"].is_string()) {
                        std::size_t ident =
                            g.upsert_identity("", jp["userid"].get<std::string>(), prov);
                        g.add_edge(EdgeType::identity_owns_device, ident, dev, prov);
                    }
                }
            }
            if (jf.contains("users") && jf["users"].is_array()) {
                for (const auto& ju : jf["users"]) {
                    if (!ju.is_object()) continue;
                    std::string name = ju.value("name", "");
                    std::optional<std::string> fp;
                    if (ju.contains("id") && ju["id"].is_string())
                        fp = ju["id"].get<std::string>();
                    if (name.empty() && !fp) continue;
                    std::size_t ident = g.upsert_identity(name, fp, prov);
                    std::size_t edge =
                        g.add_edge(EdgeType::identity_linked_folder, ident, folder, prov);
                    if (ju.contains("access") && ju["access"].is_number_integer())
                        g.set_edge_attr(edge, "access",
                                        std::to_string(ju["access"].get<std::int64_t>()));
                }
            }
        }
        return;
    }

    if (api == "history" && body.contains("value") && body["value"].is_array()) {
        std::vector<HistoryEntry> entries;
        for (const auto& je : body["value"]) {
            if (!je.is_object()) continue;
            HistoryEntry e;
            e.id = je.value("id", 0);
            e.msg = je.value("msg", "");
            e.time = je.value("time", 0);
            entries.push_back(std::move(e));
        }
        ingest_history_entries(g, entries, SourceKind::sync_log, path, ev.line_no);
        return;
    }
}

} // namespace

void ingest_log(EvidenceGraph& g, const std::vector<LogEvent>& events, const std::string& path) {
    for (const LogEvent& ev : events) {
        if (ev.kind == LogEventKind::unrecognized) continue;
        std::size_t prov = g.provenance(SourceKind::sync_log, path, ev.line_no);
        std::optional<std::int64_t> ts;
        if (ev.timestamp) ts = ev.timestamp->as_utc_epoch();

        std::string summary = logparse::log_event_kind_name(ev.kind);
        switch (ev.kind) {
            case LogEventKind::platform_version: {
                std::size_t local = g.upsert_local_device(prov);
                if (ev.platform) g.set_attr(local, "platform", *ev.platform, prov);
                if (ev.version) g.set_attr(local, "version", *ev.version, prov);
                break;
            }
            case LogEventKind::local_peer_id: {
                std::size_t local = g.upsert_device_by_hex(*ev.peer_id_hex, prov);
                g.set_attr(local, "local", "true", prov);
                summary += ": " + *ev.peer_id_hex;
                break;
            }
            case LogEventKind::master_folder_create: {
                std::size_t local = g.upsert_local_device(prov);
                if (ts) g.set_attr(local, "first_use", std::to_string(*ts), prov);
                break;
            }
            case LogEventKind::master_folder_disconnect:
                break;
            case LogEventKind::ip_assigned: {
                std::size_t local = g.upsert_local_device(prov);
                if (ev.ip) {
                    g.set_attr(local, "ip", *ev.ip, prov);
                    summary += ": " + *ev.ip;
                }
                break;
            }
            case LogEventKind::ip_changed: {
                std::size_t local = g.upsert_local_device(prov);
                if (ev.ip_from) g.set_attr(local, "ip", *ev.ip_from, prov);
                if (ev.ip_to) {
                    g.set_attr(local, "ip", *ev.ip_to, prov);
                    summary += ": to " + *ev.ip_to;
                }
                break;
            }
            case LogEventKind::incoming_connection: {
                if (auto addr = parse_ip_port(*ev.addr)) {
                    g.upsert_endpoint(*addr, prov);
                    summary += ": " + *ev.addr;
                }
                break;
            }
            case LogEventKind::ping_received:
            case LogEventKind::peer_found: {
                if (!ev.peer_id_hex) break;
                std::size_t dev = g.upsert_device_by_hex(*ev.peer_id_hex, prov);
                if (ev.version) g.set_attr(dev, "version", *ev.version, prov);
                if (ev.addr) {
                    if (auto addr = parse_ip_port(*ev.addr)) {
                        std::size_t ep = g.upsert_endpoint(*addr, prov);
                        g.add_edge(EdgeType::device_seen_at_endpoint, dev, ep, prov, ts, true);
                    }
                }
                for (const std::string& note : ev.notes) g.set_attr(dev, "note", note, prov);
                summary += ": " + *ev.peer_id_hex;
                break;
            }
            case LogEventKind::id_message: {
                if (!ev.peer_id_hex) break;
                std::size_t dev = g.upsert_device_by_hex(*ev.peer_id_hex, prov);
                if (ev.device_name) {
                    g.set_attr(dev, "name", *ev.device_name, prov);
                    summary += ": " + *ev.device_name;
                }
                if (ev.version) g.set_attr(dev, "version", *ev.version, prov);
                break;
            }
            case LogEventKind::new_device_found: {
                if (!ev.peer_id_b32) break;
                std::size_t dev = g.upsert_device_by_b32(*ev.peer_id_b32, prov);
                if (ev.device_name) {
                    g.set_attr(dev, "name", *ev.device_name, prov);
                    summary += ": " + *ev.device_name;
                }
                for (const std::string& note : ev.notes) g.set_attr(dev, "note", note, prov);
                break;
            }
            case LogEventKind::hello_sent:
            case LogEventKind::hello_received: {
                if (!ev.share_id_hex) break;
                g.upsert_share(*ev.share_id_hex, prov);
                summary += ": " + *ev.share_id_hex;
                break;
            }
            case LogEventKind::tracker_request: {
                if (!ev.share_id_hex) break;
                std::size_t share = g.upsert_share(*ev.share_id_hex, prov);
                if (ev.addr) {
                    if (auto addr = parse_ip_port(*ev.addr)) {
                        std::size_t ep = g.upsert_endpoint(*addr, prov);
                        g.add_edge(EdgeType::share_at_endpoint, share, ep, prov, ts, true);
                        summary += ": " + *ev.addr;
                    }
                }
                break;
            }
            case LogEventKind::periodic_scan: {
                if (ev.path) {
                    g.upsert_folder_by_path(*ev.path, prov);
                    summary += ": " + *ev.path;
                }
                break;
            }
            case LogEventKind::folder_processing: {
                if (!ev.folder_id) break;
                std::size_t folder = g.upsert_folder_by_id(*ev.folder_id, prov);
                if (ev.folder_name) g.set_attr(folder, "name", *ev.folder_name, prov);
                summary += ": " + (ev.folder_name ? *ev.folder_name : "") + " (" +
                           std::to_string(*ev.folder_id) + ")";
                break;
            }
            case LogEventKind::torrent_created:
                if (ev.file) summary += ": " + *ev.file;
                break;
            case LogEventKind::file_time_set:
            case LogEventKind::file_inserted:
            case LogEventKind::folder_removed:
                if (ev.path) summary += ": " + *ev.path;
                break;
            case LogEventKind::api_response: {
                summary += ": " + *ev.api_name;
                ingest_api_body(g, ev, path, prov);
                break;
            }
            case LogEventKind::api_request:
                summary += ": " + *ev.api_name;
                break;
            case LogEventKind::unrecognized:
                break;
        }
        if (ts)
            timeline_fact(g, *ts, true, SourceKind::sync_log, path, ev.line_no, summary, prov);
    }
}

void ingest_capture(EvidenceGraph& g, const netdissect::Extraction& extraction,
                    const std::string& path) {
    using netdissect::LanPing;
    using netdissect::TrackerGetPeers;
    using netdissect::TrackerPeersResponse;

    for (const netdissect::DiscoveryMessage& msg : extraction.messages) {
        std::size_t prov =
            g.provenance(SourceKind::capture, path, static_cast<std::int64_t>(msg.record_index));
        std::int64_t ts = msg.ts_sec;
        std::string summary;

        if (const auto* gp = std::get_if<TrackerGetPeers>(&msg.payload)) {
            std::size_t dev = g.upsert_device_by_hex(gp->peer.hex(), prov);
            std::size_t share = g.upsert_share(gp->share.hex(), prov);
            g.add_edge(EdgeType::device_announces_share, dev, share, prov, ts);
            std::size_t src_ep = g.upsert_endpoint(msg.src, prov);
            g.add_edge(EdgeType::device_seen_at_endpoint, dev, src_ep, prov, ts);
            std::size_t la_ep = g.upsert_endpoint(gp->la, prov);
            g.add_edge(EdgeType::device_seen_at_endpoint, dev, la_ep, prov, ts);
            std::size_t tracker_ep = g.upsert_endpoint(msg.dst, prov);
            g.add_edge(EdgeType::share_at_endpoint, share, tracker_ep, prov, ts);
            summary = "tracker get_peers from " + msg.src.to_string() + " for share " +
                      gp->share.hex();
        } else if (const auto* resp = std::get_if<TrackerPeersResponse>(&msg.payload)) {
            g.upsert_endpoint(resp->ea, prov);
            std::size_t share = g.upsert_share(resp->share.hex(), prov);
            std::size_t tracker_ep = g.upsert_endpoint(msg.src, prov);
            g.add_edge(EdgeType::share_at_endpoint, share, tracker_ep, prov, ts);
            for (const netdissect::ResponsePeer& peer : resp->peers) {
                std::size_t dev = g.upsert_device_by_hex(peer.p.hex(), prov);
                g.add_edge(EdgeType::device_announces_share, dev, share, prov, ts);
                std::size_t a_ep = g.upsert_endpoint(peer.a, prov);
                g.add_edge(EdgeType::device_seen_at_endpoint, dev, a_ep, prov, ts);
                std::size_t la_ep = g.upsert_endpoint(peer.la, prov);
                g.add_edge(EdgeType::device_seen_at_endpoint, dev, la_ep, prov, ts);
            }
            summary = "tracker peers response for share " + resp->share.hex() + " (" +
                      std::to_string(resp->peers.size()) + " peers)";
        } else if (const auto* ping = std::get_if<LanPing>(&msg.payload)) {
            std::size_t dev = g.upsert_device_by_hex(ping->peer.hex(), prov);
            NetAddr announced{msg.src.ip, static_cast<std::uint16_t>(ping->port)};
            std::size_t ep = g.upsert_endpoint(announced, prov);
            g.add_edge(EdgeType::device_seen_at_endpoint, dev, ep, prov, ts);
            g.upsert_endpoint(msg.dst, prov);
            for (const ShareId& share_id : ping->shares) {
                std::size_t share = g.upsert_share(share_id.hex(), prov);
                g.add_edge(EdgeType::device_announces_share, dev, share, prov, ts);
            }
            summary = "lan ping from " + announced.to_string() + " announcing " +
                      std::to_string(ping->shares.size()) + " share(s)";
        }

        TimelineEntry t;
        t.ts = ts;
        t.usec = msg.ts_usec;
        t.naive = false;
        t.source = SourceKind::capture;
        t.path = path;
        t.locator = static_cast<std::int64_t>(msg.record_index);
        t.description = summary;
        t.prov = {prov};
        g.add_timeline(std::move(t));
    }
}

Result<bool> ingest_hints(EvidenceGraph& g, const nlohmann::json& hints,
                          const std::string& hints_path) {
    if (!hints.is_array())
        return make_error(Errc::bad_hint_schema, hints_path + ": hints must be a JSON array");
    std::size_t row_no = 0;
    for (const auto& row : hints) {
        std::string where = hints_path + " row " + std::to_string(row_no);
        std::size_t prov =
            g.provenance(SourceKind::external_hint, hints_path, static_cast<std::int64_t>(row_no));
        ++row_no;
        if (!row.is_object() || !row.contains("entity_kind") || !row["entity_kind"].is_string())
            return make_error(Errc::bad_hint_schema, where + ": missing entity_kind");
        std::string kind = row["entity_kind"].get<std::string>();
        nlohmann::json attrs = row.value("attributes", nlohmann::json::object());
        if (!attrs.is_object())
            return make_error(Errc::bad_hint_schema, where + ": attributes must be an object");

        auto attr_text = [&](const char* name) -> std::optional<std::string> {
            if (!attrs.contains(name)) return std::nullopt;
            const auto& v = attrs[name];
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
            return std::nullopt;
        };

        std::optional<std::size_t> node;
        if (kind == "Device") {
            if (auto hex = attr_text("peer_id_hex"))
                node = g.upsert_device_by_hex(*hex, prov);
            else if (auto b32 = attr_text("peer_id_b32"))
                node = g.upsert_device_by_b32(*b32, prov);
            else if (auto name = attr_text("name"))
                node = g.upsert_device_by_name(*name, prov);
        } else if (kind == "Identity") {
            auto name = attr_text("name");
            auto fp = attr_text("fingerprint");
            if (name || fp) node = g.upsert_identity(name.value_or(""), fp, prov);
        } else if (kind == "Folder") {
            if (auto id = attr_text("folder_id")) {
                if (auto v = to_int(*id)) node = g.upsert_folder_by_id(*v, prov);
            } else if (auto p = attr_text("path")) {
                node = g.upsert_folder_by_path(*p, prov);
            }
        } else if (kind == "Share") {
            if (auto hex = attr_text("share_id_hex")) node = g.upsert_share(*hex, prov);
        } else if (kind == "Endpoint") {
            if (auto addr = attr_text("addr")) {
                if (auto a = parse_ip_port(*addr)) node = g.upsert_endpoint(*a, prov);
            }
        } else {
            return make_error(Errc::bad_hint_schema, where + ": unknown entity_kind " + kind);
        }
        if (!node)
            return make_error(Errc::bad_hint_schema,
                              where + ": no usable key attribute for " + kind);

        for (const auto& [name, value] : attrs.items()) {
            if (value.is_string())
                g.set_attr(*node, name, value.get<std::string>(), prov);
            else if (value.is_number_integer())
                g.set_attr(*node, name, std::to_string(value.get<std::int64_t>()), prov);
            else if (value.is_boolean())
                g.set_attr(*node, name, value.get<bool>() ? "true" : "false", prov);
        }
        if (row.contains("timestamp") && row["timestamp"].is_number_integer()) {
            timeline_fact(g, row["timestamp"].get<std::int64_t>(), false,
                          SourceKind::external_hint, hints_path,
                          static_cast<std::int64_t>(row_no - 1),
                          "hint: " + kind + " " + g.node_key(*node), prov);
        }
    }
    return true;
}

namespace {

namespace fs = std::filesystem;

std::optional<Bytes> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::optional<bencode::BValue> decode_dat(EvidenceGraph& g, const fs::path& file,
                                          const std::string& rel) {
    auto raw = read_file(file);
    if (!raw) {
        g.add_warning(rel + ": unreadable");
        return std::nullopt;
    }
    auto decoded = bencode::decode(ByteView(raw->data(), raw->size()));
    if (!decoded.ok()) {
        g.add_warning(rel + ": " + decoded.error().to_string());
        return std::nullopt;
    }
    for (const auto& w : decoded.value().warnings)
        g.add_warning(rel + ": " + w.message + " (offset " + std::to_string(w.offset) + ")");
    return decoded.take().value;
}

void ingest_dat_dir(EvidenceGraph& g, const fs::path& dats, const std::string& rel_prefix) {
    struct Variant {
        const char* name;
        bool superseded;
    };
    static const Variant variants[] = {{"", false}, {".OLD", true}};

    for (const Variant& var : variants) {
        MetadataBundle bundle;
        bundle.superseded = var.superseded;
        bool any = false;

        fs::path settings = dats / (std::string("settings.dat") + var.name);
        if (fs::exists(settings)) {
            std::string rel = rel_prefix + "settings.dat" + var.name;
            if (auto v = decode_dat(g, settings, rel)) {
                auto r = metadata::parse_settings(*v);
                if (r.ok()) {
                    bundle.settings = r.take();
                    bundle.settings_path = rel;
                    any = true;
                } else {
                    g.add_warning(rel + ": " + r.error().to_string());
                }
            }
        }
        fs::path sync = dats / (std::string("sync.dat") + var.name);
        if (fs::exists(sync)) {
            std::string rel = rel_prefix + "sync.dat" + var.name;
            if (auto v = decode_dat(g, sync, rel)) {
                auto r = metadata::parse_sync_dat(*v);
                if (r.ok()) {
                    bundle.sync = r.take();
                    bundle.sync_path = rel;
                    any = true;
                } else {
                    g.add_warning(rel + ": " + r.error().to_string());
                }
            }
        }
        fs::path hist = dats / (std::string("history.dat") + var.name);
        if (fs::exists(hist)) {
            std::string rel = rel_prefix + "history.dat" + var.name;
            if (auto v = decode_dat(g, hist, rel)) {
                auto r = metadata::parse_history(*v);
                if (r.ok()) {
                    bundle.history = r.take();
                    bundle.history_path = rel;
                    any = true;
                } else {
                    g.add_warning(rel + ": " + r.error().to_string());
                }
            }
        }
        fs::path ident = dats / (std::string("identity.dat") + var.name);
        if (fs::exists(ident)) {
            std::string rel = rel_prefix + "identity.dat" + var.name;
            if (auto v = decode_dat(g, ident, rel)) {
                auto r = metadata::parse_identity(*v, metadata::IdentitySource::identity_dat_file);
                if (r.ok()) {
                    bundle.identities.push_back(r.take());
                    bundle.identity_paths.push_back(rel);
                    any = true;
                } else {
                    g.add_warning(rel + ": " + r.error().to_string());
                }
            }
        }
        fs::path info = dats / (std::string("info.dat") + var.name);
        if (fs::exists(info)) {
            std::string rel = rel_prefix + "info.dat" + var.name;
            if (auto v = decode_dat(g, info, rel)) {
                auto r = metadata::parse_info(*v);
                if (r.ok()) {
                    bundle.info = r.take();
                    bundle.info_path = rel;
                    any = true;
                } else {
                    g.add_warning(rel + ": " + r.error().to_string());
                }
            }
        }
        if (!var.superseded) {
            fs::path identities = dats / "identities";
            std::error_code ec;
            if (fs::is_directory(identities, ec)) {
                std::vector<fs::path> files;
                for (fs::directory_iterator it(identities, ec), end; !ec && it != end;
                     it.increment(ec))
                    if (it->is_regular_file()) files.push_back(it->path());
                std::sort(files.begin(), files.end());
                for (const fs::path& f : files) {
                    std::string rel = rel_prefix + "identities/" + f.filename().string();
                    if (auto v = decode_dat(g, f, rel)) {
                        auto r = metadata::parse_identity(
                            *v, metadata::IdentitySource::identities_dir_file,
                            f.filename().string());
                        if (r.ok()) {
                            bundle.identities.push_back(r.take());
                            bundle.identity_paths.push_back(rel);
                            any = true;
                        } else {
                            g.add_warning(rel + ": " + r.error().to_string());
                        }
                    }
                }
            }
        }
        if (any) ingest_metadata(g, bundle);
    }

    // the share database is recognized but its record layout is not
    // established; its presence or absence surfaces as a Gap finding
    std::error_code ec;
    for (fs::directory_iterator it(dats, ec), end; !ec && it != end; it.increment(ec))
        if (it->path().extension() == ".db") g.note_db_file_seen();
}

} // namespace

Result<EvidenceGraph> correlate_case(const fs::path& case_dir,
                                     const netdissect::EndpointRegistry& registry) {
    std::error_code ec;
    if (!fs::is_directory(case_dir, ec))
        return make_error(Errc::io_failure, case_dir.string() + " is not a directory");

    EvidenceGraph g(registry);

    fs::path dats = case_dir / "dats";
    if (fs::is_directory(dats, ec)) ingest_dat_dir(g, dats, "dats/");

    fs::path logs = case_dir / "logs";
    if (fs::is_directory(logs, ec)) {
        std::vector<fs::path> files;
        for (fs::directory_iterator it(logs, ec), end; !ec && it != end; it.increment(ec))
            if (it->is_regular_file()) files.push_back(it->path());
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files) {
            auto raw = read_file(f);
            std::string rel = "logs/" + f.filename().string();
            if (!raw) {
                g.add_warning(rel + ": unreadable");
                continue;
            }
            auto parsed = logparse::parse_log(
                std::string_view(reinterpret_cast<const char*>(raw->data()), raw->size()));
            ingest_log(g, parsed.events, rel);
        }
    }

    fs::path tree = case_dir / "tree";
    if (fs::is_directory(tree, ec)) {
        metadata::TreeScan scan = metadata::scan_tree(tree);
        ingest_tree(g, scan, "tree");
    }

    fs::path captures = case_dir / "captures";
    if (fs::is_directory(captures, ec)) {
        std::vector<fs::path> files;
        for (fs::directory_iterator it(captures, ec), end; !ec && it != end; it.increment(ec))
            if (it->is_regular_file() && it->path().extension() == ".pcap")
                files.push_back(it->path());
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files) {
            std::string rel = "captures/" + f.filename().string();
            auto extraction = netdissect::extract_discovery(f, registry);
            if (!extraction.ok()) {
                g.add_warning(rel + ": " + extraction.error().to_string());
                continue;
            }
            for (const auto& skip : extraction.value().skipped)
                g.add_warning(rel + ": record " + std::to_string(skip.index) + " skipped: " +
                              skip.reason);
            ingest_capture(g, extraction.value(), rel);
        }
    }

    fs::path hints = case_dir / "hints.json";
    if (fs::is_regular_file(hints, ec)) {
        auto raw = read_file(hints);
        if (raw) {
            nlohmann::json doc = nlohmann::json::parse(
                std::string_view(reinterpret_cast<const char*>(raw->data()), raw->size()),
                nullptr, false);
            if (doc.is_discarded()) {
                g.add_warning("hints.json: not valid JSON, skipped");
            } else {
                auto r = ingest_hints(g, doc, "hints.json");
                if (!r.ok()) return r.error();
            }
        }
    }

    g.finalize();
    return g;
}

} // namespace btsf::correlate
