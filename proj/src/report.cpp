#include "btsf/report.hpp"

#include <algorithm>
#include <cstdio>

namespace btsf::report {

using correlate::EdgeType;
using correlate::EvidenceGraph;
using correlate::Node;
using correlate::NodeKind;
using nlohmann::ordered_json;

namespace {

constexpr int kReportVersion = 1;

std::string iso_utc(std::int64_t epoch) {
    std::int64_t days = epoch / 86400;
    std::int64_t rem = epoch % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    // civil-from-days, proleptic Gregorian
    std::int64_t z = days + 719468;
    std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    std::int64_t doe = z - era * 146097;
    std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t y = yoe + era * 400;
    std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    std::int64_t mp = (5 * doy + 2) / 153;
    std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    std::int64_t m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04lld-%02lld-%02lldT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), static_cast<long long>(m),
                  static_cast<long long>(d), static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem % 3600) / 60), static_cast<long long>(rem % 60));
    return buf;
}

std::string render_time(std::int64_t ts, bool naive, const RenderOptions& opt) {
    if (!naive) return iso_utc(ts);
    if (opt.tz_offset_minutes)
        return iso_utc(ts - *opt.tz_offset_minutes * 60) + " (local, anchored via --tz-offset)";
    std::string text = iso_utc(ts);
    text.pop_back(); // drop the Z; the value is unanchored local time
    return text + " (local, unanchored)";
}

std::string prov_ref(const EvidenceGraph& g, std::size_t idx) {
    const correlate::Provenance& p = g.provenances()[idx];
    std::string out = std::string(correlate::source_kind_name(p.kind)) + ":" + p.path;
    if (p.locator >= 0) out += ":" + std::to_string(p.locator);
    return out;
}

ordered_json prov_list(const EvidenceGraph& g, const std::vector<std::size_t>& prov) {
    ordered_json out = ordered_json::array();
    for (std::size_t idx : prov) out.push_back(prov_ref(g, idx));
    return out;
}

// attribute values with their citations, e.g. {"value": "...", "prov": [...]}
ordered_json attr_json(const EvidenceGraph& g, const Node& n, std::string_view name) {
    ordered_json out = ordered_json::array();
    auto it = n.attrs.find(std::string(name));
    if (it == n.attrs.end()) return out;
    for (const correlate::AttrValue& v : it->second) {
        ordered_json jv;
        jv["value"] = v.value;
        jv["prov"] = prov_list(g, v.prov);
        out.push_back(std::move(jv));
    }
    return out;
}

ordered_json time_attr_json(const EvidenceGraph& g, const Node& n, std::string_view name,
                            const RenderOptions& opt) {
    ordered_json out = ordered_json::array();
    auto it = n.attrs.find(std::string(name));
    if (it == n.attrs.end()) return out;
    for (const correlate::AttrValue& v : it->second) {
        ordered_json jv;
        char* end = nullptr;
        long long epoch = std::strtoll(v.value.c_str(), &end, 10);
        jv["value"] = (end && *end == '\0') ? render_time(epoch, false, opt) : v.value;
        jv["epoch"] = v.value;
        jv["prov"] = prov_list(g, v.prov);
        out.push_back(std::move(jv));
    }
    return out;
}

std::vector<std::size_t> nodes_of_kind(const EvidenceGraph& g, NodeKind kind) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < g.nodes().size(); ++i)
        if (g.nodes()[i].kind == kind) out.push_back(i);
    return out;
}

ordered_json no_evidence() {
    ordered_json j;
    j["no_evidence"] = true;
    return j;
}

} // namespace

std::optional<int> parse_tz_offset(std::string_view text) {
    if (text.size() != 6 || (text[0] != '+' && text[0] != '-') || text[3] != ':') return std::nullopt;
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!digit(text[1]) || !digit(text[2]) || !digit(text[4]) || !digit(text[5]))
        return std::nullopt;
    int hours = (text[1] - '0') * 10 + (text[2] - '0');
    int minutes = (text[4] - '0') * 10 + (text[5] - '0');
    if (hours > 14 || minutes > 59) return std::nullopt;
    int total = hours * 60 + minutes;
    return text[0] == '-' ? -total : total;
}

ordered_json render_json(const EvidenceGraph& graph, const RenderOptions& opt) {
    ordered_json doc;
    doc["report_version"] = kReportVersion;
    doc["schema"] = "btsf-report-1";

    // 1. application versions and install times (the local device)
    {
        ordered_json section = ordered_json::array();
        for (std::size_t i : nodes_of_kind(graph, NodeKind::device)) {
            const Node& n = graph.nodes()[i];
            if (!n.attr("local")) continue;
            ordered_json entry;
            entry["device"] = graph.node_key(i);
            entry["platform"] = attr_json(graph, n, "platform");
            entry["version"] = attr_json(graph, n, "version");
            entry["install_time"] = time_attr_json(graph, n, "install_time", opt);
            entry["first_use"] = time_attr_json(graph, n, "first_use", opt);
            entry["exe_path"] = attr_json(graph, n, "exe_path");
            section.push_back(std::move(entry));
        }
        doc["1_versions_and_install"] = section.empty() ? no_evidence() : ordered_json(section);
    }

    // 2. devices: raw and encoded peer IDs, names, fingerprints, addresses
    {
        ordered_json section = ordered_json::array();
        for (std::size_t i : nodes_of_kind(graph, NodeKind::device)) {
            const Node& n = graph.nodes()[i];
            ordered_json entry;
            entry["key"] = graph.node_key(i);
            entry["local"] = n.attr("local") != nullptr;
            entry["peer_id_hex"] = attr_json(graph, n, "peer_id_hex");
            entry["peer_id_b32"] = attr_json(graph, n, "peer_id_b32");
            entry["name"] = attr_json(graph, n, "name");
            entry["version"] = attr_json(graph, n, "version");
            entry["ip"] = attr_json(graph, n, "ip");
            if (n.attr("id_forms_consistent")) entry["id_forms_consistent"] = true;
            ordered_json endpoints = ordered_json::array();
            for (const correlate::Edge& e : graph.edges()) {
                if (e.type != EdgeType::device_seen_at_endpoint || e.from != i) continue;
                ordered_json je;
                je["endpoint"] = graph.node_key(e.to);
                const Node& ep = graph.nodes()[e.to];
                if (const std::string* cls = ep.attr("class")) je["class"] = *cls;
                if (e.ts) je["seen"] = render_time(*e.ts, e.ts_naive, opt);
                je["prov"] = prov_list(graph, e.prov);
                endpoints.push_back(std::move(je));
            }
            entry["endpoints"] = std::move(endpoints);
            ordered_json owners = ordered_json::array();
            for (const correlate::Edge& e : graph.edges()) {
                if (e.type != EdgeType::identity_owns_device || e.to != i) continue;
                ordered_json je;
                je["identity"] = graph.node_key(e.from);
                const Node& ident = graph.nodes()[e.from];
                if (const std::string* fp = ident.attr("fingerprint")) je["fingerprint"] = *fp;
                je["prov"] = prov_list(graph, e.prov);
                owners.push_back(std::move(je));
            }
            entry["identities"] = std::move(owners);
            section.push_back(std::move(entry));
        }
        // identities observed without a device linkage still belong here
        ordered_json idents = ordered_json::array();
        for (std::size_t i : nodes_of_kind(graph, NodeKind::identity)) {
            const Node& n = graph.nodes()[i];
            ordered_json entry;
            entry["key"] = graph.node_key(i);
            entry["name"] = attr_json(graph, n, "name");
            entry["fingerprint"] = attr_json(graph, n, "fingerprint");
            entry["has_private_keys"] = n.attr("has_private_keys") != nullptr;
            idents.push_back(std::move(entry));
        }
        ordered_json sec;
        sec["devices"] = section.empty() ? no_evidence() : ordered_json(section);
        sec["identities"] = idents.empty() ? no_evidence() : ordered_json(idents);
        doc["2_devices_and_identities"] = std::move(sec);
    }

    // 3. shared folders
    {
        ordered_json section = ordered_json::array();
        for (std::size_t i : nodes_of_kind(graph, NodeKind::folder)) {
            const Node& n = graph.nodes()[i];
            ordered_json entry;
            entry["key"] = graph.node_key(i);
            entry["folder_id"] = attr_json(graph, n, "folder_id");
            entry["name"] = attr_json(graph, n, "name");
            entry["path"] = attr_json(graph, n, "path");
            entry["tree_path"] = attr_json(graph, n, "tree_path");
            entry["date_added"] = time_attr_json(graph, n, "date_added", opt);
            entry["last_modified"] = time_attr_json(graph, n, "last_modified", opt);
            entry["discovery"] = attr_json(graph, n, "discovery");
            if (n.attr("in_trash")) entry["in_trash"] = true;
            if (n.attr("identity_app_folder")) entry["identity_app_folder"] = true;
            ordered_json shares = ordered_json::array();
            for (const correlate::Edge& e : graph.edges()) {
                if (e.type != EdgeType::folder_has_share || e.from != i) continue;
                ordered_json je;
                je["share"] = graph.node_key(e.to);
                je["prov"] = prov_list(graph, e.prov);
                shares.push_back(std::move(je));
            }
            entry["shares"] = std::move(shares);
            ordered_json linked = ordered_json::array();
            for (const correlate::Edge& e : graph.edges()) {
                if (e.type != EdgeType::identity_linked_folder || e.to != i) continue;
                ordered_json je;
                je["identity"] = graph.node_key(e.from);
                if (e.ts) je["linked"] = render_time(*e.ts, e.ts_naive, opt);
                auto access = e.attrs.find("access");
                if (access != e.attrs.end()) je["access"] = access->second;
                je["prov"] = prov_list(graph, e.prov);
                linked.push_back(std::move(je));
            }
            entry["linked_identities"] = std::move(linked);
            section.push_back(std::move(entry));
        }
        doc["3_folders"] = section.empty() ? no_evidence() : ordered_json(section);
    }

    // 4. access requests
    {
        ordered_json section = ordered_json::array();
        for (const correlate::Edge& e : graph.edges()) {
            if (e.type != EdgeType::request_for_folder) continue;
            ordered_json entry;
            entry["identity"] = graph.node_key(e.from);
            entry["folder"] = graph.node_key(e.to);
            if (e.ts) entry["time"] = render_time(*e.ts, e.ts_naive, opt);
            for (const auto& [k, v] : e.attrs) entry[k] = v;
            if (entry.contains("permission_label"))
                entry["permission_label"] =
                    entry["permission_label"].get<std::string>() + " (hypothesized)";
            entry["prov"] = prov_list(graph, e.prov);
            section.push_back(std::move(entry));
        }
        doc["4_access_requests"] = section.empty() ? no_evidence() : ordered_json(section);
    }

    // 5. peers per share
    {
        ordered_json section = ordered_json::array();
        for (std::size_t i : nodes_of_kind(graph, NodeKind::share)) {
            const Node& n = graph.nodes()[i];
            ordered_json entry;
            entry["share"] = graph.node_key(i);
            entry["width"] = attr_json(graph, n, "width");
            if (n.attr("hex_width_anomaly"))
                entry["hex_width_anomaly"] = *n.attr("hex_width_anomaly");
            ordered_json peers = ordered_json::array();
            for (const correlate::Edge& e : graph.edges()) {
                if (e.type != EdgeType::device_announces_share || e.to != i) continue;
                ordered_json je;
                je["device"] = graph.node_key(e.from);
                if (e.ts) je["announced"] = render_time(*e.ts, e.ts_naive, opt);
                je["prov"] = prov_list(graph, e.prov);
                peers.push_back(std::move(je));
            }
            entry["announcing_devices"] = std::move(peers);
            ordered_json folders = ordered_json::array();
            for (const correlate::Edge& e : graph.edges()) {
                if (e.type != EdgeType::folder_has_share || e.to != i) continue;
                folders.push_back(graph.node_key(e.from));
            }
            entry["folders"] = std::move(folders);
            ordered_json endpoints = ordered_json::array();
            for (const correlate::Edge& e : graph.edges()) {
                if (e.type != EdgeType::share_at_endpoint || e.from != i) continue;
                ordered_json je;
                je["endpoint"] = graph.node_key(e.to);
                const Node& ep = graph.nodes()[e.to];
                if (const std::string* cls = ep.attr("class")) je["class"] = *cls;
                je["prov"] = prov_list(graph, e.prov);
                endpoints.push_back(std::move(je));
            }
            entry["endpoints"] = std::move(endpoints);
            section.push_back(std::move(entry));
        }
        doc["5_peers_per_share"] = section.empty() ? no_evidence() : ordered_json(section);
    }

    // 6. sync file inventory
    {
        ordered_json section = ordered_json::array();
        for (std::size_t i : nodes_of_kind(graph, NodeKind::file)) {
            const Node& n = graph.nodes()[i];
            ordered_json entry;
            entry["key"] = graph.node_key(i);
            entry["name"] = attr_json(graph, n, "name");
            if (n.owner) entry["folder"] = graph.node_key(*n.owner);
            entry["deleted"] = n.attr("deleted") && *n.attr("deleted") == "true";
            entry["size"] = attr_json(graph, n, "size");
            entry["mtime"] = time_attr_json(graph, n, "mtime", opt);
            section.push_back(std::move(entry));
        }
        doc["6_file_inventory"] = section.empty() ? no_evidence() : ordered_json(section);
    }

    ordered_json findings = ordered_json::array();
    for (const correlate::Finding& f : graph.findings()) {
        ordered_json jf;
        jf["kind"] = correlate::finding_kind_name(f.kind);
        jf["description"] = f.description;
        jf["prov"] = prov_list(graph, f.prov);
        findings.push_back(std::move(jf));
    }
    doc["findings"] = std::move(findings);

    ordered_json timeline = ordered_json::array();
    for (const correlate::TimelineEntry& t : graph.timeline()) {
        ordered_json jt;
        jt["time"] = render_time(t.ts, t.naive, opt);
        if (t.usec != 0) jt["usec"] = t.usec;
        jt["naive"] = t.naive;
        jt["source"] = correlate::source_kind_name(t.source);
        jt["description"] = t.description;
        jt["prov"] = prov_list(graph, t.prov);
        timeline.push_back(std::move(jt));
    }
    doc["timeline"] = std::move(timeline);

    ordered_json warnings = ordered_json::array();
    for (const std::string& w : graph.warnings()) warnings.push_back(w);
    doc["warnings"] = std::move(warnings);
    return doc;
}

namespace {

void render_section_text(std::string& out, const ordered_json& j, int indent = 0) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (j.is_object()) {
        if (j.contains("no_evidence")) {
            out += pad + "no evidence\n";
            return;
        }
        for (const auto& [k, v] : j.items()) {
            if (v.is_object() || v.is_array()) {
                out += pad + k + ":\n";
                render_section_text(out, v, indent + 1);
            } else {
                out += pad + k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
            }
        }
    } else if (j.is_array()) {
        if (j.empty()) {
            out += pad + "(none)\n";
            return;
        }
        for (const auto& v : j) {
            out += pad + "-\n";
            render_section_text(out, v, indent + 1);
        }
    } else {
        out += pad + (j.is_string() ? j.get<std::string>() : j.dump()) + "\n";
    }
}

} // namespace

std::string render_text(const EvidenceGraph& graph, const RenderOptions& opt) {
    ordered_json doc = render_json(graph, opt);
    std::string out;
    static const std::pair<const char*, const char*> sections[] = {
        {"1_versions_and_install", "1. Versions and installation"},
        {"2_devices_and_identities", "2. Devices and identities"},
        {"3_folders", "3. Shared folders"},
        {"4_access_requests", "4. Access requests"},
        {"5_peers_per_share", "5. Peers per share"},
        {"6_file_inventory", "6. File inventory"},
        {"findings", "Findings"},
        {"timeline", "Timeline"},
        {"warnings", "Warnings"},
    };
    out += "Case report (version " + std::to_string(kReportVersion) + ")\n";
    for (const auto& [key, title] : sections) {
        out += "\n== " + std::string(title) + " ==\n";
        render_section_text(out, doc[key]);
    }
    return out;
}

} // namespace btsf::report
