#include "btsf/correlate.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "btsf/bencode.hpp"

namespace btsf::correlate {

using nlohmann::json;
using nlohmann::ordered_json;

const char* source_kind_name(SourceKind k) {
    switch (k) {
        case SourceKind::settings_dat: return "SettingsDat";
        case SourceKind::sync_dat: return "SyncDat";
        case SourceKind::history_dat: return "HistoryDat";
        case SourceKind::identity_dat: return "IdentityDat";
        case SourceKind::info_dat: return "InfoDat";
        case SourceKind::id_file: return "IdFile";
        case SourceKind::tree_scan: return "TreeScan";
        case SourceKind::sync_log: return "SyncLog";
        case SourceKind::capture: return "Capture";
        case SourceKind::external_hint: return "ExternalHint";
    }
    return "ExternalHint";
}

std::optional<SourceKind> source_kind_of(std::string_view name) {
    for (int k = 0; k <= static_cast<int>(SourceKind::external_hint); ++k) {
        auto kind = static_cast<SourceKind>(k);
        if (name == source_kind_name(kind)) return kind;
    }
    return std::nullopt;
}

const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::identity: return "identity";
        case NodeKind::device: return "device";
        case NodeKind::folder: return "folder";
        case NodeKind::share: return "share";
        case NodeKind::file: return "file";
        case NodeKind::endpoint: return "endpoint";
    }
    return "device";
}

static std::optional<NodeKind> node_kind_of(std::string_view name) {
    for (int k = static_cast<int>(NodeKind::identity); k <= static_cast<int>(NodeKind::endpoint);
         ++k) {
        auto kind = static_cast<NodeKind>(k);
        if (name == node_kind_name(kind)) return kind;
    }
    return std::nullopt;
}

const char* edge_type_name(EdgeType t) {
    switch (t) {
        case EdgeType::identity_owns_device: return "identity-owns-device";
        case EdgeType::device_has_folder: return "device-has-folder";
        case EdgeType::folder_has_share: return "folder-has-share";
        case EdgeType::device_seen_at_endpoint: return "device-seen-at-endpoint";
        case EdgeType::file_in_folder: return "file-in-folder";
        case EdgeType::request_for_folder: return "request-for-folder";
        case EdgeType::device_announces_share: return "device-announces-share";
        case EdgeType::share_at_endpoint: return "share-at-endpoint";
        case EdgeType::identity_linked_folder: return "identity-linked-folder";
    }
    return "device-seen-at-endpoint";
}

static std::optional<EdgeType> edge_type_of(std::string_view name) {
    for (int t = static_cast<int>(EdgeType::identity_owns_device);
         t <= static_cast<int>(EdgeType::identity_linked_folder); ++t) {
        auto type = static_cast<EdgeType>(t);
        if (name == edge_type_name(type)) return type;
    }
    return std::nullopt;
}

const char* finding_kind_name(FindingKind k) {
    switch (k) {
        case FindingKind::link: return "Link";
        case FindingKind::conflict: return "Conflict";
        case FindingKind::gap: return "Gap";
    }
    return "Link";
}

static std::optional<FindingKind> finding_kind_of(std::string_view name) {
    if (name == "Link") return FindingKind::link;
    if (name == "Conflict") return FindingKind::conflict;
    if (name == "Gap") return FindingKind::gap;
    return std::nullopt;
}

std::string normalize_path(std::string_view raw) {
    std::string p(raw);
    if (p.rfind("\\\\?\\", 0) == 0) p.erase(0, 4);
    for (char& c : p) {
        if (c == '\\') c = '/';
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    while (p.size() > 1 && p.back() == '/') p.pop_back();
    return p;
}

std::string path_basename(std::string_view normalized) {
    std::size_t slash = normalized.rfind('/');
    return std::string(slash == std::string_view::npos ? normalized
                                                       : normalized.substr(slash + 1));
}

std::string raw_basename(std::string_view raw) {
    if (raw.rfind("\\\\?\\", 0) == 0) raw.remove_prefix(4);
    while (!raw.empty() && (raw.back() == '/' || raw.back() == '\\')) raw.remove_suffix(1);
    std::size_t cut = raw.find_last_of("/\\");
    return std::string(cut == std::string_view::npos ? raw : raw.substr(cut + 1));
}

static std::string lower_hex(std::string_view hex) {
    std::string out(hex);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

const std::string* Node::attr(std::string_view name) const {
    auto it = attrs.find(std::string(name));
    if (it == attrs.end() || it->second.empty()) return nullptr;
    return &it->second.front().value; // values are kept sorted
}

bool Node::has_attr_value(std::string_view name, std::string_view value) const {
    auto it = attrs.find(std::string(name));
    if (it == attrs.end()) return false;
    for (const AttrValue& v : it->second)
        if (v.value == value) return true;
    return false;
}

EvidenceGraph::EvidenceGraph(netdissect::EndpointRegistry registry)
    : registry_(std::move(registry)) {}

std::size_t EvidenceGraph::provenance(SourceKind kind, std::string path, std::int64_t locator) {
    Provenance p{kind, std::move(path), locator};
    auto it = prov_index_.find(p);
    if (it != prov_index_.end()) return it->second;
    provenances_.push_back(p);
    prov_index_.emplace(std::move(p), provenances_.size() - 1);
    return provenances_.size() - 1;
}

std::size_t EvidenceGraph::canonical(std::size_t node) const {
    while (parent_[node] != node) node = parent_[node];
    return node;
}

std::size_t EvidenceGraph::add_node(NodeKind kind) {
    nodes_.push_back(Node{kind, {}, std::nullopt});
    parent_.push_back(nodes_.size() - 1);
    return nodes_.size() - 1;
}

std::size_t EvidenceGraph::find_by_attr(NodeKind kind, std::string_view attr,
                                        std::string_view value) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (canonical(i) != i) continue;
        if (nodes_[i].kind != kind) continue;
        if (nodes_[i].has_attr_value(attr, value)) return i;
    }
    return nodes_.size();
}

void EvidenceGraph::set_attr(std::size_t node, std::string name, std::string value,
                             std::size_t prov) {
    node = canonical(node);
    auto& values = nodes_[node].attrs[name];
    auto it = std::lower_bound(values.begin(), values.end(), value,
                               [](const AttrValue& a, const std::string& b) { return a.value < b; });
    if (it != values.end() && it->value == value) {
        it->prov.push_back(prov);
        return;
    }
    values.insert(it, AttrValue{std::move(value), {prov}});
}

void EvidenceGraph::unify(std::size_t a, std::size_t b) {
    a = canonical(a);
    b = canonical(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    Node& dst = nodes_[a];
    Node& src = nodes_[b];
    for (auto& [name, values] : src.attrs) {
        for (AttrValue& v : values) {
            auto& out = dst.attrs[name];
            auto it = std::lower_bound(out.begin(), out.end(), v.value,
                                       [](const AttrValue& x, const std::string& y) {
                                           return x.value < y;
                                       });
            if (it != out.end() && it->value == v.value)
                it->prov.insert(it->prov.end(), v.prov.begin(), v.prov.end());
            else
                out.insert(it, std::move(v));
        }
    }
    if (!dst.owner && src.owner) dst.owner = src.owner;
    src.attrs.clear();
    parent_[b] = a;
}

std::size_t EvidenceGraph::upsert_device_by_hex(std::string hex, std::size_t prov) {
    std::string key = lower_hex(hex);
    std::size_t found = find_by_attr(NodeKind::device, "peer_id_hex", key);
    if (found == nodes_.size()) {
        found = add_node(NodeKind::device);
        set_attr(found, "peer_id_hex", key, prov);
    } else {
        set_attr(found, "peer_id_hex", key, prov);
    }
    return found;
}

std::size_t EvidenceGraph::upsert_device_by_b32(std::string b32, std::size_t prov) {
    std::size_t found = find_by_attr(NodeKind::device, "peer_id_b32", b32);
    if (found == nodes_.size()) {
        found = add_node(NodeKind::device);
    }
    set_attr(found, "peer_id_b32", std::move(b32), prov);
    return found;
}

std::size_t EvidenceGraph::upsert_device_by_name(std::string name, std::size_t prov) {
    // strong match only against devices that have nothing but a name; the
    // weak name resolution against identified devices runs in finalize()
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (canonical(i) != i || nodes_[i].kind != NodeKind::device) continue;
        const Node& n = nodes_[i];
        if (!n.has_attr_value("name", name)) continue;
        if (n.attr("peer_id_hex") || n.attr("peer_id_b32") || n.attr("local")) continue;
        set_attr(i, "name", std::move(name), prov);
        return i;
    }
    std::size_t node = add_node(NodeKind::device);
    set_attr(node, "name", std::move(name), prov);
    return node;
}

std::size_t EvidenceGraph::upsert_local_device(std::size_t prov) {
    std::size_t found = find_by_attr(NodeKind::device, "local", "true");
    if (found == nodes_.size()) found = add_node(NodeKind::device);
    set_attr(found, "local", "true", prov);
    return found;
}

std::size_t EvidenceGraph::upsert_identity(std::string name, std::optional<std::string> fingerprint,
                                           std::size_t prov) {
    std::size_t found = nodes_.size();
    if (!name.empty()) found = find_by_attr(NodeKind::identity, "name", name);
    if (found == nodes_.size() && fingerprint)
        found = find_by_attr(NodeKind::identity, "fingerprint", *fingerprint);
    if (found == nodes_.size()) found = add_node(NodeKind::identity);
    if (!name.empty()) set_attr(found, "name", std::move(name), prov);
    if (fingerprint) set_attr(found, "fingerprint", std::move(*fingerprint), prov);
    return found;
}

std::size_t EvidenceGraph::upsert_folder_by_id(std::int64_t id, std::size_t prov) {
    std::string key = std::to_string(id);
    std::size_t found = find_by_attr(NodeKind::folder, "folder_id", key);
    if (found == nodes_.size()) found = add_node(NodeKind::folder);
    set_attr(found, "folder_id", std::move(key), prov);
    return found;
}

std::size_t EvidenceGraph::upsert_folder_by_path(std::string raw_path, std::size_t prov) {
    std::string norm = normalize_path(raw_path);
    std::size_t found = find_by_attr(NodeKind::folder, "path_norm", norm);
    if (found == nodes_.size()) found = add_node(NodeKind::folder);
    set_attr(found, "path", std::move(raw_path), prov);
    set_attr(found, "basename", path_basename(norm), prov);
    set_attr(found, "path_norm", std::move(norm), prov);
    return found;
}

std::size_t EvidenceGraph::upsert_folder_by_tree_path(std::string rel_path, std::size_t prov) {
    std::string norm = normalize_path(rel_path);
    std::size_t found = find_by_attr(NodeKind::folder, "tree_path", rel_path);
    if (found == nodes_.size()) found = add_node(NodeKind::folder);
    set_attr(found, "basename", path_basename(norm), prov);
    set_attr(found, "path_norm", std::move(norm), prov);
    set_attr(found, "tree_path", std::move(rel_path), prov);
    return found;
}

std::size_t EvidenceGraph::upsert_share(std::string hex, std::size_t prov) {
    std::string key = lower_hex(hex);
    std::size_t found = find_by_attr(NodeKind::share, "share_id_hex", key);
    if (found == nodes_.size()) found = add_node(NodeKind::share);
    std::size_t width = key.size();
    set_attr(found, "share_id_hex", std::move(key), prov);
    if (width == 40)
        set_attr(found, "width", "W20", prov);
    else if (width == 64)
        set_attr(found, "width", "W32", prov);
    else
        set_attr(found, "hex_width_anomaly", std::to_string(width), prov);
    return found;
}

std::size_t EvidenceGraph::upsert_endpoint(const NetAddr& addr, std::size_t prov) {
    std::string key = addr.to_string();
    std::size_t found = find_by_attr(NodeKind::endpoint, "addr", key);
    if (found == nodes_.size()) found = add_node(NodeKind::endpoint);
    set_attr(found, "addr", std::move(key), prov);
    set_attr(found, "class", netdissect::endpoint_class_name(registry_.classify(addr)), prov);
    return found;
}

std::size_t EvidenceGraph::add_file(std::size_t folder, std::string name, bool deleted,
                                    std::size_t prov) {
    folder = canonical(folder);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (canonical(i) != i || nodes_[i].kind != NodeKind::file) continue;
        const Node& n = nodes_[i];
        if (!n.owner || canonical(*n.owner) != folder) continue;
        if (!n.has_attr_value("name", name)) continue;
        bool n_deleted = n.attr("deleted") && *n.attr("deleted") == "true";
        if (n_deleted != deleted) continue;
        set_attr(i, "name", std::move(name), prov);
        return i;
    }
    std::size_t node = add_node(NodeKind::file);
    nodes_[node].owner = folder;
    set_attr(node, "name", std::move(name), prov);
    set_attr(node, "deleted", deleted ? "true" : "false", prov);
    return node;
}

std::size_t EvidenceGraph::add_edge(EdgeType type, std::size_t from, std::size_t to,
                                    std::size_t prov, std::optional<std::int64_t> ts,
                                    bool ts_naive) {
    Edge e;
    e.type = type;
    e.from = from;
    e.to = to;
    e.ts = ts;
    e.ts_naive = ts_naive;
    e.prov.push_back(prov);
    edges_.push_back(std::move(e));
    return edges_.size() - 1;
}

void EvidenceGraph::set_edge_attr(std::size_t edge, std::string name, std::string value) {
    edges_[edge].attrs[std::move(name)] = std::move(value);
}

void EvidenceGraph::add_finding(FindingKind kind, std::string description,
                                std::vector<std::size_t> prov) {
    findings_.push_back({kind, std::move(description), std::move(prov)});
}

void EvidenceGraph::add_timeline(TimelineEntry entry) {
    timeline_.push_back(std::move(entry));
}

void EvidenceGraph::add_warning(std::string message) {
    warnings_.push_back(std::move(message));
}

std::string EvidenceGraph::node_key(std::size_t node) const {
    node = canonical(node);
    const Node& n = nodes_[node];
    switch (n.kind) {
        case NodeKind::device:
            if (const std::string* hex = n.attr("peer_id_hex")) return "device:" + *hex;
            if (const std::string* b32 = n.attr("peer_id_b32")) return "device:b32:" + *b32;
            if (n.attr("local")) return "device:local";
            if (const std::string* name = n.attr("name")) return "device:name:" + *name;
            return "device:anon:" + std::to_string(node);
        case NodeKind::identity:
            if (const std::string* name = n.attr("name")) return "identity:" + *name;
            if (const std::string* fp = n.attr("fingerprint")) return "identity:fp:" + *fp;
            return "identity:anon:" + std::to_string(node);
        case NodeKind::folder:
            if (const std::string* id = n.attr("folder_id")) return "folder:" + *id;
            if (const std::string* p = n.attr("path_norm")) return "folder:path:" + *p;
            if (const std::string* t = n.attr("tree_path")) return "folder:tree:" + *t;
            return "folder:anon:" + std::to_string(node);
        case NodeKind::share:
            if (const std::string* hex = n.attr("share_id_hex")) return "share:" + *hex;
            return "share:anon:" + std::to_string(node);
        case NodeKind::endpoint:
            if (const std::string* addr = n.attr("addr")) return "endpoint:" + *addr;
            return "endpoint:anon:" + std::to_string(node);
        case NodeKind::file: {
            std::string base = n.owner ? node_key(*n.owner) : "folder:anon";
            if (base.rfind("folder:", 0) == 0) base.erase(0, 7);
            std::string key = "file:" + base + "/";
            if (const std::string* name = n.attr("name")) key += *name;
            if (n.attr("deleted") && *n.attr("deleted") == "true") key += "|deleted";
            return key;
        }
    }
    return "anon:" + std::to_string(node);
}

namespace {

// attrs with naturally many values; everything else with two or more
// distinct values is a Conflict
bool attr_multi_ok(std::string_view name) {
    return name == "ip" || name == "tree_path" || name == "discovery" || name == "note" ||
           name == "basename" || name == "path" || name == "path_norm" || name == "mtime" ||
           name == "size";
}

} // namespace

void EvidenceGraph::finalize() {
    if (finalized_) return;
    finalized_ = true;

    // examination gaps that are part of the method but outside this toolkit
    {
        std::string desc;
        if (db_file_seen_)
            desc = "share database file present but not examined (record schema is not "
                   "established); filename-to-share correlation unavailable from it";
        else
            desc = "no share database file in the case inputs; filename-to-share correlation "
                   "from it was not examined";
        add_finding(FindingKind::gap, desc, {});
        add_finding(FindingKind::gap,
                    "remote re-acquisition from peer devices not performed; peer endpoints in "
                    "this graph are candidates for follow-up",
                    {});
    }

    auto alive_roots = [&](NodeKind kind) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (canonical(i) == i && nodes_[i].kind == kind) out.push_back(i);
        return out;
    };

    // strong device unification: an observed base32 ID that re-encodes from
    // an observed raw ID names the same device
    for (std::size_t dev : alive_roots(NodeKind::device)) {
        if (canonical(dev) != dev) continue;
        auto it = nodes_[dev].attrs.find("peer_id_hex");
        if (it == nodes_[dev].attrs.end()) continue;
        for (const AttrValue& hex : it->second) {
            auto raw = from_hex(hex.value);
            if (!raw) continue;
            std::string b32 = base32_encode(ByteView(raw->data(), raw->size()));
            std::size_t other = find_by_attr(NodeKind::device, "peer_id_b32", b32);
            if (other != nodes_.size() && canonical(other) != canonical(dev))
                unify(dev, other);
        }
    }

    // a case directory captures one device's application folder; every
    // locally-flagged fragment names that same device
    {
        std::vector<std::size_t> locals;
        for (std::size_t dev : alive_roots(NodeKind::device))
            if (canonical(dev) == dev && nodes_[dev].attr("local")) locals.push_back(dev);
        for (std::size_t i = 1; i < locals.size(); ++i) unify(locals[0], locals[i]);
    }

    // weak name resolution: nodes known only by a device name attach to the
    // unique identified device carrying that name
    {
        auto is_pure_name = [&](std::size_t i) {
            const Node& n = nodes_[i];
            return !n.attr("peer_id_hex") && !n.attr("peer_id_b32") && !n.attr("local") &&
                   n.attr("name");
        };
        for (std::size_t dev : alive_roots(NodeKind::device)) {
            if (canonical(dev) != dev || !is_pure_name(dev)) continue;
            std::set<std::size_t> candidates;
            for (const AttrValue& name : nodes_[dev].attrs.at("name")) {
                for (std::size_t other : alive_roots(NodeKind::device)) {
                    if (canonical(other) != other || other == dev) continue;
                    if (is_pure_name(other)) continue;
                    if (nodes_[other].has_attr_value("name", name.value))
                        candidates.insert(canonical(other));
                }
            }
            if (candidates.size() == 1) {
                std::vector<std::size_t> prov;
                for (const AttrValue& name : nodes_[dev].attrs.at("name"))
                    prov.insert(prov.end(), name.prov.begin(), name.prov.end());
                std::string name = *nodes_[dev].attr("name");
                unify(*candidates.begin(), dev);
                add_finding(FindingKind::link,
                            "weak: device name '" + name +
                                "' matched to an identified device by name only",
                            std::move(prov));
            } else if (candidates.size() > 1) {
                add_warning("device name '" + *nodes_[dev].attr("name") +
                            "' matches several identified devices; left unmerged");
            }
        }
        // leftover name-only fragments with a shared name are one device
        for (std::size_t dev : alive_roots(NodeKind::device)) {
            if (canonical(dev) != dev || !is_pure_name(dev)) continue;
            for (std::size_t other : alive_roots(NodeKind::device)) {
                if (canonical(other) == canonical(dev) || canonical(other) != other) continue;
                if (!is_pure_name(other)) continue;
                bool shares_name = false;
                for (const AttrValue& name : nodes_[dev].attrs.at("name"))
                    if (nodes_[other].has_attr_value("name", name.value)) shares_name = true;
                if (shares_name) unify(dev, other);
            }
        }
    }

    // folder resolution: id-less folders (periodic scans, exported trees)
    // attach to identified folders by exact normalized path, then by unique
    // basename for exported trees whose original drive path is gone
    for (std::size_t folder : alive_roots(NodeKind::folder)) {
        if (canonical(folder) != folder) continue;
        const Node& n = nodes_[folder];
        if (n.attr("folder_id")) continue;
        std::set<std::size_t> exact;
        if (auto it = n.attrs.find("path_norm"); it != n.attrs.end()) {
            for (const AttrValue& norm : it->second) {
                for (std::size_t other : alive_roots(NodeKind::folder)) {
                    if (canonical(other) != other || other == folder) continue;
                    if (!nodes_[other].attr("folder_id")) continue;
                    if (nodes_[other].has_attr_value("path_norm", norm.value))
                        exact.insert(canonical(other));
                }
            }
        }
        if (exact.size() == 1) {
            unify(*exact.begin(), folder);
            continue;
        }
        if (!n.attr("tree_path")) continue;
        std::set<std::size_t> by_name;
        std::vector<std::size_t> prov;
        if (auto it = n.attrs.find("basename"); it != n.attrs.end()) {
            for (const AttrValue& base : it->second) {
                prov.insert(prov.end(), base.prov.begin(), base.prov.end());
                for (std::size_t other : alive_roots(NodeKind::folder)) {
                    if (canonical(other) != other || other == folder) continue;
                    if (!nodes_[other].attr("folder_id")) continue;
                    if (nodes_[other].has_attr_value("basename", base.value))
                        by_name.insert(canonical(other));
                }
            }
        }
        if (by_name.size() == 1) {
            std::string base = *nodes_[folder].attr("basename");
            unify(*by_name.begin(), folder);
            add_finding(FindingKind::link,
                        "weak: exported folder '" + base +
                            "' matched to a folder record by basename only",
                        std::move(prov));
        } else if (by_name.size() > 1) {
            add_warning("exported folder '" + *nodes_[folder].attr("basename") +
                        "' matches several folder records; left unmerged");
        }
    }

    // folder unification can leave duplicate file nodes behind
    for (std::size_t file : alive_roots(NodeKind::file)) {
        if (canonical(file) != file) continue;
        const Node& n = nodes_[file];
        if (!n.owner || !n.attr("name")) continue;
        for (std::size_t other : alive_roots(NodeKind::file)) {
            if (canonical(other) != other || other == file) continue;
            const Node& o = nodes_[other];
            if (!o.owner || canonical(*o.owner) != canonical(*n.owner)) continue;
            if (!o.has_attr_value("name", *n.attr("name"))) continue;
            const std::string* da = n.attr("deleted");
            const std::string* db = o.attr("deleted");
            if (da && db && *da == *db) unify(file, other);
        }
    }

    // base32/raw consistency: both forms on one device must agree, otherwise
    // the disagreement itself is evidence
    for (std::size_t dev : alive_roots(NodeKind::device)) {
        if (canonical(dev) != dev) continue;
        const Node& n = nodes_[dev];
        auto hex_it = n.attrs.find("peer_id_hex");
        auto b32_it = n.attrs.find("peer_id_b32");
        if (hex_it == n.attrs.end() || b32_it == n.attrs.end()) continue;
        for (const AttrValue& hex : hex_it->second) {
            std::optional<std::string> expected;
            if (auto raw = from_hex(hex.value); raw && raw->size() == 20)
                expected = base32_encode(ByteView(raw->data(), raw->size()));
            for (const AttrValue& b32 : b32_it->second) {
                bool consistent = expected && *expected == b32.value;
                if (!consistent) {
                    std::vector<std::size_t> prov(hex.prov);
                    prov.insert(prov.end(), b32.prov.begin(), b32.prov.end());
                    add_finding(FindingKind::conflict,
                                "device ID forms disagree: raw " + hex.value +
                                    " does not re-encode to '" + b32.value + "'" +
                                    (expected ? " (expected '" + *expected + "')"
                                              : " (raw form is not a 20-byte ID)"),
                                std::move(prov));
                } else {
                    set_attr(dev, "id_forms_consistent", "true", b32.prov.front());
                }
            }
        }
    }

    // retained attribute disagreements become Conflict findings
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (canonical(i) != i) continue;
        for (const auto& [name, values] : nodes_[i].attrs) {
            if (values.size() < 2 || attr_multi_ok(name)) continue;
            std::string desc = node_key(i) + ": attribute '" + name + "' has " +
                               std::to_string(values.size()) + " values:";
            std::vector<std::size_t> prov;
            for (const AttrValue& v : values) {
                desc += " '" + v.value + "'";
                prov.insert(prov.end(), v.prov.begin(), v.prov.end());
            }
            add_finding(FindingKind::conflict, desc, std::move(prov));
        }
    }

    compact();
}

void EvidenceGraph::compact() {
    // canonical provenance order, independent of ingestion order
    std::vector<std::size_t> prov_order(provenances_.size());
    for (std::size_t i = 0; i < prov_order.size(); ++i) prov_order[i] = i;
    std::sort(prov_order.begin(), prov_order.end(), [&](std::size_t a, std::size_t b) {
        return provenances_[a] < provenances_[b];
    });
    std::vector<std::size_t> prov_remap(provenances_.size());
    std::vector<Provenance> new_prov(provenances_.size());
    for (std::size_t rank = 0; rank < prov_order.size(); ++rank) {
        prov_remap[prov_order[rank]] = rank;
        new_prov[rank] = provenances_[prov_order[rank]];
    }
    provenances_ = std::move(new_prov);
    prov_index_.clear();
    for (std::size_t i = 0; i < provenances_.size(); ++i) prov_index_[provenances_[i]] = i;

    auto fix_prov = [&](std::vector<std::size_t>& prov) {
        for (std::size_t& p : prov) p = prov_remap[p];
        std::sort(prov.begin(), prov.end());
        prov.erase(std::unique(prov.begin(), prov.end()), prov.end());
    };

    // canonical node order: kind, then key
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (canonical(i) == i) roots.push_back(i);
    std::sort(roots.begin(), roots.end(), [&](std::size_t a, std::size_t b) {
        if (nodes_[a].kind != nodes_[b].kind) return nodes_[a].kind < nodes_[b].kind;
        return node_key(a) < node_key(b);
    });
    std::vector<std::size_t> node_remap(nodes_.size(), 0);
    for (std::size_t rank = 0; rank < roots.size(); ++rank) node_remap[roots[rank]] = rank;

    std::vector<Node> new_nodes;
    new_nodes.reserve(roots.size());
    for (std::size_t root : roots) {
        Node n = std::move(nodes_[root]);
        if (n.owner) n.owner = node_remap[canonical(*n.owner)];
        for (auto& [name, values] : n.attrs)
            for (AttrValue& v : values) fix_prov(v.prov);
        new_nodes.push_back(std::move(n));
    }
    // resolve edges against canonical nodes, then dedup
    std::map<std::tuple<int, std::size_t, std::size_t, std::int64_t, bool>, Edge> dedup;
    for (Edge& e : edges_) {
        std::size_t from = node_remap[canonical(e.from)];
        std::size_t to = node_remap[canonical(e.to)];
        std::int64_t ts_key = e.ts ? *e.ts : std::numeric_limits<std::int64_t>::min();
        auto key = std::make_tuple(static_cast<int>(e.type), from, to, ts_key, e.ts_naive);
        auto it = dedup.find(key);
        if (it == dedup.end()) {
            e.from = from;
            e.to = to;
            dedup.emplace(key, std::move(e));
        } else {
            Edge& kept = it->second;
            kept.prov.insert(kept.prov.end(), e.prov.begin(), e.prov.end());
            for (auto& [k, v] : e.attrs) {
                auto existing = kept.attrs.find(k);
                if (existing == kept.attrs.end())
                    kept.attrs.emplace(k, v);
                else if (existing->second != v)
                    existing->second += " | " + v;
            }
        }
    }
    edges_.clear();
    for (auto& [key, e] : dedup) {
        fix_prov(e.prov);
        edges_.push_back(std::move(e));
    }

    nodes_ = std::move(new_nodes);
    parent_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) parent_[i] = i;

    // findings: remap, dedup, sort
    for (Finding& f : findings_) fix_prov(f.prov);
    std::sort(findings_.begin(), findings_.end(), [](const Finding& a, const Finding& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.description < b.description;
    });
    findings_.erase(std::unique(findings_.begin(), findings_.end(),
                                [](const Finding& a, const Finding& b) {
                                    return a.kind == b.kind && a.description == b.description;
                                }),
                    findings_.end());

    // timeline: remap provenance, dedup identical facts, then order
    for (TimelineEntry& t : timeline_) fix_prov(t.prov);
    auto timeline_key = [](const TimelineEntry& t) {
        return std::tie(t.ts, t.usec, t.source, t.locator, t.path, t.description, t.naive);
    };
    std::sort(timeline_.begin(), timeline_.end(),
              [&](const TimelineEntry& a, const TimelineEntry& b) {
                  return timeline_key(a) < timeline_key(b);
              });
    std::vector<TimelineEntry> merged;
    for (TimelineEntry& t : timeline_) {
        if (!merged.empty()) {
            TimelineEntry& last = merged.back();
            if (timeline_key(last) == timeline_key(t)) {
                last.prov.insert(last.prov.end(), t.prov.begin(), t.prov.end());
                std::sort(last.prov.begin(), last.prov.end());
                last.prov.erase(std::unique(last.prov.begin(), last.prov.end()), last.prov.end());
                continue;
            }
        }
        merged.push_back(std::move(t));
    }
    timeline_ = std::move(merged);

    std::sort(warnings_.begin(), warnings_.end());
    warnings_.erase(std::unique(warnings_.begin(), warnings_.end()), warnings_.end());
}

ordered_json EvidenceGraph::to_json() const {
    ordered_json doc;
    doc["schema"] = "btsf-graph-1";
    ordered_json nodes = ordered_json::array();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        ordered_json jn;
        jn["id"] = i;
        jn["kind"] = node_kind_name(n.kind);
        jn["key"] = node_key(i);
        if (n.owner) jn["owner"] = *n.owner;
        ordered_json attrs;
        for (const auto& [name, values] : n.attrs) {
            ordered_json jvals = ordered_json::array();
            for (const AttrValue& v : values) {
                ordered_json jv;
                jv["value"] = v.value;
                jv["prov"] = v.prov;
                jvals.push_back(std::move(jv));
            }
            attrs[name] = std::move(jvals);
        }
        jn["attrs"] = std::move(attrs);
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);

    ordered_json edges = ordered_json::array();
    for (const Edge& e : edges_) {
        ordered_json je;
        je["type"] = edge_type_name(e.type);
        je["from"] = e.from;
        je["to"] = e.to;
        if (e.ts) {
            je["ts"] = *e.ts;
            je["ts_naive"] = e.ts_naive;
        }
        if (!e.attrs.empty()) je["attrs"] = e.attrs;
        je["prov"] = e.prov;
        edges.push_back(std::move(je));
    }
    doc["edges"] = std::move(edges);

    ordered_json findings = ordered_json::array();
    for (const Finding& f : findings_) {
        ordered_json jf;
        jf["kind"] = finding_kind_name(f.kind);
        jf["description"] = f.description;
        jf["prov"] = f.prov;
        findings.push_back(std::move(jf));
    }
    doc["findings"] = std::move(findings);

    ordered_json timeline = ordered_json::array();
    for (const TimelineEntry& t : timeline_) {
        ordered_json jt;
        jt["ts"] = t.ts;
        if (t.usec != 0) jt["usec"] = t.usec;
        jt["naive"] = t.naive;
        jt["source"] = source_kind_name(t.source);
        jt["path"] = t.path;
        if (t.locator >= 0) jt["locator"] = t.locator;
        jt["description"] = t.description;
        jt["prov"] = t.prov;
        timeline.push_back(std::move(jt));
    }
    doc["timeline"] = std::move(timeline);

    ordered_json provs = ordered_json::array();
    for (const Provenance& p : provenances_) {
        ordered_json jp;
        jp["source"] = source_kind_name(p.kind);
        jp["path"] = p.path;
        if (p.locator >= 0) jp["locator"] = p.locator;
        provs.push_back(std::move(jp));
    }
    doc["provenances"] = std::move(provs);
    doc["warnings"] = warnings_;
    return doc;
}

Result<EvidenceGraph> EvidenceGraph::from_json(const json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != "btsf-graph-1")
        return make_error(Errc::not_parseable, "not a btsf-graph-1 document");
    EvidenceGraph g;
    g.finalized_ = true;
    try {
        for (const auto& jp : doc.at("provenances")) {
            Provenance p;
            auto kind = source_kind_of(jp.at("source").get<std::string>());
            if (!kind) return make_error(Errc::not_parseable, "unknown provenance source");
            p.kind = *kind;
            p.path = jp.at("path").get<std::string>();
            p.locator = jp.value("locator", -1);
            g.provenances_.push_back(p);
        }
        for (const auto& jn : doc.at("nodes")) {
            auto kind = node_kind_of(jn.at("kind").get<std::string>());
            if (!kind) return make_error(Errc::not_parseable, "unknown node kind");
            std::size_t idx = g.add_node(*kind);
            if (jn.contains("owner")) g.nodes_[idx].owner = jn["owner"].get<std::size_t>();
            for (const auto& [name, values] : jn.at("attrs").items()) {
                for (const auto& jv : values) {
                    AttrValue v;
                    v.value = jv.at("value").get<std::string>();
                    for (const auto& p : jv.at("prov")) v.prov.push_back(p.get<std::size_t>());
                    g.nodes_[idx].attrs[name].push_back(std::move(v));
                }
            }
        }
        for (const auto& je : doc.at("edges")) {
            Edge e;
            auto type = edge_type_of(je.at("type").get<std::string>());
            if (!type) return make_error(Errc::not_parseable, "unknown edge type");
            e.type = *type;
            e.from = je.at("from").get<std::size_t>();
            e.to = je.at("to").get<std::size_t>();
            if (je.contains("ts")) {
                e.ts = je["ts"].get<std::int64_t>();
                e.ts_naive = je.value("ts_naive", false);
            }
            if (je.contains("attrs"))
                for (const auto& [k, v] : je["attrs"].items()) e.attrs[k] = v.get<std::string>();
            for (const auto& p : je.at("prov")) e.prov.push_back(p.get<std::size_t>());
            if (e.from >= g.nodes_.size() || e.to >= g.nodes_.size())
                return make_error(Errc::not_parseable, "edge references missing node");
            g.edges_.push_back(std::move(e));
        }
        for (const auto& jf : doc.at("findings")) {
            Finding f;
            auto kind = finding_kind_of(jf.at("kind").get<std::string>());
            if (!kind) return make_error(Errc::not_parseable, "unknown finding kind");
            f.kind = *kind;
            f.description = jf.at("description").get<std::string>();
            for (const auto& p : jf.at("prov")) f.prov.push_back(p.get<std::size_t>());
            g.findings_.push_back(std::move(f));
        }
        for (const auto& jt : doc.at("timeline")) {
            TimelineEntry t;
            t.ts = jt.at("ts").get<std::int64_t>();
            t.usec = jt.value("usec", 0);
            t.naive = jt.at("naive").get<bool>();
            auto source = source_kind_of(jt.at("source").get<std::string>());
            if (!source) return make_error(Errc::not_parseable, "unknown timeline source");
            t.source = *source;
            t.path = jt.at("path").get<std::string>();
            t.locator = jt.value("locator", -1);
            t.description = jt.at("description").get<std::string>();
            for (const auto& p : jt.at("prov")) t.prov.push_back(p.get<std::size_t>());
            g.timeline_.push_back(std::move(t));
        }
        if (doc.contains("warnings"))
            for (const auto& w : doc["warnings"]) g.warnings_.push_back(w.get<std::string>());
    } catch (const json::exception& e) {
        return make_error(Errc::not_parseable, std::string("graph document: ") + e.what());
    }
    return g;
}

} // namespace btsf::correlate
