#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "btsf/logparse.hpp"
#include "btsf/metadata.hpp"
#include "btsf/netdissect.hpp"

namespace btsf::correlate {

enum class SourceKind {
    settings_dat,
    sync_dat,
    history_dat,
    identity_dat,
    info_dat,
    id_file,
    tree_scan,
    sync_log,
    capture,
    external_hint,
};

const char* source_kind_name(SourceKind k);
std::optional<SourceKind> source_kind_of(std::string_view name);

// Citation for every extracted fact: which evidence file, and where in it
// (line number, packet index, entry id; -1 when not applicable).
struct Provenance {
    SourceKind kind = SourceKind::external_hint;
    std::string path;
    std::int64_t locator = -1;

    auto operator<=>(const Provenance&) const = default;
};

enum class NodeKind { identity, device, folder, share, file, endpoint };
const char* node_kind_name(NodeKind k);

struct AttrValue {
    std::string value;
    std::vector<std::size_t> prov;
};

struct Node {
    NodeKind kind = NodeKind::device;
    // Attribute values never overwrite each other; conflicting values are
    // all retained and surface as Conflict findings.
    std::map<std::string, std::vector<AttrValue>> attrs;
    std::optional<std::size_t> owner; // file nodes: owning folder

    const std::string* attr(std::string_view name) const;
    bool has_attr_value(std::string_view name, std::string_view value) const;
};

enum class EdgeType {
    identity_owns_device,
    device_has_folder,
    folder_has_share,
    device_seen_at_endpoint,
    file_in_folder,
    request_for_folder,
    device_announces_share,
    share_at_endpoint,
    identity_linked_folder,
};

const char* edge_type_name(EdgeType t);

struct Edge {
    EdgeType type;
    std::size_t from = 0;
    std::size_t to = 0;
    std::optional<std::int64_t> ts;
    bool ts_naive = false;
    std::map<std::string, std::string> attrs;
    std::vector<std::size_t> prov;
};

enum class FindingKind { link, conflict, gap };
const char* finding_kind_name(FindingKind k);

struct Finding {
    FindingKind kind = FindingKind::link;
    std::string description;
    std::vector<std::size_t> prov;
};

struct TimelineEntry {
    std::int64_t ts = 0;    // epoch seconds; naive times ordered as if UTC
    std::int32_t usec = 0;
    bool naive = false;
    SourceKind source = SourceKind::external_hint;
    std::string path;
    std::int64_t locator = -1;
    std::string description;
    std::vector<std::size_t> prov;
};

struct MetadataBundle {
    std::optional<metadata::SettingsRecord> settings;
    std::string settings_path;
    std::optional<metadata::SyncDatRecord> sync;
    std::string sync_path;
    std::vector<metadata::HistoryEntry> history;
    std::string history_path;
    std::vector<metadata::IdentityRecord> identities; // identity.dat / identities dir
    std::vector<std::string> identity_paths;          // parallel to identities
    std::optional<metadata::FolderRecord> info;
    std::string info_path;
    bool superseded = false; // .OLD sources
};

class EvidenceGraph {
public:
    explicit EvidenceGraph(netdissect::EndpointRegistry registry =
                               netdissect::EndpointRegistry::builtin());

    std::size_t provenance(SourceKind kind, std::string path, std::int64_t locator = -1);

    // upserts merge through strong keys only; weak resolution happens in
    // finalize() so ingestion order cannot change the outcome
    std::size_t upsert_device_by_hex(std::string hex, std::size_t prov);
    std::size_t upsert_device_by_b32(std::string b32, std::size_t prov);
    std::size_t upsert_device_by_name(std::string name, std::size_t prov);
    std::size_t upsert_local_device(std::size_t prov);
    std::size_t upsert_identity(std::string name, std::optional<std::string> fingerprint,
                                std::size_t prov);
    std::size_t upsert_folder_by_id(std::int64_t id, std::size_t prov);
    std::size_t upsert_folder_by_path(std::string raw_path, std::size_t prov);
    std::size_t upsert_folder_by_tree_path(std::string rel_path, std::size_t prov);
    std::size_t upsert_share(std::string hex, std::size_t prov);
    std::size_t upsert_endpoint(const NetAddr& addr, std::size_t prov);
    std::size_t add_file(std::size_t folder, std::string name, bool deleted, std::size_t prov);

    void set_attr(std::size_t node, std::string name, std::string value, std::size_t prov);
    std::size_t add_edge(EdgeType type, std::size_t from, std::size_t to, std::size_t prov,
                         std::optional<std::int64_t> ts = std::nullopt, bool ts_naive = false);
    void set_edge_attr(std::size_t edge, std::string name, std::string value);
    void add_finding(FindingKind kind, std::string description, std::vector<std::size_t> prov);
    void add_timeline(TimelineEntry entry);
    void add_warning(std::string message);

    void note_db_file_seen() { db_file_seen_ = true; }

    // Weak unification, consistency checks, conflict/gap findings, edge
    // dedup, timeline ordering. Must run once, after all ingestion.
    void finalize();
    bool finalized() const { return finalized_; }

    nlohmann::ordered_json to_json() const;
    static Result<EvidenceGraph> from_json(const nlohmann::json& doc);

    // canonical reference string, e.g. "device:0a1b..." (stable across
    // ingestion orders)
    std::string node_key(std::size_t node) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Finding>& findings() const { return findings_; }
    const std::vector<TimelineEntry>& timeline() const { return timeline_; }
    const std::vector<Provenance>& provenances() const { return provenances_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    const netdissect::EndpointRegistry& registry() const { return registry_; }

    std::size_t canonical(std::size_t node) const;

private:
    std::size_t find_by_attr(NodeKind kind, std::string_view attr, std::string_view value) const;
    std::size_t add_node(NodeKind kind);
    void unify(std::size_t a, std::size_t b);
    void compact();

    netdissect::EndpointRegistry registry_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> parent_; // union-find over nodes_
    std::vector<Edge> edges_;
    std::vector<Finding> findings_;
    std::vector<TimelineEntry> timeline_;
    std::vector<Provenance> provenances_;
    std::map<Provenance, std::size_t> prov_index_;
    std::vector<std::string> warnings_;
    bool finalized_ = false;
    bool db_file_seen_ = false;
};

void ingest_metadata(EvidenceGraph& graph, const MetadataBundle& bundle);
void ingest_tree(EvidenceGraph& graph, const metadata::TreeScan& scan,
                 const std::string& tree_path);
void ingest_log(EvidenceGraph& graph, const std::vector<logparse::LogEvent>& events,
                const std::string& log_path);
void ingest_capture(EvidenceGraph& graph, const netdissect::Extraction& extraction,
                    const std::string& capture_path);
Result<bool> ingest_hints(EvidenceGraph& graph, const nlohmann::json& hints,
                          const std::string& hints_path);

// Case directory convention: dats/, logs/, tree/, captures/, hints.json.
Result<EvidenceGraph> correlate_case(const std::filesystem::path& case_dir,
                                     const netdissect::EndpointRegistry& registry);

std::string normalize_path(std::string_view raw);
std::string path_basename(std::string_view normalized);
std::string raw_basename(std::string_view raw);

} // namespace btsf::correlate
