#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "btsf/correlate.hpp"

namespace btsf::report {

struct RenderOptions {
    // Offset to anchor naive log times to UTC, minutes east of UTC.
    // Unset: naive times render as-is, marked "(local, unanchored)".
    std::optional<int> tz_offset_minutes;
};

// Six-section case report plus findings and timeline. JSON is the single
// data path; the text rendering is a projection of it.
nlohmann::ordered_json render_json(const correlate::EvidenceGraph& graph,
                                   const RenderOptions& options = {});
std::string render_text(const correlate::EvidenceGraph& graph, const RenderOptions& options = {});

std::optional<int> parse_tz_offset(std::string_view text); // "+08:00" -> 480

} // namespace btsf::report
