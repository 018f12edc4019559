#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace metrocover {

// Station and line identifiers are canonical names, unique per network.
using StationId = std::string;
using LineId = std::string;

// One directed, line-colored arc. arc_index disambiguates parallel arcs
// with the same endpoints and line (possible after corridor contraction).
struct Arc {
    StationId from;
    StationId to;
    LineId line;
    int arc_index = 0;

    friend bool operator==(const Arc&, const Arc&) = default;
    friend auto operator<=>(const Arc& a, const Arc& b) {
        return std::tie(a.from, a.to, a.line, a.arc_index) <=>
               std::tie(b.from, b.to, b.line, b.arc_index);
    }
};

struct JourneyStep {
    StationId departure;
    StationId arrival;
    LineId line;

    friend bool operator==(const JourneyStep&, const JourneyStep&) = default;
};

// Ordered sequence of steps; consecutive steps chain (arrival == next departure).
struct Journey {
    std::vector<JourneyStep> steps;

    std::size_t length() const { return steps.size(); }
    friend bool operator==(const Journey&, const Journey&) = default;
};

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Colored directed multigraph of a transit network. Immutable after build;
// adjacency indexes are computed once at construction.
class Network {
public:
    Network() = default;
    Network(std::vector<StationId> stations, std::vector<LineId> lines,
            std::vector<Arc> arcs,
            std::map<StationId, std::set<StationId>> merged_names = {},
            std::map<StationId, GeoPoint> coordinates = {});

    const std::vector<StationId>& stations() const { return stations_; }
    const std::vector<LineId>& lines() const { return lines_; }
    const std::vector<Arc>& arcs() const { return arcs_; }
    // canonical id -> original station names it absorbed (corridor provenance)
    const std::map<StationId, std::set<StationId>>& merged_names() const { return merged_names_; }
    const std::map<StationId, GeoPoint>& coordinates() const { return coordinates_; }

    int station_index(const StationId& s) const;  // -1 if absent
    int line_index(const LineId& l) const;        // -1 if absent
    // resolves an original (possibly merged-away) station name to its canonical id
    std::optional<StationId> resolve_station(const StationId& name) const;

    // arc indexes grouped by endpoint station index
    const std::vector<int>& out_arcs(int station) const { return out_arcs_[station]; }
    const std::vector<int>& in_arcs(int station) const { return in_arcs_[station]; }
    const std::vector<int>& line_arcs(int line) const { return line_arcs_[line]; }

    int arc_from(int arc) const { return arc_from_[arc]; }
    int arc_to(int arc) const { return arc_to_[arc]; }
    int arc_line(int arc) const { return arc_line_[arc]; }

    friend bool operator==(const Network& a, const Network& b) {
        return a.stations_ == b.stations_ && a.lines_ == b.lines_ &&
               a.arcs_ == b.arcs_ && a.merged_names_ == b.merged_names_ &&
               a.coordinates_ == b.coordinates_;
    }

private:
    std::vector<StationId> stations_;  // sorted
    std::vector<LineId> lines_;        // sorted
    std::vector<Arc> arcs_;            // sorted by (from, to, line, arc_index)
    std::map<StationId, std::set<StationId>> merged_names_;
    std::map<StationId, GeoPoint> coordinates_;

    std::vector<std::vector<int>> out_arcs_, in_arcs_, line_arcs_;
    std::vector<int> arc_from_, arc_to_, arc_line_;
    std::map<StationId, int> station_idx_;
    std::map<LineId, int> line_idx_;
};

// Contracts connected components of the corridor relation to one canonical
// station (the lexicographically smallest member). Returns the full map
// declared station -> canonical id (identity for unmerged stations).
std::map<StationId, StationId>
merge_corridors(const std::vector<StationId>& stations,
                const std::vector<std::pair<StationId, StationId>>& corridors);

struct PruneResult {
    Network network;
    std::set<StationId> removed;
};

// Recursively removes stations with a single distinct neighbor (over all arcs,
// ignoring direction), except where the removal would delete the last arc of a
// line. Deterministic: candidates are processed in name order, one at a time.
PruneResult prune_termini(const Network& network);

}  // namespace metrocover
