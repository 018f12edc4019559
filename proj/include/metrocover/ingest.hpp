#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metrocover/network.hpp"

namespace metrocover {

struct StationDecl {
    std::string name;
    std::optional<GeoPoint> position;
    int line_no = 0;
};

struct LineDecl {
    LineId id;
    int line_no = 0;
};

struct SegmentDecl {
    LineId line;
    std::string a;
    std::string b;
    bool oneway = false;  // oneway means a -> b only
    int line_no = 0;
};

struct CorridorDecl {
    std::string a;
    std::string b;
    int line_no = 0;
};

// Parsed network description. Source line numbers are kept for diagnostics.
struct NetworkSpec {
    std::string dataset_name;
    std::vector<std::string> source_notes;
    std::vector<StationDecl> stations;
    std::vector<LineDecl> lines;
    std::vector<SegmentDecl> segments;
    std::vector<CorridorDecl> corridors;
};

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    std::string message;
    int line_no = 0;  // 0 when not tied to a source line
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line_no);
    int line_no() const { return line_no_; }

private:
    int line_no_;
};

// Parses the line-oriented network file format:
//   station <name> [<lat> <lon>]
//   line <line_id>
//   segment <line_id> <station_a> <station_b> [oneway]
//   corridor <station_a> <station_b>
// Names with spaces are double-quoted; '#' starts a comment. Stations and
// lines must be declared before first use. Throws ParseError.
NetworkSpec parse_network_file(const std::string& text);

NetworkSpec load_network_file(const std::string& path);

// Empty result iff the spec satisfies every NetworkSpec invariant.
// Warnings (unused line, isolated station) never block building.
std::vector<Diagnostic> validate_spec(const NetworkSpec& spec);

// Builds the multigraph: expands undirected segments to antiparallel arc
// pairs, contracts corridors, drops arcs made self-loops by contraction.
// Throws ParseError listing the first validation error if the spec is bad.
Network build_network(const NetworkSpec& spec);

// Deterministic, byte-identical text for equal networks; parsing it back
// rebuilds an equal network (merged names become corridor declarations).
std::string canonical_serialize(const Network& network);

}  // namespace metrocover
