#include "metrocover/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace metrocover {

ParseError::ParseError(const std::string& message, int line_no)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + message),
      line_no_(line_no) {}

namespace {

// Splits one directive line into tokens; double quotes group tokens with
// spaces. A '#' outside quotes starts a comment.
std::vector<std::string> tokenize(const std::string& line, int line_no) {
    std::vector<std::string> tokens;
    std::string cur;
    bool in_quotes = false, have_cur = false;
    for (char c : line) {
        if (in_quotes) {
            if (c == '"') {
                in_quotes = false;
            } else {
                cur += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            have_cur = true;
        } else if (c == '#') {
            break;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            if (have_cur || !cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
                have_cur = false;
            }
        } else {
            cur += c;
        }
    }
    if (in_quotes)
        throw ParseError("unterminated quote", line_no);
    if (have_cur || !cur.empty())
        tokens.push_back(cur);
    return tokens;
}

double parse_coordinate(const std::string& token, int line_no) {
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ParseError("malformed coordinate '" + token + "'", line_no);
    }
    if (used != token.size() || !std::isfinite(value))
        throw ParseError("malformed coordinate '" + token + "'", line_no);
    return value;
}

std::string quoted(const std::string& name) {
    if (name.find(' ') != std::string::npos || name.find('\t') != std::string::npos ||
        name.find('#') != std::string::npos || name.find('"') != std::string::npos)
        return "\"" + name + "\"";
    return name;
}

}  // namespace

NetworkSpec parse_network_file(const std::string& text) {
    NetworkSpec spec;
    std::set<std::string> stations, lines;
    std::set<std::tuple<LineId, std::string, std::string, bool>> seen_segments;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == '\n'))
            trimmed.pop_back();
        if (header && trimmed.rfind("#", 0) == 0) {
            std::string note = trimmed.substr(1);
            while (!note.empty() && note.front() == ' ')
                note.erase(note.begin());
            if (!note.empty())
                spec.source_notes.push_back(note);
            if (spec.dataset_name.empty() && !note.empty())
                spec.dataset_name = note;
            continue;
        }
        std::vector<std::string> tok = tokenize(trimmed, line_no);
        if (tok.empty())
            continue;
        header = false;
        const std::string& directive = tok[0];

        if (directive == "station") {
            if (tok.size() != 2 && tok.size() != 4)
                throw ParseError("station expects <name> [<lat> <lon>]", line_no);
            if (tok[1].empty())
                throw ParseError("empty station name", line_no);
            if (!stations.insert(tok[1]).second)
                throw ParseError("duplicate station '" + tok[1] + "'", line_no);
            StationDecl d{tok[1], std::nullopt, line_no};
            if (tok.size() == 4)
                d.position = GeoPoint{parse_coordinate(tok[2], line_no),
                                      parse_coordinate(tok[3], line_no)};
            spec.stations.push_back(std::move(d));
        } else if (directive == "line") {
            if (tok.size() != 2)
                throw ParseError("line expects <line_id>", line_no);
            if (tok[1].empty())
                throw ParseError("empty line id", line_no);
            if (!lines.insert(tok[1]).second)
                throw ParseError("duplicate line '" + tok[1] + "'", line_no);
            spec.lines.push_back(LineDecl{tok[1], line_no});
        } else if (directive == "segment") {
            if (tok.size() != 4 && tok.size() != 5)
                throw ParseError("segment expects <line_id> <station_a> <station_b> [oneway]",
                                 line_no);
            bool oneway = false;
            if (tok.size() == 5) {
                if (tok[4] != "oneway")
                    throw ParseError("unexpected token '" + tok[4] + "' (expected 'oneway')",
                                     line_no);
                oneway = true;
            }
            if (!lines.count(tok[1]))
                throw ParseError("segment references undeclared line '" + tok[1] + "'", line_no);
            for (int i : {2, 3})
                if (!stations.count(tok[i]))
                    throw ParseError("segment references undeclared station '" + tok[i] + "'",
                                     line_no);
            if (tok[2] == tok[3])
                throw ParseError("segment endpoints are equal: '" + tok[2] + "'", line_no);
            // duplicate check: an undirected segment owns both directions
            auto key_ab = std::make_tuple(tok[1], tok[2], tok[3], true);
            auto key_ba = std::make_tuple(tok[1], tok[3], tok[2], true);
            bool dup = oneway ? seen_segments.count(key_ab) > 0
                              : seen_segments.count(key_ab) > 0 || seen_segments.count(key_ba) > 0;
            if (dup)
                throw ParseError("duplicate segment on line '" + tok[1] + "' between '" + tok[2] +
                                     "' and '" + tok[3] + "'",
                                 line_no);
            seen_segments.insert(key_ab);
            if (!oneway)
                seen_segments.insert(key_ba);
            spec.segments.push_back(SegmentDecl{tok[1], tok[2], tok[3], oneway, line_no});
        } else if (directive == "corridor") {
            if (tok.size() != 3)
                throw ParseError("corridor expects <station_a> <station_b>", line_no);
            for (int i : {1, 2})
                if (!stations.count(tok[i]))
                    throw ParseError("corridor references undeclared station '" + tok[i] + "'",
                                     line_no);
            if (tok[1] == tok[2])
                throw ParseError("corridor endpoints are equal: '" + tok[1] + "'", line_no);
            spec.corridors.push_back(CorridorDecl{tok[1], tok[2], line_no});
        } else {
            throw ParseError("unknown directive '" + directive + "'", line_no);
        }
    }
    return spec;
}

NetworkSpec load_network_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open network file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_network_file(buf.str());
}

std::vector<Diagnostic> validate_spec(const NetworkSpec& spec) {
    std::vector<Diagnostic> out;
    auto error = [&out](std::string msg, int line_no) {
        out.push_back({Diagnostic::Severity::error, std::move(msg), line_no});
    };
    auto warning = [&out](std::string msg, int line_no) {
        out.push_back({Diagnostic::Severity::warning, std::move(msg), line_no});
    };

    std::set<std::string> stations, lines;
    for (const auto& s : spec.stations) {
        if (s.name.empty())
            error("empty station name", s.line_no);
        else if (!stations.insert(s.name).second)
            error("duplicate station '" + s.name + "'", s.line_no);
    }
    for (const auto& l : spec.lines) {
        if (l.id.empty())
            error("empty line id", l.line_no);
        else if (!lines.insert(l.id).second)
            error("duplicate line '" + l.id + "'", l.line_no);
    }

    std::set<std::tuple<LineId, std::string, std::string>> seen_directions;
    std::set<std::string> used_stations;
    std::set<LineId> used_lines;
    for (const auto& seg : spec.segments) {
        if (!lines.count(seg.line))
            error("segment references undeclared line '" + seg.line + "'", seg.line_no);
        for (const auto* endpoint : {&seg.a, &seg.b})
            if (!stations.count(*endpoint))
                error("segment references undeclared station '" + *endpoint + "'", seg.line_no);
        if (seg.a == seg.b) {
            error("segment endpoints are equal: '" + seg.a + "'", seg.line_no);
            continue;
        }
        used_lines.insert(seg.line);
        used_stations.insert(seg.a);
        used_stations.insert(seg.b);
        bool dup = !seen_directions.insert({seg.line, seg.a, seg.b}).second;
        if (!seg.oneway)
            dup = !seen_directions.insert({seg.line, seg.b, seg.a}).second || dup;
        if (dup)
            error("duplicate segment on line '" + seg.line + "' between '" + seg.a + "' and '" +
                      seg.b + "'",
                  seg.line_no);
    }
    for (const auto& c : spec.corridors) {
        for (const auto* endpoint : {&c.a, &c.b})
            if (!stations.count(*endpoint))
                error("corridor references undeclared station '" + *endpoint + "'", c.line_no);
        if (c.a == c.b)
            error("corridor endpoints are equal: '" + c.a + "'", c.line_no);
        used_stations.insert(c.a);
        used_stations.insert(c.b);
    }

    for (const auto& l : spec.lines)
        if (!used_lines.count(l.id))
            warning("line '" + l.id + "' has no segments", l.line_no);
    for (const auto& s : spec.stations)
        if (!used_stations.count(s.name))
            warning("station '" + s.name + "' has no segments and no corridors", s.line_no);
    return out;
}

Network build_network(const NetworkSpec& spec) {
    for (const auto& d : validate_spec(spec))
        if (d.severity == Diagnostic::Severity::error)
            throw ParseError(d.message, d.line_no);

    std::vector<StationId> declared;
    declared.reserve(spec.stations.size());
    for (const auto& s : spec.stations)
        declared.push_back(s.name);

    std::vector<std::pair<StationId, StationId>> corridor_pairs;
    corridor_pairs.reserve(spec.corridors.size());
    for (const auto& c : spec.corridors)
        corridor_pairs.emplace_back(c.a, c.b);

    std::map<StationId, StationId> canon = merge_corridors(declared, corridor_pairs);

    std::set<StationId> station_set;
    std::map<StationId, std::set<StationId>> merged;
    for (const auto& s : declared) {
        station_set.insert(canon[s]);
        if (canon[s] != s) {
            merged[canon[s]].insert(s);
            merged[canon[s]].insert(canon[s]);
        }
    }

    // canonical coordinates: the canonical member's own, else the first
    // merged member (name order) that has any
    std::map<StationId, GeoPoint> coords;
    std::map<StationId, GeoPoint> declared_coords;
    for (const auto& s : spec.stations)
        if (s.position)
            declared_coords[s.name] = *s.position;
    for (const auto& s : station_set) {
        auto it = declared_coords.find(s);
        if (it != declared_coords.end()) {
            coords[s] = it->second;
            continue;
        }
        auto mit = merged.find(s);
        if (mit == merged.end())
            continue;
        for (const auto& member : mit->second) {
            auto dit = declared_coords.find(member);
            if (dit != declared_coords.end()) {
                coords[s] = dit->second;
                break;
            }
        }
    }

    // expand segments; arcs made self-loops by contraction are dropped
    std::vector<Arc> arcs;
    std::set<std::tuple<StationId, StationId, LineId>> identities;
    auto add_arc = [&](const StationId& from, const StationId& to, const LineId& line,
                       int line_no) {
        if (from == to)
            return;  // contracted into one node; riding it is pointless
        if (!identities.insert({from, to, line}).second)
            throw ParseError("duplicate arc identity after corridor contraction: '" + from +
                                 "' -> '" + to + "' on line '" + line + "'",
                             line_no);
        arcs.push_back(Arc{from, to, line, 0});
    };
    for (const auto& seg : spec.segments) {
        const StationId& a = canon[seg.a];
        const StationId& b = canon[seg.b];
        add_arc(a, b, seg.line, seg.line_no);
        if (!seg.oneway)
            add_arc(b, a, seg.line, seg.line_no);
    }

    std::set<LineId> segment_lines, used_lines;
    for (const auto& seg : spec.segments)
        segment_lines.insert(seg.line);
    for (const Arc& a : arcs)
        used_lines.insert(a.line);
    for (const auto& l : segment_lines)
        if (!used_lines.count(l))
            throw ParseError("line '" + l + "' lost every arc to corridor contraction", 0);
    std::vector<LineId> lines;
    for (const auto& l : spec.lines)
        if (used_lines.count(l.id))
            lines.push_back(l.id);

    return Network(std::vector<StationId>(station_set.begin(), station_set.end()),
                   std::move(lines), std::move(arcs), std::move(merged), std::move(coords));
}

std::string canonical_serialize(const Network& network) {
    std::ostringstream out;
    out.precision(9);

    // every original name is re-declared so corridor provenance round-trips
    std::set<StationId> all_names;
    for (const auto& s : network.stations())
        all_names.insert(s);
    for (const auto& [canonical, members] : network.merged_names())
        all_names.insert(members.begin(), members.end());

    for (const auto& name : all_names) {
        out << "station " << quoted(name);
        auto it = network.coordinates().find(name);
        if (it != network.coordinates().end())
            out << " " << it->second.lat << " " << it->second.lon;
        out << "\n";
    }
    for (const auto& line : network.lines())
        out << "line " << quoted(line) << "\n";

    using SegmentRow = std::tuple<LineId, StationId, StationId, bool>;
    std::vector<SegmentRow> rows;
    std::set<std::tuple<StationId, StationId, LineId, int>> paired;
    const auto& arcs = network.arcs();
    for (const Arc& arc : arcs) {
        if (paired.count({arc.from, arc.to, arc.line, arc.arc_index}))
            continue;
        // pair antiparallel twins (same line) into one undirected segment
        auto twin = std::make_tuple(arc.to, arc.from, arc.line, 0);
        bool undirected = false;
        for (int k = 0;; ++k) {
            std::get<3>(twin) = k;
            if (paired.count(twin))
                continue;
            undirected = std::binary_search(
                arcs.begin(), arcs.end(),
                Arc{arc.to, arc.from, arc.line, k});
            break;
        }
        if (undirected) {
            paired.insert(twin);
            StationId a = std::min(arc.from, arc.to), b = std::max(arc.from, arc.to);
            rows.emplace_back(arc.line, a, b, false);
        } else {
            rows.emplace_back(arc.line, arc.from, arc.to, true);
        }
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [line, a, b, oneway] : rows) {
        out << "segment " << quoted(line) << " " << quoted(a) << " " << quoted(b);
        if (oneway)
            out << " oneway";
        out << "\n";
    }

    for (const auto& [canonical, members] : network.merged_names())
        for (const auto& member : members)
            if (member != canonical)
                out << "corridor " << quoted(canonical) << " " << quoted(member) << "\n";
    return out.str();
}

}  // namespace metrocover
