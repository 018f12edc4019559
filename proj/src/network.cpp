#include "metrocover/network.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace metrocover {

Network::Network(std::vector<StationId> stations, std::vector<LineId> lines,
                 std::vector<Arc> arcs,
                 std::map<StationId, std::set<StationId>> merged_names,
                 std::map<StationId, GeoPoint> coordinates)
    : stations_(std::move(stations)),
      lines_(std::move(lines)),
      arcs_(std::move(arcs)),
      merged_names_(std::move(merged_names)),
      coordinates_(std::move(coordinates)) {
    std::sort(stations_.begin(), stations_.end());
    std::sort(lines_.begin(), lines_.end());
    std::sort(arcs_.begin(), arcs_.end());

    for (std::size_t i = 0; i < stations_.size(); ++i) {
        if (stations_[i].empty())
            throw std::invalid_argument("empty station name");
        if (i > 0 && stations_[i] == stations_[i - 1])
            throw std::invalid_argument("duplicate station: " + stations_[i]);
        station_idx_[stations_[i]] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < lines_.size(); ++i) {
        if (lines_[i].empty())
            throw std::invalid_argument("empty line id");
        if (i > 0 && lines_[i] == lines_[i - 1])
            throw std::invalid_argument("duplicate line: " + lines_[i]);
        line_idx_[lines_[i]] = static_cast<int>(i);
    }

    out_arcs_.resize(stations_.size());
    in_arcs_.resize(stations_.size());
    line_arcs_.resize(lines_.size());
    arc_from_.resize(arcs_.size());
    arc_to_.resize(arcs_.size());
    arc_line_.resize(arcs_.size());

    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        const Arc& a = arcs_[i];
        if (a.from == a.to)
            throw std::invalid_argument("self-loop arc at " + a.from);
        if (i > 0 && arcs_[i] == arcs_[i - 1])
            throw std::invalid_argument("duplicate arc " + a.from + " -> " + a.to +
                                        " on " + a.line);
        auto fi = station_idx_.find(a.from);
        auto ti = station_idx_.find(a.to);
        auto li = line_idx_.find(a.line);
        if (fi == station_idx_.end() || ti == station_idx_.end())
            throw std::invalid_argument("arc endpoint not declared: " + a.from + " -> " + a.to);
        if (li == line_idx_.end())
            throw std::invalid_argument("arc line not declared: " + a.line);
        arc_from_[i] = fi->second;
        arc_to_[i] = ti->second;
        arc_line_[i] = li->second;
        out_arcs_[fi->second].push_back(static_cast<int>(i));
        in_arcs_[ti->second].push_back(static_cast<int>(i));
        line_arcs_[li->second].push_back(static_cast<int>(i));
    }

    for (std::size_t l = 0; l < lines_.size(); ++l)
        if (line_arcs_[l].empty())
            throw std::invalid_argument("line without arcs: " + lines_[l]);
}

int Network::station_index(const StationId& s) const {
    auto it = station_idx_.find(s);
    return it == station_idx_.end() ? -1 : it->second;
}

int Network::line_index(const LineId& l) const {
    auto it = line_idx_.find(l);
    return it == line_idx_.end() ? -1 : it->second;
}

std::optional<StationId> Network::resolve_station(const StationId& name) const {
    if (station_idx_.count(name))
        return name;
    for (const auto& [canonical, members] : merged_names_)
        if (members.count(name))
            return canonical;
    return std::nullopt;
}

std::map<StationId, StationId>
merge_corridors(const std::vector<StationId>& stations,
                const std::vector<std::pair<StationId, StationId>>& corridors) {
    std::map<StationId, StationId> parent;
    for (const auto& s : stations)
        parent[s] = s;

    // union-find with path compression; the representative is made the
    // lexicographically smallest member at the end
    auto find = [&parent](StationId s) {
        while (parent[s] != s)
            s = parent[s] = parent[parent[s]];
        return s;
    };

    for (const auto& [a, b] : corridors) {
        if (!parent.count(a))
            throw std::invalid_argument("corridor references unknown station: " + a);
        if (!parent.count(b))
            throw std::invalid_argument("corridor references unknown station: " + b);
        StationId ra = find(a), rb = find(b);
        if (ra != rb)
            parent[std::max(ra, rb)] = std::min(ra, rb);
    }

    std::map<StationId, StationId> result;
    for (const auto& s : stations)
        result[s] = find(s);
    return result;
}

PruneResult prune_termini(const Network& network) {
    const int nv = static_cast<int>(network.stations().size());
    const int na = static_cast<int>(network.arcs().size());

    std::vector<bool> station_alive(nv, true), arc_alive(na, true);
    // undirected neighbour multiplicity per station
    std::vector<std::map<int, int>> nbr(nv);
    // arc count per line, and per (station, line)
    std::vector<int> line_count(network.lines().size(), 0);
    std::vector<std::map<int, int>> incident(nv);

    for (int a = 0; a < na; ++a) {
        int u = network.arc_from(a), v = network.arc_to(a), l = network.arc_line(a);
        ++nbr[u][v];
        ++nbr[v][u];
        ++line_count[l];
        ++incident[u][l];
        ++incident[v][l];
    }

    std::set<StationId> removed;
    for (;;) {
        int victim = -1;
        for (int s = 0; s < nv; ++s) {  // stations are sorted: name order, deterministic
            if (!station_alive[s] || nbr[s].size() != 1)
                continue;
            bool kills_line = false;
            for (const auto& [line, n] : incident[s])
                if (n == line_count[line])
                    kills_line = true;
            if (!kills_line) {
                victim = s;
                break;
            }
        }
        if (victim < 0)
            break;

        removed.insert(network.stations()[victim]);
        station_alive[victim] = false;
        for (int a = 0; a < na; ++a) {
            if (!arc_alive[a])
                continue;
            int u = network.arc_from(a), v = network.arc_to(a), l = network.arc_line(a);
            if (u != victim && v != victim)
                continue;
            arc_alive[a] = false;
            --line_count[l];
            if (--incident[u][l] == 0) incident[u].erase(l);
            if (--incident[v][l] == 0) incident[v].erase(l);
            if (--nbr[u][v] == 0) nbr[u].erase(v);
            if (--nbr[v][u] == 0) nbr[v].erase(u);
        }
        nbr[victim].clear();
    }

    std::vector<StationId> stations;
    for (int s = 0; s < nv; ++s)
        if (station_alive[s])
            stations.push_back(network.stations()[s]);
    std::vector<Arc> arcs;
    for (int a = 0; a < na; ++a)
        if (arc_alive[a])
            arcs.push_back(network.arcs()[a]);

    std::set<LineId> used_lines;
    for (const Arc& a : arcs)
        used_lines.insert(a.line);
    std::vector<LineId> lines(used_lines.begin(), used_lines.end());

    std::map<StationId, std::set<StationId>> merged;
    for (const auto& [canonical, members] : network.merged_names())
        if (!removed.count(canonical))
            merged[canonical] = members;
    std::map<StationId, GeoPoint> coords;
    for (const auto& [s, p] : network.coordinates())
        if (!removed.count(s))
            coords[s] = p;

    return PruneResult{Network(std::move(stations), std::move(lines), std::move(arcs),
                               std::move(merged), std::move(coords)),
                       std::move(removed)};
}

}  // namespace metrocover
