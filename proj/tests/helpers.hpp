#pragma once

#include <random>
#include <string>

#include "metrocover/ingest.hpp"
#include "metrocover/milp_backend.hpp"
#include "metrocover/network.hpp"

namespace testutil {

inline std::string source_dir() { return METROCOVER_SOURCE_DIR; }

inline metrocover::Network load_fixture(const std::string& name) {
    return metrocover::build_network(
        metrocover::load_network_file(source_dir() + "/fixtures/" + name));
}

inline metrocover::SolverConfig test_solver(const std::string& engine = "glpk") {
    metrocover::SolverConfig config;
    config.command_template =
        "python3 " + source_dir() + "/tools/solve_lp.py --engine " + engine +
        " {model} {solution}";
    config.time_limit_s = 120.0;
    return config;
}

// Random connected-ish multigraph built from undirected segments, in the
// shape the file format produces: <= 8 stations, <= 4 lines, <= 14 arcs.
inline metrocover::NetworkSpec random_spec(std::uint32_t seed) {
    std::mt19937 rng(seed);
    auto pick = [&rng](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    metrocover::NetworkSpec spec;
    int stations = pick(2, 8);
    for (int i = 0; i < stations; ++i)
        spec.stations.push_back({"S" + std::to_string(i + 1), std::nullopt, 0});
    int lines = pick(1, 4);
    for (int i = 0; i < lines; ++i)
        spec.lines.push_back({"L" + std::to_string(i + 1), 0});

    int segments = pick(1, 7);  // two arcs each
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (int i = 0; i < segments; ++i) {
        for (int attempt = 0; attempt < 20; ++attempt) {
            int a = pick(0, stations - 1), b = pick(0, stations - 1);
            if (a == b)
                continue;
            if (a > b)
                std::swap(a, b);
            std::string line = "L" + std::to_string(pick(1, lines));
            auto key = std::make_tuple(line, spec.stations[a].name, spec.stations[b].name);
            if (!seen.insert(key).second)
                continue;
            spec.segments.push_back(
                {line, spec.stations[a].name, spec.stations[b].name, false, 0});
            break;
        }
    }
    // drop line declarations that never got a segment; the variant needs
    // every required line to own at least one arc
    std::set<std::string> used;
    for (const auto& s : spec.segments)
        used.insert(s.line);
    std::erase_if(spec.lines,
                  [&used](const metrocover::LineDecl& l) { return !used.count(l.id); });
    // station declarations with no incident segment stay: build keeps them as
    // isolated vertices, which the solvers must tolerate
    return spec;
}

}  // namespace testutil
