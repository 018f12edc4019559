#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metrocover/formulation.hpp"
#include "metrocover/milp_backend.hpp"
#include "metrocover/network.hpp"
#include "metrocover/oracle.hpp"

namespace metrocover {

enum class Backend { oracle, milp };

std::string to_string(Backend backend);

struct SolveReport {
    VariantConfig variant;
    Backend backend = Backend::oracle;
    std::int64_t objective = 0;
    Journey journey;
    std::vector<int> arcset;  // network arc indexes, sorted, with multiplicity
    double solve_seconds = 0.0;
    std::optional<int> enumeration_index;
};

// Orders an Eulerian-balanced arc multiset into a walk. Walk endpoints come
// from the degree surplus; a balanced (closed) multiset starts at the
// anchor when given, else at its smallest station. When stitching, an arc
// continuing the incoming line is preferred, so contiguous-line solutions
// reconstruct with their runs intact. Throws std::invalid_argument for
// unbalanced or disconnected multisets (a violated model).
Journey reconstruct_walk(const std::vector<int>& arc_multiset, const Network& network,
                         Shape shape, const std::optional<StationId>& anchor = std::nullopt);

struct ValidationReport {
    std::vector<std::string> failures;
    std::vector<LineId> covered;  // required lines seen, sorted
    bool ok() const { return failures.empty(); }
};

// Checks a journey against the network and variant: arcs exist with the
// right direction, steps chain, required lines are covered, station/line
// reuse restrictions hold, cycles close. Station names are resolved through
// corridor merges first.
ValidationReport validate_journey(const Journey& journey, const Network& network,
                                  const VariantConfig& variant);

struct EnumerateLimits {
    int max_solutions = 100000;
    double max_seconds = 1e18;
    OracleLimits oracle;
};

struct EnumerationOutcome {
    std::vector<SolveReport> reports;
    bool truncated = false;      // a limit stopped the loop early
    std::string stop_reason;     // "exhausted", "objective", "limit", ...
};

// Finds every optimal solution: solve, record, cut the arc set away, repeat
// until the objective degrades or the model empties. The MILP path drives
// the external solver with no-good cuts; the oracle path asks the
// enumerator directly. Cycle variants run once per anchor candidate and
// deduplicate at arc-set level.
EnumerationOutcome enumerate_solutions(const Network& network, const VariantConfig& variant,
                                       Backend backend, const SolverConfig& solver,
                                       const EnumerateLimits& limits = {});

// Single best solution through the chosen backend.
SolveReport solve_variant(const Network& network, const VariantConfig& variant, Backend backend,
                          const SolverConfig& solver, const OracleLimits& oracle_limits = {});

class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Aligned step table, one row per step, numbered from 1.
std::string export_table(const Journey& journey);

// One step per line: index, departure, arrival, line, tab-separated.
std::string export_tsv(const Journey& journey);

// Parses the tab-separated journey format back (ignores '#' comments and a
// leading header row).
Journey parse_journey_tsv(const std::string& text);

// GeoJSON feature collection: one LineString per step plus Points for the
// endpoints. Throws std::invalid_argument naming stations without
// coordinates.
std::string export_geojson(const Journey& journey, const Network& network);

}  // namespace metrocover
