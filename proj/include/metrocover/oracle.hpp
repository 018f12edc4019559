#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "metrocover/formulation.hpp"
#include "metrocover/network.hpp"

namespace metrocover {

struct OracleLimits {
    std::uint64_t memory_budget_bytes = 2ull << 30;
    std::uint64_t node_budget = 20'000'000;  // DFS / branch-and-bound nodes
};

class OracleBudgetError : public std::runtime_error {
public:
    OracleBudgetError(const std::string& what, std::uint64_t required_bytes)
        : std::runtime_error(what), required_bytes(required_bytes) {}
    std::uint64_t required_bytes;
};

struct CoverSearchResult {
    bool feasible = false;
    std::int64_t length = -1;
    Journey journey;
};

// Shortest walk using at least one arc of every required line, endpoints
// free. Layered breadth-first search over (station, covered subset) states;
// ties broken by station then line name so the journey is deterministic.
CoverSearchResult shortest_cover_walk(const Network& network,
                                      const std::vector<LineId>& required,
                                      const OracleLimits& limits = {});

// Shortest closed walk covering the required lines. Without an explicit
// anchor, tries every incident vertex of the required line with the fewest
// incident vertices and returns the best.
CoverSearchResult shortest_cover_cycle(const Network& network,
                                       const std::vector<LineId>& required,
                                       const OracleLimits& limits = {},
                                       const std::optional<StationId>& anchor = std::nullopt);

struct PathSearchResult {
    bool feasible = false;
    bool proven = true;  // false when the node budget ran out first
    std::int64_t length = -1;
    Journey journey;
};

// Optimal cover that visits no station twice, by depth-first branch and
// bound (lower bound: number of uncovered lines). Desk-scale instances.
PathSearchResult shortest_cover_path(const Network& network,
                                     const std::vector<LineId>& required,
                                     const OracleLimits& limits = {});

struct EnumerationResult {
    std::vector<std::vector<int>> arcsets;  // sorted network arc index sets
    std::int64_t objective = -1;
    bool complete = true;
    bool feasible = false;
};

// All distinct optimal arc sets for the variant, by depth-first traversal of
// optimal-trajectory continuations (guided by a distance-to-go table built
// on the reversed graph). Exhaustive on small instances within node_budget.
EnumerationResult enumerate_optimal_arcsets(const Network& network, const VariantConfig& variant,
                                            const OracleLimits& limits = {});

// Dispatches a variant to the matching search above and reports the optimal
// journey; restricted variants run through the enumerator.
struct OracleSolveResult {
    bool feasible = false;
    bool proven = true;
    std::int64_t objective = -1;
    Journey journey;
    std::vector<int> arcset;
};

OracleSolveResult oracle_solve(const Network& network, const VariantConfig& variant,
                               const OracleLimits& limits = {});

// True when the run-length compression of the step lines has each required
// line in exactly one run (cyclic runs merged for closed journeys).
bool journey_has_unique_line_runs(const Journey& journey, const std::vector<LineId>& required,
                                  bool cyclic);

}  // namespace metrocover
