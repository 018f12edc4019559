#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "metrocover/oracle.hpp"

using namespace metrocover;

TEST_CASE("shortest cover walk on the fixtures") {
    SUBCASE("two-line path needs two steps") {
        Network net = testutil::load_fixture("path2.txt");
        CoverSearchResult r = shortest_cover_walk(net, net.lines());
        REQUIRE(r.feasible);
        CHECK(r.length == 2);
        CHECK(r.journey.length() == 2);
    }
    SUBCASE("star needs four steps") {
        Network net = testutil::load_fixture("star.txt");
        CoverSearchResult r = shortest_cover_walk(net, net.lines());
        REQUIRE(r.feasible);
        CHECK(r.length == 4);
    }
    SUBCASE("triangle needs three steps") {
        Network net = testutil::load_fixture("triangle.txt");
        CoverSearchResult r = shortest_cover_walk(net, net.lines());
        REQUIRE(r.feasible);
        CHECK(r.length == 3);
    }
}

TEST_CASE("cover walk journeys chain and cover") {
    for (std::uint32_t seed = 100; seed < 130; ++seed) {
        Network net = build_network(testutil::random_spec(seed));
        if (net.lines().empty())
            continue;
        CoverSearchResult r = shortest_cover_walk(net, net.lines());
        if (!r.feasible)
            continue;
        CHECK(static_cast<std::size_t>(r.length) == r.journey.length());
        std::set<LineId> covered;
        for (std::size_t i = 0; i < r.journey.steps.size(); ++i) {
            covered.insert(r.journey.steps[i].line);
            if (i > 0)
                CHECK(r.journey.steps[i].departure == r.journey.steps[i - 1].arrival);
        }
        for (const auto& line : net.lines())
            CHECK(covered.count(line));
    }
}

TEST_CASE("cover walk is deterministic") {
    Network net = testutil::load_fixture("star.txt");
    CoverSearchResult a = shortest_cover_walk(net, net.lines());
    CoverSearchResult b = shortest_cover_walk(net, net.lines());
    CHECK(a.journey == b.journey);
}

TEST_CASE("shortest cover cycle on the fixtures") {
    SUBCASE("star cycle doubles every leaf line") {
        Network net = testutil::load_fixture("star.txt");
        CoverSearchResult r = shortest_cover_cycle(net, net.lines());
        REQUIRE(r.feasible);
        CHECK(r.length == 6);
        CHECK(r.journey.steps.front().departure == r.journey.steps.back().arrival);
    }
    SUBCASE("triangle cycle is the triangle") {
        Network net = testutil::load_fixture("triangle.txt");
        CoverSearchResult r = shortest_cover_cycle(net, net.lines());
        REQUIRE(r.feasible);
        CHECK(r.length == 3);
    }
}

TEST_CASE("memory budget is enforced with the required amount reported") {
    Network net = testutil::load_fixture("star.txt");
    OracleLimits limits;
    limits.memory_budget_bytes = 4;
    try {
        shortest_cover_walk(net, net.lines(), limits);
        FAIL("expected OracleBudgetError");
    } catch (const OracleBudgetError& e) {
        CHECK(e.required_bytes == 4ull * (1 << 3));  // 4 stations, 3 colours
    }
}

TEST_CASE("unreachable colours make the search infeasible, not crash") {
    // two disconnected islands with their own lines
    NetworkSpec spec;
    spec.stations = {{"A", std::nullopt, 1},
                     {"B", std::nullopt, 2},
                     {"C", std::nullopt, 3},
                     {"D", std::nullopt, 4}};
    spec.lines = {{"L1", 5}, {"L2", 6}};
    spec.segments = {{"L1", "A", "B", false, 7}, {"L2", "C", "D", false, 8}};
    Network net = build_network(spec);
    CHECK_FALSE(shortest_cover_walk(net, net.lines()).feasible);
    CHECK_FALSE(shortest_cover_cycle(net, net.lines()).feasible);
}

TEST_CASE("shortest cover path branch and bound") {
    SUBCASE("the star hub cannot be avoided") {
        Network net = testutil::load_fixture("star.txt");
        PathSearchResult r = shortest_cover_path(net, net.lines());
        CHECK(r.proven);
        CHECK_FALSE(r.feasible);
    }
    SUBCASE("the triangle has no simple cover path") {
        Network net = testutil::load_fixture("triangle.txt");
        PathSearchResult r = shortest_cover_path(net, net.lines());
        CHECK(r.proven);
        CHECK_FALSE(r.feasible);
    }
    SUBCASE("the two-step walk is already simple") {
        Network net = testutil::load_fixture("path2.txt");
        PathSearchResult r = shortest_cover_path(net, net.lines());
        REQUIRE(r.feasible);
        CHECK(r.length == 2);
    }
}

TEST_CASE("enumeration finds exactly the optimal arc sets") {
    SUBCASE("triangle walk: the two orientations") {
        Network net = testutil::load_fixture("triangle.txt");
        VariantConfig v;
        v.required_colors = net.lines();
        EnumerationResult r = enumerate_optimal_arcsets(net, v);
        CHECK(r.complete);
        CHECK(r.objective == 3);
        CHECK(r.arcsets.size() == 2);
    }
    SUBCASE("two-line path: each direction") {
        Network net = testutil::load_fixture("path2.txt");
        VariantConfig v;
        v.required_colors = net.lines();
        EnumerationResult r = enumerate_optimal_arcsets(net, v);
        CHECK(r.complete);
        CHECK(r.objective == 2);
        CHECK(r.arcsets.size() == 2);
    }
    SUBCASE("star walk: three choices of the outer pair, ordered both ways") {
        Network net = testutil::load_fixture("star.txt");
        VariantConfig v;
        v.required_colors = net.lines();
        EnumerationResult r = enumerate_optimal_arcsets(net, v);
        CHECK(r.complete);
        CHECK(r.objective == 4);
        // start leaf and end leaf picked from three lines: 3 * 2 = 6 sets
        CHECK(r.arcsets.size() == 6);
    }
}

TEST_CASE("enumeration respects restrictions") {
    Network net = testutil::load_fixture("star.txt");
    SUBCASE("no simple path covers the star") {
        VariantConfig v;
        v.shape = Shape::path;
        v.required_colors = net.lines();
        EnumerationResult r = enumerate_optimal_arcsets(net, v);
        CHECK(r.complete);
        CHECK_FALSE(r.feasible);
        CHECK(r.arcsets.empty());
    }
    SUBCASE("star cycles at six steps") {
        VariantConfig v;
        v.shape = Shape::cycle;
        v.required_colors = net.lines();
        EnumerationResult r = enumerate_optimal_arcsets(net, v);
        CHECK(r.complete);
        CHECK(r.objective == 6);
        // one arc set: all six arcs (orders differ, sets do not)
        CHECK(r.arcsets.size() == 1);
    }
    SUBCASE("triangle with line contiguity stays at three") {
        Network tri = testutil::load_fixture("triangle.txt");
        VariantConfig v;
        v.required_colors = tri.lines();
        v.forbid_line_reuse = true;
        EnumerationResult r = enumerate_optimal_arcsets(tri, v);
        CHECK(r.complete);
        CHECK(r.objective == 3);
        CHECK(r.arcsets.size() == 2);
    }
}

TEST_CASE("run-length line predicate") {
    Journey j;
    j.steps = {{"A", "B", "L1"}, {"B", "C", "L1"}, {"C", "D", "L2"}, {"D", "E", "L1"}};
    CHECK_FALSE(journey_has_unique_line_runs(j, {"L1", "L2"}, false));
    j.steps = {{"A", "B", "L1"}, {"B", "C", "L1"}, {"C", "D", "L2"}};
    CHECK(journey_has_unique_line_runs(j, {"L1", "L2"}, false));
    // a wrap-around run is one run on a cycle
    j.steps = {{"A", "B", "L1"}, {"B", "C", "L2"}, {"C", "A", "L1"}};
    CHECK_FALSE(journey_has_unique_line_runs(j, {"L1", "L2"}, false));
    CHECK(journey_has_unique_line_runs(j, {"L1", "L2"}, true));
    // only required lines are constrained
    j.steps = {{"A", "B", "NR"}, {"B", "C", "L1"}, {"C", "D", "NR"}};
    CHECK(journey_has_unique_line_runs(j, {"L1"}, false));
}

TEST_CASE("oracle_solve dispatches every variant") {
    Network net = testutil::load_fixture("star.txt");
    VariantConfig v;
    v.required_colors = net.lines();

    OracleSolveResult walk = oracle_solve(net, v);
    CHECK(walk.objective == 4);
    CHECK(walk.arcset.size() == 4);

    v.shape = Shape::cycle;
    OracleSolveResult cycle = oracle_solve(net, v);
    CHECK(cycle.objective == 6);

    v.shape = Shape::path;
    OracleSolveResult path = oracle_solve(net, v);
    CHECK_FALSE(path.feasible);
    CHECK(path.proven);
}
