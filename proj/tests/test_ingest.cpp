#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "metrocover/ingest.hpp"

using namespace metrocover;

TEST_CASE("parse_network_file reads the minimal file") {
    NetworkSpec spec = parse_network_file("station A\nstation B\nline L1\nsegment L1 A B\n");
    CHECK(spec.stations.size() == 2);
    CHECK(spec.lines.size() == 1);
    REQUIRE(spec.segments.size() == 1);
    CHECK_FALSE(spec.segments[0].oneway);
    CHECK(spec.segments[0].line_no == 4);
}

TEST_CASE("parse_network_file understands oneway, quotes, coordinates, comments") {
    std::string text =
        "# sample network\n"
        "station \"La Motte-Picquet - Grenelle\" 48.849 2.298\n"
        "station Cambronne\n"
        "line 6\n"
        "segment 6 Cambronne \"La Motte-Picquet - Grenelle\"  # a step\n"
        "line 7bis\n"
        "station Botzaris\n"
        "station \"Place des Fetes\"\n"
        "segment 7bis Botzaris \"Place des Fetes\" oneway\n";
    NetworkSpec spec = parse_network_file(text);
    CHECK(spec.stations.size() == 4);
    REQUIRE(spec.stations[0].position.has_value());
    CHECK(spec.stations[0].position->lat == doctest::Approx(48.849));
    CHECK(spec.segments.size() == 2);
    CHECK(spec.segments[1].oneway);
    CHECK(spec.dataset_name == "sample network");
}

TEST_CASE("parse_network_file reports line numbers on errors") {
    auto check_error = [](const std::string& text, int line_no) {
        try {
            parse_network_file(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line_no() == line_no);
        }
    };
    check_error("station A\nwat A B\n", 2);                                // unknown directive
    check_error("station A\nstation B\nsegment L1 A B\n", 3);              // line not declared
    check_error("line L1\nstation A\nsegment L1 A B\n", 3);                // station use first
    check_error("station A\nstation A\n", 2);                              // duplicate station
    check_error("station A 48.0\n", 1);                                    // half a coordinate
    check_error("station A bad 2.0\n", 1);                                 // malformed number
    check_error("station \"A\nline L1\n", 1);                              // unterminated quote
    check_error("station A\nstation B\nline L\nsegment L A B twice\n", 4); // bad flag token
}

TEST_CASE("validate_spec flags consistency errors and warnings") {
    NetworkSpec good = parse_network_file(
        "station A\nstation B\nstation C\nline L1\nline L2\n"
        "segment L1 A B\nsegment L2 B C\n");
    CHECK(validate_spec(good).empty());

    SUBCASE("segment referencing undeclared station") {
        NetworkSpec spec = good;
        spec.segments.push_back({"L1", "A", "Q", false, 99});
        auto diags = validate_spec(spec);
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].severity == Diagnostic::Severity::error);
        CHECK(diags[0].message.find("Q") != std::string::npos);
    }
    SUBCASE("unused line warns, never errors") {
        NetworkSpec spec = good;
        spec.lines.push_back({"L3", 42});
        auto diags = validate_spec(spec);
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].severity == Diagnostic::Severity::warning);
        CHECK(diags[0].message.find("L3") != std::string::npos);
    }
    SUBCASE("isolated station warns") {
        NetworkSpec spec = good;
        spec.stations.push_back({"Lonely", std::nullopt, 43});
        auto diags = validate_spec(spec);
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].severity == Diagnostic::Severity::warning);
    }
    SUBCASE("duplicate direction across oneway and undirected") {
        NetworkSpec spec = good;
        spec.segments.push_back({"L1", "A", "B", true, 44});
        auto diags = validate_spec(spec);
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].severity == Diagnostic::Severity::error);
    }
}

TEST_CASE("canonical_serialize round-trips and is order-insensitive") {
    std::string one =
        "station B\nstation A\nstation C\nline L2\nline L1\n"
        "segment L2 C B\nsegment L1 A B\n";
    std::string two =
        "station A\nstation B\nstation C\nline L1\nline L2\n"
        "segment L1 B A\nsegment L2 B C\n";
    Network n1 = build_network(parse_network_file(one));
    Network n2 = build_network(parse_network_file(two));
    CHECK(canonical_serialize(n1) == canonical_serialize(n2));

    Network reparsed = build_network(parse_network_file(canonical_serialize(n1)));
    CHECK(reparsed == n1);
}

TEST_CASE("canonical_serialize keeps oneway flags, corridors and coordinates") {
    std::string text =
        "station \"Gare du Nord\" 48.880 2.355\n"
        "station Magenta\n"
        "station Stalingrad\n"
        "line 5\nline E\n"
        "segment 5 \"Gare du Nord\" Stalingrad\n"
        "segment E Magenta Stalingrad oneway\n"
        "corridor Magenta \"Gare du Nord\"\n";
    Network net = build_network(parse_network_file(text));
    std::string canonical = canonical_serialize(net);
    CHECK(canonical.find("oneway") != std::string::npos);
    CHECK(canonical.find("corridor \"Gare du Nord\" Magenta") != std::string::npos);

    Network reparsed = build_network(parse_network_file(canonical));
    CHECK(reparsed == net);
    CHECK(canonical_serialize(reparsed) == canonical);
}

TEST_CASE("round-trip parse-serialize-parse equals parse on random specs") {
    for (std::uint32_t seed = 1; seed <= 40; ++seed) {
        NetworkSpec spec = testutil::random_spec(seed);
        Network net = build_network(spec);
        std::string text = canonical_serialize(net);
        Network again = build_network(parse_network_file(text));
        CHECK(again == net);
        CHECK(canonical_serialize(again) == text);
    }
}

TEST_CASE("fixture files validate cleanly") {
    for (const char* name :
         {"path2.txt", "triangle.txt", "star.txt", "directed.txt", "prune.txt"}) {
        NetworkSpec spec = load_network_file(testutil::source_dir() + "/fixtures/" + name);
        for (const auto& d : validate_spec(spec))
            CHECK(d.severity != Diagnostic::Severity::error);
    }
}
