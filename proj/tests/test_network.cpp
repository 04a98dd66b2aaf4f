#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "twinflow/net/network.hpp"
#include "twinflow/net/network_io.hpp"

using namespace twinflow;

namespace {

// independent re-derivation of the construction counts
struct GridCounts {
    int signalized;
    int segments;  // internal bidirectional segments
    int stubs;     // boundary bidirectional stubs
    int directed_roads() const { return 2 * (segments + stubs); }
};

GridCounts expected_counts(int rows, int cols) {
    GridCounts c{};
    c.signalized = rows * cols;
    c.segments = rows * (cols - 1) + cols * (rows - 1);
    c.stubs = 2 * rows + 2 * cols;
    return c;
}

}  // namespace

TEST_CASE("degenerate 1x1 grid: one signalized intersection, four bidirectional stubs") {
    const auto net = net::generate_grid({.rows = 1, .cols = 1});
    CHECK(net.signalized_count() == 1);
    CHECK(net.roads.size() == 8);  // 4 stubs, bidirectional
    for (const auto& r : net.roads) CHECK(r.length == doctest::Approx(200.0));
    CHECK(validate_network(net).empty());
}

TEST_CASE("grid edge counts match the counting oracle") {
    for (const auto [rows, cols] : {std::pair{4, 4}, std::pair{2, 3}, std::pair{1, 7}}) {
        CAPTURE(rows);
        CAPTURE(cols);
        const auto net = net::generate_grid({.rows = rows, .cols = cols, .lanes_per_direction = 3});
        const auto want = expected_counts(rows, cols);
        CHECK(net.signalized_count() == want.signalized);
        CHECK(static_cast<int>(net.roads.size()) == want.directed_roads());
    }
}

TEST_CASE("grid4x4 analog: six-lane roads, 16 signalized intersections") {
    const auto net = net::generate_grid({.rows = 4, .cols = 4, .lanes_per_direction = 3});
    CHECK(net.signalized_count() == 16);
    for (const auto& r : net.roads) CHECK(r.lanes == 3);  // 3 per direction = six-lane road
    CHECK(validate_network(net).empty());
    CHECK(net.signal_programs.size() == 16);
    for (const auto& [node, program] : net.signal_programs) {
        CAPTURE(node);
        REQUIRE(program.phases.size() == 2);
        CHECK(program.phases[0].duration == doctest::Approx(30.0));
    }
}

TEST_CASE("arterial: horizontal major, vertical minor, precondition enforced") {
    const auto net =
        net::generate_arterial({.rows = 4, .cols = 4, .major_lanes = 2, .minor_lanes = 1});
    CHECK(net.signalized_count() == 16);
    bool saw_major = false, saw_minor = false;
    for (const auto& r : net.roads) {
        if (r.road_class == net::RoadClass::major) {
            saw_major = true;
            CHECK(r.lanes == 2);
        }
        if (r.road_class == net::RoadClass::minor) {
            saw_minor = true;
            CHECK(r.lanes == 1);
        }
    }
    CHECK(saw_major);
    CHECK(saw_minor);
    CHECK(validate_network(net).empty());

    CHECK_THROWS_AS(net::generate_arterial({.rows = 1, .cols = 1, .major_lanes = 2, .minor_lanes = 2}),
                    net::NetworkError);
    CHECK_THROWS_AS(net::generate_grid({.rows = 0, .cols = 1}), net::NetworkError);
}

TEST_CASE("ingolstadt7-style corridor: 1x7 arterial") {
    const auto net =
        net::generate_arterial({.rows = 1, .cols = 7, .major_lanes = 2, .minor_lanes = 1});
    CHECK(net.signalized_count() == 7);
    CHECK(validate_network(net).empty());
}

TEST_CASE("generator output validates for a parameter sweep") {
    for (int rows = 1; rows <= 3; ++rows)
        for (int cols = 1; cols <= 3; ++cols)
            for (int lanes = 1; lanes <= 3; ++lanes) {
                const auto net = net::generate_grid(
                    {.rows = rows, .cols = cols, .lanes_per_direction = lanes, .block_length = 150.0});
                CAPTURE(rows);
                CAPTURE(cols);
                CAPTURE(lanes);
                CHECK(net::validate_network(net).empty());
            }
}

TEST_CASE("serialization round-trip is the identity") {
    const auto small = net::generate_grid({.rows = 1, .cols = 1});
    CHECK(net::load_network(net::save_network(small)) == small);

    const auto big = net::generate_grid({.rows = 4, .cols = 4, .lanes_per_direction = 3});
    CHECK(net::load_network(net::save_network(big)) == big);

    const auto arterial =
        net::generate_arterial({.rows = 2, .cols = 3, .major_lanes = 2, .minor_lanes = 1});
    CHECK(net::load_network(net::save_network(arterial)) == arterial);
}

TEST_CASE("golden file pins the canonical schema field names") {
    const std::filesystem::path golden = "data/golden_network_1x1.json";
    REQUIRE(std::filesystem::exists(golden));
    std::ifstream in(golden, std::ios::binary);
    const std::string want((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto net = net::generate_grid({.rows = 1, .cols = 1});
    CHECK(net::save_network(net) == want);
}

TEST_CASE("load_network rejects schema and referential-integrity problems") {
    CHECK_THROWS_WITH_AS(net::load_network("{"), doctest::Contains("schema error"), net::NetworkError);
    CHECK_THROWS_WITH_AS(net::load_network(R"({"roads": []})"), doctest::Contains("missing field"),
                         net::NetworkError);

    // a connection naming a missing lane
    auto net = net::generate_grid({.rows = 1, .cols = 1});
    net.connections.front().from_lane = "nonexistent#0";
    CHECK_THROWS_WITH_AS(net::load_network(net::save_network(net)),
                         doctest::Contains("referential-integrity"), net::NetworkError);
}

TEST_CASE("validate_network reports each violated invariant") {
    auto good = net::generate_grid({.rows = 2, .cols = 2});
    CHECK(net::validate_network(good).empty());

    SUBCASE("zero-length lane") {
        good.roads.front().length = 0.0;
        const auto report = net::validate_network(good);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations.front().code == "road-length");
    }
    SUBCASE("orphan signal group") {
        // retag one connection with a group no phase covers
        good.connections.front().signal_group = 7;
        const auto report = net::validate_network(good);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations.front().code == "signal-orphan-group");
    }
    SUBCASE("missing endpoint intersection") {
        good.roads.front().from = "ghost";
        const auto report = net::validate_network(good);
        CHECK(!report.empty());
        bool found = false;
        for (const auto& v : report.violations) found = found || v.code == "road-endpoint";
        CHECK(found);
    }
    SUBCASE("non-positive speed limit") {
        good.roads.back().speed_limit = -1.0;
        const auto report = net::validate_network(good);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations.front().code == "road-speed");
    }
}

TEST_CASE("lane ids are globally unique in generated networks") {
    const auto net = net::generate_grid({.rows = 3, .cols = 3, .lanes_per_direction = 2});
    std::set<std::string> ids;
    for (const auto& r : net.roads)
        for (int l = 0; l < r.lanes; ++l) CHECK(ids.insert(net::lane_id(r.id, l)).second);
}
