#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "twinflow/demand/flow.hpp"
#include "twinflow/demand/profile.hpp"
#include "twinflow/net/network.hpp"

using namespace twinflow;

TEST_CASE("make_profile reproduces every numeric entry of the taxonomy") {
    struct Row {
        const char* label;
        double accel, decel, emergency, min_gap, headway;
    };
    const Row rows[] = {
        {"aggressive_young", 3.1, -5.5, -9.0, 1.2, 1.0},
        {"courteous_young", 2.5, -4.5, -9.0, 2.5, 1.0},
        {"aggressive_middle_aged", 2.9, -5.0, -9.0, 2.0, 1.3},
        {"courteous_middle_aged", 2.4, -4.1, -9.0, 2.5, 1.5},
        {"aggressive_old", 2.6, -4.5, -9.0, 2.0, 1.7},
        {"courteous_old", 2.3, -3.8, -9.0, 2.5, 1.9},
    };
    for (const auto& row : rows) {
        CAPTURE(row.label);
        const auto p = demand::make_profile(row.label);
        CHECK(p.max_accel == row.accel);
        CHECK(p.max_decel == row.decel);
        CHECK(p.max_emergency_decel == row.emergency);
        CHECK(p.min_gap == row.min_gap);
        CHECK(p.min_headway == row.headway);
        CHECK(p.valid());
    }
    CHECK_THROWS_AS(demand::make_profile("reckless_teen"), demand::DemandError);
}

TEST_CASE("build_demand: empty, exact counts, connected routes") {
    const auto net = net::generate_grid({.rows = 2, .cols = 2, .lanes_per_direction = 2});

    demand::DemandParams params;
    params.total_vehicles = 0;
    CHECK(demand::build_demand(net, params).empty());

    params.total_vehicles = 100;
    params.horizon = 600.0;
    params.seed = 7;
    const auto flows = demand::build_demand(net, params);
    REQUIRE(flows.size() == 100);
    for (const auto& f : flows) {
        CAPTURE(f.id);
        CHECK(f.depart_time >= 0.0);
        CHECK(f.depart_time < params.horizon);
        CHECK(demand::route_connected(net, f.route));
    }
    // deterministic: same seed gives byte-identical serialized output
    CHECK(demand::save_flows(demand::build_demand(net, params)) == demand::save_flows(flows));
    params.seed = 8;
    CHECK(demand::save_flows(demand::build_demand(net, params)) != demand::save_flows(flows));
}

TEST_CASE("grid4x4-analog demand: 1473 vehicles, all routes connected") {
    const auto net = net::generate_grid({.rows = 4, .cols = 4, .lanes_per_direction = 3});
    demand::DemandParams params;
    params.total_vehicles = 1473;
    params.horizon = 3600.0;
    params.seed = 1;
    const auto flows = demand::build_demand(net, params);
    REQUIRE(flows.size() == 1473);
    for (const auto& f : flows) CHECK(demand::route_connected(net, f.route));
}

TEST_CASE("alternating pattern requires road classes and biases by period") {
    const auto grid = net::generate_grid({.rows = 2, .cols = 2});
    demand::DemandParams params;
    params.pattern = demand::DemandPattern::alternating_major_minor;
    params.total_vehicles = 10;
    CHECK_THROWS_AS(demand::build_demand(grid, params), demand::DemandError);

    const auto arterial =
        net::generate_arterial({.rows = 2, .cols = 2, .major_lanes = 2, .minor_lanes = 1});
    params.total_vehicles = 200;
    params.horizon = 2400.0;  // four 600 s periods
    params.seed = 3;
    const auto flows = demand::build_demand(arterial, params);
    REQUIRE(flows.size() == 200);
    // flows departing in an even period start on a major-class stub
    for (const auto& f : flows) {
        const bool major_phase = static_cast<int>(f.depart_time / 600.0) % 2 == 0;
        const auto* first = arterial.find_road(f.route.front());
        REQUIRE(first != nullptr);
        CHECK(first->road_class == (major_phase ? net::RoadClass::major : net::RoadClass::minor));
    }
}

TEST_CASE("shortest_route follows free-flow travel time") {
    const auto net = net::generate_grid({.rows = 1, .cols = 3, .lanes_per_direction = 1});
    // west stub in to east stub out: straight through the corridor
    const auto route = demand::shortest_route(net, "sw_0_0_f", "se_0_2_r");
    REQUIRE(!route.empty());
    CHECK(route.front() == "sw_0_0_f");
    CHECK(route.back() == "se_0_2_r");
    CHECK(demand::route_connected(net, route));
    CHECK(route.size() == 4);  // stub in, two internal segments, stub out
}

TEST_CASE("convert_flows expands interval flows to single-vehicle departures") {
    SUBCASE("rate 1 veh/s over [0, 3) gives departures at 0, 1, 2") {
        const std::string doc = R"({"flows": [{"id": "f", "route": ["a", "b"],
                                              "begin": 0.0, "end": 3.0, "rate": 1.0}]})";
        const auto flows = demand::convert_flows(doc);
        REQUIRE(flows.size() == 3);
        CHECK(flows[0].depart_time == 0.0);
        CHECK(flows[1].depart_time == 1.0);
        CHECK(flows[2].depart_time == 2.0);
        for (const auto& f : flows) CHECK(f.route == std::vector<std::string>{"a", "b"});
    }
    SUBCASE("dialect-A interval schema") {
        const std::string doc = R"([{"route": ["a"], "interval": 2.0,
                                     "startTime": 0.0, "endTime": 10.0}])";
        const auto flows = demand::convert_flows(doc);
        REQUIRE(flows.size() == 5);  // 0, 2, 4, 6, 8
        CHECK(flows.back().depart_time == 8.0);
    }
    SUBCASE("already-single-vehicle document is unchanged apart from normalization") {
        const auto net = net::generate_grid({.rows = 1, .cols = 1});
        demand::DemandParams params;
        params.total_vehicles = 5;
        params.horizon = 50.0;
        const auto flows = demand::build_demand(net, params);
        const auto converted = demand::convert_flows(demand::save_flows(flows));
        CHECK(converted == flows);
    }
    SUBCASE("rate 0 expands to nothing") {
        const std::string doc = R"({"flows": [{"id": "f", "route": ["a"],
                                               "begin": 0.0, "end": 100.0, "rate": 0.0}]})";
        CHECK(demand::convert_flows(doc).empty());
    }
    SUBCASE("negative rate is an error") {
        const std::string doc = R"({"flows": [{"id": "f", "route": ["a"],
                                               "begin": 0.0, "end": 1.0, "rate": -1.0}]})";
        CHECK_THROWS_WITH_AS(demand::convert_flows(doc), doctest::Contains("negative-rate"),
                             demand::DemandError);
    }
    SUBCASE("unrecognized document is a schema error") {
        CHECK_THROWS_WITH_AS(demand::convert_flows(R"({"nope": 1})"), doctest::Contains("schema error"),
                             demand::DemandError);
    }
}

TEST_CASE("flow round-trip preserves profiles") {
    demand::DriverProfile profile;
    profile.car_following = demand::CarFollowingModel::wiedemann;
    profile.aggressiveness = demand::make_profile("courteous_old");
    profile.gap_tolerance = 1.18;
    profile.wagner.beta = 0.25;
    const std::vector<demand::Flow> flows = {{"x1", 3.5, {"a", "b", "c"}, profile}};
    CHECK(demand::load_flows(demand::save_flows(flows)) == flows);
}
