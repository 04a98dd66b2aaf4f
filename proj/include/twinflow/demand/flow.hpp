#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "twinflow/demand/profile.hpp"
#include "twinflow/net/network.hpp"

namespace twinflow::demand {

/// Single-vehicle deterministic demand unit.
struct Flow {
    std::string id;
    double depart_time = 0.0;        // s
    std::vector<std::string> route;  // ordered road ids
    DriverProfile profile;

    friend bool operator==(const Flow&, const Flow&) = default;
};

enum class DemandPattern { uniform, alternating_major_minor };

/// True iff consecutive roads are joined by at least one connection.
bool route_connected(const net::RoadNetwork& net, const std::vector<std::string>& route);

/// Shortest route by free-flow travel time between two roads (inclusive of
/// both); empty when unreachable.
std::vector<std::string> shortest_route(const net::RoadNetwork& net, const std::string& from_road,
                                        const std::string& to_road);

struct DemandParams {
    DemandPattern pattern = DemandPattern::uniform;
    std::size_t total_vehicles = 0;
    double horizon = 3600.0;           // s
    std::uint64_t seed = 0;
    double alternation_period = 600.0; // s, major/minor emphasis switch
    DriverProfile profile;             // applied to every generated flow
};

/// Builds exactly total_vehicles single-vehicle flows with evenly spaced
/// depart times and seeded origin/destination draws between boundary stubs.
/// Pure function of its inputs.
std::vector<Flow> build_demand(const net::RoadNetwork& net, const DemandParams& params);

/// Expands a dialect flow document (interval-based multi-vehicle flows
/// allowed) into single-vehicle deterministic flows. Accepts either dialect
/// schema as well as the canonical flow list.
std::vector<Flow> convert_flows(const std::string& document);

std::string save_flows(const std::vector<Flow>& flows);
void save_flows_file(const std::vector<Flow>& flows, const std::filesystem::path& path);
std::vector<Flow> load_flows(const std::string& document);
std::vector<Flow> load_flows_file(const std::filesystem::path& path);

}  // namespace twinflow::demand
